//! Learning plane: local gradient steps and two-level size-weighted model
//! aggregation (devices → SR → edge server).
//!
//! Local losses are per-sample averages, so the size-weighted mean of local
//! gradients is the gradient of the pooled average loss. One synchronized
//! local step followed by aggregation therefore lands on the centralized
//! gradient step.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{exp, ln_1p};
use crate::netmodel::{DeviceId, Topology};
use crate::{Error, Result};

/// Row-major samples with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDataset {
    samples: Vec<f64>,
    labels: Vec<f64>,
    dim: usize,
}

impl LocalDataset {
    pub fn new(samples: Vec<f64>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if labels.is_empty() || dim == 0 || samples.len() != labels.len() * dim {
            return Err(Error::InvalidParameter("dataset needs at least one row of `dim` features"));
        }
        Ok(Self { samples, labels, dim })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Concatenates datasets in the given order.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a LocalDataset>) -> Result<Self> {
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        let mut dim = 0;
        for p in parts {
            if dim != 0 && p.dim != dim {
                return Err(Error::InvalidParameter("datasets differ in dimension"));
            }
            dim = p.dim;
            samples.extend_from_slice(&p.samples);
            labels.extend_from_slice(&p.labels);
        }
        Self::new(samples, labels, dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub w: Vec<f64>,
    /// Learning rate.
    pub step: f64,
}

impl ModelWeights {
    pub fn new(w: Vec<f64>, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite and the step positive"));
        }
        Ok(Self { w, step })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `(w·x − y)² / 2`.
    Quadratic,
    /// `ln(1 + exp(−y·w·x))` with labels in {−1, +1}.
    Logistic,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ln(1 + e^{-z})` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z >= 0.0 {
        ln_1p(exp(-z))
    } else {
        -z + ln_1p(exp(z))
    }
}

/// `1 / (1 + e^{z})`.
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = exp(-z);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + exp(z))
    }
}

/// Per-sample average loss.
pub fn loss_value(w: &[f64], data: &LocalDataset, loss: Loss) -> f64 {
    let total: f64 = (0..data.size())
        .map(|i| {
            let z = dot(w, data.row(i));
            let y = data.label(i);
            match loss {
                Loss::Quadratic => 0.5 * (z - y) * (z - y),
                Loss::Logistic => softplus_neg(y * z),
            }
        })
        .sum();
    total / data.size() as f64
}

/// Gradient of the per-sample average loss.
pub fn gradient(w: &[f64], data: &LocalDataset, loss: Loss) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    for i in 0..data.size() {
        let x = data.row(i);
        let z = dot(w, x);
        let y = data.label(i);
        let coef = match loss {
            Loss::Quadratic => z - y,
            Loss::Logistic => -y * sigmoid_neg(y * z),
        };
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += coef * xj;
        }
    }
    let l = data.size() as f64;
    g.iter_mut().for_each(|v| *v /= l);
    g
}

/// One gradient step on the local loss.
pub fn local_step(w: &ModelWeights, data: &LocalDataset, loss: Loss) -> ModelWeights {
    let g = gradient(&w.w, data, loss);
    ModelWeights {
        w: w.w.iter().zip(&g).map(|(wi, gi)| wi - w.step * gi).collect(),
        step: w.step,
    }
}

/// Normalized size weights.
pub fn aggregation_weights(sizes: &[usize]) -> Vec<f64> {
    let total: usize = sizes.iter().sum();
    sizes.iter().map(|&s| s as f64 / total as f64).collect()
}

fn weighted_mean(parts: &[(&[f64], usize)]) -> Vec<f64> {
    let sizes: Vec<usize> = parts.iter().map(|p| p.1).collect();
    let weights = aggregation_weights(&sizes);
    let dim = parts.first().map_or(0, |p| p.0.len());
    let mut out = vec![0.0; dim];
    for ((w, _), c) in parts.iter().zip(&weights) {
        for (o, x) in out.iter_mut().zip(w.iter()) {
            *o += c * x;
        }
    }
    out
}

/// SR-level aggregate of the SR's own model and its attached LRs' models.
/// Returns the aggregate and the aggregated dataset size.
pub fn aggregate_sr(sr: &[f64], sr_size: usize, lrs: &[(&[f64], usize)]) -> (Vec<f64>, usize) {
    if lrs.is_empty() {
        return (sr.to_vec(), sr_size);
    }
    let mut parts = Vec::with_capacity(lrs.len() + 1);
    parts.extend_from_slice(lrs);
    parts.push((sr, sr_size));
    let size = parts.iter().map(|p| p.1).sum();
    (weighted_mean(&parts), size)
}

/// Edge-level aggregate of SR aggregates weighted by aggregated size.
pub fn aggregate_edge(srs: &[(&[f64], usize)]) -> Vec<f64> {
    if let [(w, _)] = srs {
        return w.to_vec();
    }
    weighted_mean(srs)
}

/// Largest componentwise gap, relative to the largest magnitude in `reference`.
fn relative_gap(a: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = a.iter().zip(reference).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if gap == 0.0 {
        0.0
    } else {
        gap / scale.max(f64::MIN_POSITIVE)
    }
}

/// One synchronized hierarchical round compared with centralized gradient
/// descent. Every device starts from `w_start`; `datasets` is indexed by
/// device id. Returns the larger of the SR-level and edge-level deviations.
pub fn check_theorem2(topology: &Topology, datasets: &[LocalDataset], w_start: &ModelWeights, loss: Loss) -> Result<f64> {
    if datasets.len() != topology.len() {
        return Err(Error::InvalidParameter("one dataset per device is required"));
    }
    let local: Vec<ModelWeights> = datasets.iter().map(|d| local_step(w_start, d, loss)).collect();
    let mut worst = 0.0f64;
    let mut sr_aggs: Vec<(Vec<f64>, usize)> = Vec::new();
    for h in topology.srs() {
        let members: Vec<DeviceId> = topology.lrs().into_iter().filter(|&k| topology.serving_sr(k) == Some(h)).collect();
        let lr_parts: Vec<(&[f64], usize)> = members.iter().map(|&k| (local[k].w.as_slice(), datasets[k].size())).collect();
        let (agg, size) = aggregate_sr(&local[h].w, datasets[h].size(), &lr_parts);

        let pooled = LocalDataset::pooled(members.iter().chain([h].iter()).map(|&m| &datasets[m]))?;
        let central = local_step(w_start, &pooled, loss);
        worst = worst.max(relative_gap(&agg, &central.w));
        sr_aggs.push((agg, size));
    }
    if !sr_aggs.is_empty() {
        let parts: Vec<(&[f64], usize)> = sr_aggs.iter().map(|(w, s)| (w.as_slice(), *s)).collect();
        let edge = aggregate_edge(&parts);
        let covered: Vec<DeviceId> = (0..topology.len())
            .filter(|&m| topology.srs().contains(&m) || topology.serving_sr(m).is_some())
            .collect();
        let pooled = LocalDataset::pooled(covered.iter().map(|&m| &datasets[m]))?;
        let central = local_step(w_start, &pooled, loss);
        worst = worst.max(relative_gap(&edge, &central.w));
    }
    Ok(worst)
}
