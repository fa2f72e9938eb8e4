//! Per-slot metric rows, batch summaries and their CSV files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::SimError;

/// One device in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub slot: u64,
    pub device: usize,
    /// Bits admitted for transmission.
    pub admitted: f64,
    /// Bits left queued after the slot.
    pub queue: f64,
    /// Multiplier, for SRs under the primal-dual scheduler.
    pub lambda: Option<f64>,
    /// Achieved rate in bits/s.
    pub rate: f64,
    pub scheduler: String,
    pub seed: u64,
    /// Wall-clock seconds of the scheduling call (0 unless recorded).
    pub runtime: f64,
}

/// Aggregate over the seed replicas of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub preset: String,
    pub scheduler: String,
    pub n_devices: usize,
    pub n_subchannels: usize,
    pub epsilon: f64,
    pub seeds: usize,
    pub throughput_mean_bps: f64,
    pub throughput_std_bps: f64,
    pub runtime_mean_s: f64,
    /// Mean slot at which the multipliers settled, where they did.
    pub stabilization_mean_slot: Option<f64>,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation (0 for fewer than two values).
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// First slot from which every multiplier moves by less than `tol` per slot
/// for `window` consecutive slots.
pub fn stabilization_slot(trace: &[Vec<f64>], tol: f64, window: usize) -> Option<usize> {
    let mut run = 0;
    for t in 1..trace.len() {
        let step = trace[t]
            .iter()
            .zip(&trace[t - 1])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if step < tol {
            run += 1;
            if run == window {
                return Some(t + 1 - window);
            }
        } else {
            run = 0;
        }
    }
    None
}

fn csv_err(path: &Path, e: csv::Error) -> SimError {
    SimError::Csv(path.display().to_string(), e)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| SimError::Io(path.display().to_string(), e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, SimError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}
