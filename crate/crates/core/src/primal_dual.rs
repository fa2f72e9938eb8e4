//! Primal-dual online scheduling for SRs when sub-channels are scarce.
//!
//! The edge server only learns an SR's state when the SR is granted a
//! channel, so it works from outdated per-channel rates. Each SR holds a
//! multiplier `λ_h` pricing the gap between the data it admits and the rate
//! it is served at:
//!
//! * device side, every slot: the admission is a projected proximal step,
//!   `a_h(t) = clamp(α - αλ_h + a_h(t-1), 0, A_h(t))`;
//! * edge side, every slot: each channel independently goes to the SR with
//!   the lowest score `1/(2α) - λ_h r_h^n(t-1) - ρ_h^n(t-1)/α`;
//! * on a grant, the multiplier takes a batch dual step over everything the
//!   SR admitted since its previous report,
//!   `λ_h ← [λ_h + ε(Σ a_h - Σ_n ρ_h^n r_h^n)]⁺`.
//!
//! Between reports the multiplier a device acts on is the committed value
//! plus `ε` times its pending batch. That is exactly the value the batch
//! update produces when split into per-slot increments (the projection never
//! binds while increments are non-negative), and it keeps the ceiling
//! `λ_h ≤ (ε + 1/α)·A_max + 1` valid at every slot.
//!
//! Admissions, arrivals and rates are expressed in scheduler units of
//! `unit_bits` bits; `α` and `A_max` are in those units.

use alloc::vec;
use alloc::vec::Vec;

use crate::netmodel::{DeviceId, RateOracle, Topology};
use crate::sufficient::CellularAllocation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalDualConfig {
    /// Dual step size `ε`.
    pub epsilon: f64,
    /// Primal step size `α`, in scheduler units.
    pub alpha: f64,
    /// Largest per-slot admission `A_max`, in bits.
    pub a_max_bits: f64,
    /// Bits per scheduler unit.
    pub unit_bits: f64,
}

impl Default for PrimalDualConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.00025,
            alpha: 1.0,
            a_max_bits: 40e3,
            unit_bits: 1e3,
        }
    }
}

impl PrimalDualConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter("epsilon must be finite and non-negative"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        if !(self.a_max_bits >= 0.0 && self.unit_bits > 0.0) {
            return Err(Error::InvalidParameter("a_max_bits and unit_bits must be positive"));
        }
        Ok(())
    }

    pub fn a_max(&self) -> f64 {
        self.a_max_bits / self.unit_bits
    }

    /// Upper bound every multiplier stays below.
    pub fn lambda_max(&self) -> f64 {
        (self.epsilon + 1.0 / self.alpha) * self.a_max() + 1.0
    }
}

/// Committed multipliers, one per SR.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub a_max: f64,
}

impl DualState {
    pub fn new(n_srs: usize, config: &PrimalDualConfig) -> Self {
        Self {
            lambda: vec![0.0; n_srs],
            epsilon: config.epsilon,
            alpha: config.alpha,
            a_max: config.a_max(),
        }
    }

    pub fn lambda_max(&self) -> f64 {
        (self.epsilon + 1.0 / self.alpha) * self.a_max + 1.0
    }

    pub fn update_multiplier(&mut self, i: usize, queued_admissions: f64, scheduled_rate: f64) {
        self.lambda[i] = update_multiplier(self.lambda[i], self.epsilon, queued_admissions, scheduled_rate);
    }
}

/// Lagged primal variables the edge server schedules from.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalState {
    /// `a_h(t-1)`, in scheduler units.
    pub a_prev: Vec<f64>,
    /// `ρ_h^n(t-1)`.
    pub rho_prev: Vec<Vec<bool>>,
    /// Last reported `r_h^n`, in scheduler units.
    pub r_prev: Vec<Vec<f64>>,
}

impl PrimalState {
    pub fn new(n_srs: usize, n_channels: usize) -> Self {
        Self {
            a_prev: vec![0.0; n_srs],
            rho_prev: vec![vec![false; n_channels]; n_srs],
            r_prev: vec![vec![0.0; n_channels]; n_srs],
        }
    }
}

/// Projected batch dual step.
pub fn update_multiplier(lambda: f64, epsilon: f64, queued_admissions: f64, scheduled_rate: f64) -> f64 {
    (lambda + epsilon * (queued_admissions - scheduled_rate)).max(0.0)
}

/// Minimizer of `a²/(2α) + (λ - 1 - a_prev/α)·a` over `[0, arrivals]`.
pub fn optimal_admission(lambda: f64, a_prev: f64, alpha: f64, arrivals: f64) -> f64 {
    let unconstrained = alpha - alpha * lambda + a_prev;
    if unconstrained <= 0.0 {
        0.0
    } else if unconstrained >= arrivals {
        arrivals
    } else {
        unconstrained
    }
}

/// Per-SR cost of taking channel `n`.
pub fn channel_score(lambda: f64, r_prev: f64, rho_prev: bool, alpha: f64) -> f64 {
    let prev = if rho_prev { 1.0 } else { 0.0 };
    1.0 / (2.0 * alpha) - lambda * r_prev - prev / alpha
}

/// Assigns each channel to the SR (by working-set slot) with the lowest
/// score; ties go to the lowest slot. Returns the winning slot per channel.
pub fn select_channels(lambda: &[f64], primal: &PrimalState, alpha: f64, channels: &[usize]) -> Vec<(usize, usize)> {
    channels
        .iter()
        .filter_map(|&n| {
            let mut best: Option<(f64, usize)> = None;
            for (i, &l) in lambda.iter().enumerate() {
                let s = channel_score(l, primal.r_prev[i][n], primal.rho_prev[i][n], alpha);
                if best.map_or(true, |(b, _)| s < b) {
                    best = Some((s, i));
                }
            }
            best.map(|(_, i)| (n, i))
        })
        .collect()
}

/// Outcome of one scheduling slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualStep {
    pub allocation: CellularAllocation,
    /// Device-side admission plan `a_h(t)`, in bits.
    pub planned: Vec<f64>,
    /// Bits actually moved per SR this slot (zero if not granted).
    pub admitted: Vec<f64>,
    /// Multipliers after the slot.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PrimalDualScheduler {
    srs: Vec<DeviceId>,
    n_channels: usize,
    config: PrimalDualConfig,
    dual: DualState,
    primal: PrimalState,
    /// Admissions since the last report, in scheduler units.
    backlog: Vec<f64>,
    edge_ops: u64,
}

impl PrimalDualScheduler {
    /// Starts with zero multipliers. `initial_report` supplies the per-channel
    /// full-power rates every SR reports when it joins.
    pub fn new(
        topology: &Topology,
        srs: &[DeviceId],
        n_channels: usize,
        config: PrimalDualConfig,
        initial_report: &dyn RateOracle,
    ) -> Result<Self> {
        config.validate()?;
        let mut srs = srs.to_vec();
        srs.sort_unstable();
        let mut primal = PrimalState::new(srs.len(), n_channels);
        for (i, &h) in srs.iter().enumerate() {
            let p = topology.devices[h].p_max;
            for n in 0..n_channels {
                primal.r_prev[i][n] = initial_report.link_rate(h, n, p) / config.unit_bits;
            }
        }
        Ok(Self {
            dual: DualState::new(srs.len(), &config),
            backlog: vec![0.0; srs.len()],
            srs,
            n_channels,
            config,
            primal,
            edge_ops: 0,
        })
    }

    pub fn srs(&self) -> &[DeviceId] {
        &self.srs
    }

    pub fn config(&self) -> &PrimalDualConfig {
        &self.config
    }

    pub fn dual(&self) -> &DualState {
        &self.dual
    }

    pub fn primal(&self) -> &PrimalState {
        &self.primal
    }

    /// Elementary score evaluations done by the edge server so far.
    pub fn edge_ops(&self) -> u64 {
        self.edge_ops
    }

    /// Multipliers devices act on in the next slot.
    pub fn lambda(&self) -> Vec<f64> {
        self.dual
            .lambda
            .iter()
            .zip(&self.backlog)
            .map(|(&l, &b)| l + self.config.epsilon * b)
            .collect()
    }

    /// Runs one slot. `available[m]` is the number of bits device `m` can
    /// send (queued plus new arrivals).
    pub fn step(&mut self, topology: &Topology, available: &[f64], oracle: &dyn RateOracle) -> PrimalDualStep {
        let unit = self.config.unit_bits;
        let a_max = self.config.a_max();
        let alpha = self.config.alpha;
        let lambda = self.lambda();

        let mut planned = vec![0.0; self.srs.len()];
        for (i, &h) in self.srs.iter().enumerate() {
            let cap = (available[h] / unit).min(a_max);
            let a = optimal_admission(lambda[i], self.primal.a_prev[i], alpha, cap);
            planned[i] = a;
            self.backlog[i] += a;
        }

        let channels: Vec<usize> = (0..self.n_channels).collect();
        let picks = select_channels(&lambda, &self.primal, alpha, &channels);
        self.edge_ops += (self.n_channels * self.srs.len()) as u64;

        let mut allocation = CellularAllocation::empty(self.srs.clone(), self.n_channels);
        for &(n, i) in &picks {
            let h = self.srs[i];
            allocation.grant_split(i, n, topology.devices[h].p_max);
        }
        allocation.refresh_actual(oracle);

        let mut admitted = vec![0.0; self.srs.len()];
        for (i, &h) in self.srs.iter().enumerate() {
            if allocation.num_channels[i] == 0 {
                continue;
            }
            let served = allocation.actual[i] / unit;
            let moved = (self.backlog[i] * unit).min(available[h]).min(allocation.actual[i]);
            admitted[i] = moved;
            allocation.admitted[i] = moved;
            self.dual.update_multiplier(i, self.backlog[i], served);
            self.backlog[i] = 0.0;
            let p = topology.devices[h].p_max;
            for n in 0..self.n_channels {
                self.primal.r_prev[i][n] = oracle.link_rate(h, n, p) / unit;
            }
        }

        for (i, &h) in self.srs.iter().enumerate() {
            for n in 0..self.n_channels {
                self.primal.rho_prev[i][n] = allocation.rho(h, n);
            }
        }
        self.primal.a_prev.copy_from_slice(&planned);

        PrimalDualStep {
            allocation,
            planned: planned.iter().map(|a| a * unit).collect(),
            admitted,
            lambda: self.lambda(),
        }
    }
}
