//! The discrete-time loop: arrivals, channel draws, scheduling, queues.

use std::time::Instant;

use cflmec_core::d2d::protection_violations;
use cflmec_core::dispatch::{validate, Dispatcher, SchedulerKind, SlotInput, SlotOutcome};
use cflmec_core::netmodel::{DeviceState, PhysicalRates, RateOracle, SpectrumConfig, Topology};
use cflmec_core::seed::derive_seed;

use crate::config::{RateOracleKind, SimConfig};
use crate::metrics::MetricsRow;
use crate::scenario;
use crate::SimError;

const SCHEDULER_STREAM: u64 = 6;

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub topology: Topology,
    pub rows: Vec<MetricsRow>,
    /// Multiplier per SR (in id order) after each slot. Empty when
    /// the primal-dual scheduler never ran.
    pub lambda_trace: Vec<Vec<f64>>,
    pub total_arrivals: f64,
    pub total_admitted: f64,
}

impl RunOutput {
    /// Mean admitted bits per slot, i.e. bits/s with one-second slots.
    pub fn throughput(&self) -> f64 {
        let slots = self.rows.iter().map(|r| r.slot + 1).max().unwrap_or(0);
        if slots == 0 {
            0.0
        } else {
            self.total_admitted / slots as f64
        }
    }
}

/// Steps one configured run slot by slot.
pub struct Engine {
    config: SimConfig,
    topology: Topology,
    spectrum: SpectrumConfig,
    capacity_means: Vec<f64>,
    dispatcher: Dispatcher,
    slot: u64,
}

impl Engine {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let topology = scenario::generate_topology(config)?;
        let spectrum = SpectrumConfig::new(config.n_subchannels, config.bandwidth_hz, config.noise_power())?;
        let capacity_means = scenario::capacity_means(config, topology.len());
        let dispatcher = Dispatcher::new(
            config.scheduler,
            config.dispatch(),
            derive_seed(config.seed, &[SCHEDULER_STREAM]),
        )?;
        Ok(Self {
            config: config.clone(),
            topology,
            spectrum,
            capacity_means,
            dispatcher,
            slot: 0,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// Multipliers the SRs act on in the next slot, if the primal-dual
    /// scheduler has run.
    pub fn lambda(&self) -> Option<Vec<f64>> {
        self.dispatcher.primal_dual().map(|pd| pd.lambda())
    }

    /// Runs one slot, returns the per-device rows and the scheduler outcome.
    pub fn step(&mut self) -> Result<(Vec<MetricsRow>, SlotOutcome, f64), SimError> {
        let slot = self.slot;
        let config = &self.config;
        let arrivals: Vec<f64> = (0..self.topology.len())
            .map(|m| scenario::arrival(config, slot, m))
            .collect();
        let gains = scenario::fading(config, &self.topology, slot);
        let physical = PhysicalRates {
            topology: &self.topology,
            gains: &gains,
            spectrum: &self.spectrum,
        };
        let table;
        let oracle: &dyn RateOracle = match config.rate_oracle {
            RateOracleKind::Physical => &physical,
            RateOracleKind::CapacityDraw => {
                table = scenario::capacities(config, &self.capacity_means, slot);
                &table
            }
        };
        let states: Vec<DeviceState> = self
            .topology
            .devices
            .iter()
            .zip(&arrivals)
            .map(|(d, a)| DeviceState {
                arrivals: d.queue_bits + a,
                capacity: 0.0,
            })
            .collect();
        let input = SlotInput {
            topology: &self.topology,
            gains: &gains,
            spectrum: &self.spectrum,
            oracle,
            states: &states,
        };

        let started = config.record_runtime.then(Instant::now);
        let outcome = self.dispatcher.dispatch(&input)?;
        let runtime = started.map_or(0.0, |s| s.elapsed().as_secs_f64());

        if config.validate_slots {
            let violations = validate(&outcome.decision, &states, &self.topology);
            if let Some(v) = violations.first() {
                return Err(SimError::Infeasible { slot, what: v.to_string() });
            }
            let cell_min = config.dispatch().thresholds.cell_min;
            if let Some((n, sinr)) =
                protection_violations(&outcome.decision, &self.topology, &gains, &self.spectrum, cell_min)
                    .first()
            {
                return Err(SimError::Infeasible {
                    slot,
                    what: format!("cellular SINR {sinr} below floor on channel {n}"),
                });
            }
        }

        let srs = self.topology.srs();
        let lambda = self.lambda();
        let mut rows = Vec::with_capacity(self.topology.len());
        for (m, device) in self.topology.devices.iter_mut().enumerate() {
            let a = outcome.decision.a[m];
            let granted = outcome.decision.channels_of(m).next().is_some();
            device.apply_slot(slot, arrivals[m], a, granted)?;
            let lambda = lambda
                .as_ref()
                .and_then(|l| srs.iter().position(|&h| h == m).map(|i| l[i]));
            rows.push(MetricsRow {
                slot,
                device: m,
                admitted: a,
                queue: device.queue_bits,
                lambda,
                rate: outcome.decision.rate[m],
                scheduler: config.scheduler.name().to_string(),
                seed: config.seed,
                runtime,
            });
        }
        self.slot += 1;
        Ok((rows, outcome, arrivals.iter().sum()))
    }
}

/// Runs a configuration to completion. Deterministic in the configuration.
pub fn run(config: &SimConfig) -> Result<RunOutput, SimError> {
    let mut engine = Engine::new(config)?;
    let mut out = RunOutput {
        topology: engine.topology().clone(),
        rows: Vec::with_capacity(config.slots as usize * config.n_devices),
        lambda_trace: Vec::new(),
        total_arrivals: 0.0,
        total_admitted: 0.0,
    };
    for _ in 0..config.slots {
        let (rows, outcome, arrived) = engine.step()?;
        out.total_arrivals += arrived;
        out.total_admitted += outcome.decision.total_admitted();
        if let Some(l) = engine.lambda() {
            out.lambda_trace.push(l);
        }
        out.rows.extend(rows);
    }
    Ok(out)
}

/// Total admission of every scheduler on the first slot of `config`'s
/// scenario. Only small instances are accepted by the offline search.
pub fn oracle_report(config: &SimConfig) -> Result<Vec<(SchedulerKind, f64)>, SimError> {
    SchedulerKind::ALL
        .into_iter()
        .map(|kind| {
            let c = SimConfig {
                scheduler: kind,
                slots: 1,
                ..config.clone()
            };
            let mut engine = Engine::new(&c)?;
            let (_, outcome, _) = engine.step()?;
            Ok((kind, outcome.decision.total_admitted()))
        })
        .collect()
}
