//! Top-level allocation: association is assumed done, the cellular scheduler
//! is picked by channel sufficiency, and LRs are then paired over D2D.
//!
//! Also hosts the comparison baselines, the constraint validator and the
//! exhaustive small-instance optimum.

mod baselines;
mod offline;
mod validate;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use baselines::{baseline_max_snr, baseline_random};
pub use offline::{offline_optimum, OFFLINE_MAX_CHANNELS, OFFLINE_MAX_LRS, OFFLINE_MAX_SRS};
pub use validate::{validate, Constraint, Violation};

use crate::d2d::{allocate_d2d, D2DGrant, SinrThresholds};
use crate::netmodel::{total_rate, ChannelState, DeviceId, DeviceState, RateOracle, Role, SpectrumConfig, Topology};
use crate::primal_dual::{PrimalDualConfig, PrimalDualScheduler};
use crate::seed;
use crate::sufficient::{allocate_sufficient, CellularAllocation};
use crate::{Error, Result};

/// Per-slot admission, channel indicators and powers for every device.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecision {
    /// Admitted bits per device.
    pub a: Vec<f64>,
    /// `rho[m][n]`: device `m` transmits on channel `n`.
    pub rho: Vec<Vec<bool>>,
    /// Transmit power per device and channel, in watts.
    pub power: Vec<Vec<f64>>,
    /// Achieved rate per device under this decision, in bits/s.
    pub rate: Vec<f64>,
}

impl ScheduleDecision {
    pub fn empty(n_devices: usize, n_channels: usize) -> Self {
        Self {
            a: vec![0.0; n_devices],
            rho: vec![vec![false; n_channels]; n_devices],
            power: vec![vec![0.0; n_channels]; n_devices],
            rate: vec![0.0; n_devices],
        }
    }

    pub fn n_devices(&self) -> usize {
        self.a.len()
    }

    pub fn n_channels(&self) -> usize {
        self.rho.first().map_or(0, Vec::len)
    }

    pub fn grant(&mut self, m: DeviceId, n: usize, power: f64) {
        self.rho[m][n] = true;
        self.power[m][n] = power;
    }

    pub fn channels_of(&self, m: DeviceId) -> impl Iterator<Item = usize> + '_ {
        self.rho[m].iter().enumerate().filter(|(_, &r)| r).map(|(n, _)| n)
    }

    pub fn total_admitted(&self) -> f64 {
        self.a.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    Cflmec,
    Random,
    MaxSnr,
    Offline,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [Self::Cflmec, Self::Random, Self::MaxSnr, Self::Offline];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cflmec => "cflmec",
            Self::Random => "random",
            Self::MaxSnr => "max_snr",
            Self::Offline => "offline",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(Error::InvalidParameter("unknown scheduler name"))
    }
}

/// Which cellular scheduler handles the slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// At least one channel per SR: greedy allocation.
    Sufficient,
    /// Fewer channels than SRs: primal-dual scheduling.
    Scarce,
}

pub fn regime(n_channels: usize, n_srs: usize) -> Regime {
    if n_channels >= n_srs {
        Regime::Sufficient
    } else {
        Regime::Scarce
    }
}

/// Everything a scheduler sees in one slot.
#[derive(Clone, Copy)]
pub struct SlotInput<'a> {
    pub topology: &'a Topology,
    pub gains: &'a ChannelState,
    pub spectrum: &'a SpectrumConfig,
    pub oracle: &'a dyn RateOracle,
    pub states: &'a [DeviceState],
}

impl SlotInput<'_> {
    pub fn n_channels(&self) -> usize {
        self.spectrum.n_subchannels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DispatchConfig {
    pub thresholds: SinrThresholds,
    pub primal_dual: PrimalDualConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub decision: ScheduleDecision,
    pub regime: Regime,
    pub cellular: CellularAllocation,
    pub d2d: D2DGrant,
    /// Multipliers per SR (in `topology.srs()` order) when the primal-dual
    /// scheduler ran.
    pub lambda: Option<Vec<f64>>,
}

/// Merges cellular and D2D grants into a decision. Admission is capped by the
/// available bits and the achieved rate; `cellular_cap` further caps SRs
/// (indexed like `cellular.srs`).
pub fn build_decision(
    input: &SlotInput<'_>,
    cellular: &CellularAllocation,
    d2d: &D2DGrant,
    cellular_cap: Option<&[f64]>,
) -> ScheduleDecision {
    let topology = input.topology;
    let mut decision = ScheduleDecision::empty(topology.len(), input.n_channels());
    for (n, owner) in cellular.owner.iter().enumerate() {
        if let Some(h) = *owner {
            decision.grant(h, n, cellular.power[n]);
        }
    }
    for link in &d2d.links {
        decision.grant(link.lr, link.channel, link.power);
    }
    for m in 0..topology.len() {
        decision.rate[m] = match topology.role(m) {
            Role::Sr => input.oracle.cellular_rate(m, &decision),
            Role::Lr => total_rate(m, &decision, topology, input.gains, input.spectrum),
        };
        let mut a = input.states[m].arrivals.min(decision.rate[m]);
        if let (Some(cap), Some(i)) = (cellular_cap, cellular.slot_of(m)) {
            a = a.min(cap[i]);
        }
        decision.a[m] = a.max(0.0);
    }
    decision
}

const RANDOM_STREAM: u64 = 0x5241_4e44;

/// Stateful allocator; the primal-dual scheduler keeps its multipliers across
/// slots.
#[derive(Debug, Clone)]
pub struct Dispatcher {
    kind: SchedulerKind,
    config: DispatchConfig,
    seed: u64,
    slot: u64,
    primal_dual: Option<PrimalDualScheduler>,
}

impl Dispatcher {
    pub fn new(kind: SchedulerKind, config: DispatchConfig, seed: u64) -> Result<Self> {
        config.primal_dual.validate()?;
        Ok(Self {
            kind,
            config,
            seed,
            slot: 0,
            primal_dual: None,
        })
    }

    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }

    pub fn primal_dual(&self) -> Option<&PrimalDualScheduler> {
        self.primal_dual.as_ref()
    }

    pub fn dispatch(&mut self, input: &SlotInput<'_>) -> Result<SlotOutcome> {
        let topology = input.topology;
        if input.states.len() != topology.len() {
            return Err(Error::InvalidParameter("one device state per device is required"));
        }
        let srs = topology.srs();
        let n_channels = input.n_channels();
        let regime = regime(n_channels, srs.len());
        let slot = self.slot;
        self.slot += 1;

        let mut lambda = None;
        let mut cap = None;
        let cellular = match self.kind {
            SchedulerKind::Offline => {
                let (_, decision, cellular, d2d) = offline::search(input, &self.config.thresholds)?;
                return Ok(SlotOutcome {
                    decision,
                    regime,
                    cellular,
                    d2d,
                    lambda: None,
                });
            }
            SchedulerKind::Random => {
                let mut rng = seed::stream(self.seed, &[RANDOM_STREAM, slot]);
                baseline_random(topology, n_channels, input.oracle, &mut rng)
            }
            SchedulerKind::MaxSnr => baseline_max_snr(topology, n_channels, input.oracle),
            SchedulerKind::Cflmec => match regime {
                Regime::Sufficient => {
                    let channels: Vec<usize> = (0..n_channels).collect();
                    allocate_sufficient(topology, &srs, &channels, n_channels, input.oracle)?
                }
                Regime::Scarce => {
                    if self.primal_dual.is_none() {
                        self.primal_dual = Some(PrimalDualScheduler::new(
                            topology,
                            &srs,
                            n_channels,
                            self.config.primal_dual,
                            input.oracle,
                        )?);
                    }
                    let scheduler = self.primal_dual.as_mut().expect("initialized above");
                    let available: Vec<f64> = input.states.iter().map(|s| s.arrivals).collect();
                    let step = scheduler.step(topology, &available, input.oracle);
                    lambda = Some(step.lambda);
                    cap = Some(step.admitted);
                    step.allocation
                }
            },
        };
        let d2d = allocate_d2d(topology, &cellular, input.gains, input.spectrum, &self.config.thresholds);
        let decision = build_decision(input, &cellular, &d2d, cap.as_deref());
        Ok(SlotOutcome {
            decision,
            regime,
            cellular,
            d2d,
            lambda,
        })
    }
}

/// One-shot allocation with fresh scheduler state.
pub fn dispatch(input: &SlotInput<'_>, kind: SchedulerKind, config: DispatchConfig, seed: u64) -> Result<SlotOutcome> {
    Dispatcher::new(kind, config, seed)?.dispatch(input)
}
