use alloc::vec::Vec;
use core::fmt;

use super::{regime, Regime, ScheduleDecision};
use crate::netmodel::{DeviceId, DeviceState, Role, Topology};

/// Relative slack for sums of split powers.
const POWER_TOL: f64 = 1e-12;

/// The per-slot admission constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// Admission no larger than the scheduled rate (per-slot form).
    AdmissionRate,
    /// `0 <= a_m <= A_m`.
    AdmissionBounds,
    /// At most one cellular plus one D2D link per channel; D2D only reuses.
    ChannelSharing,
    /// Every LR relays through exactly one in-range SR.
    Association,
    /// At most one cellular link per channel.
    CellularExclusive,
    /// At most one D2D link per channel.
    D2DExclusive,
    /// Every SR holds a channel when channels are sufficient.
    MinimumChannel,
    /// Per-device power budget.
    PowerBudget,
}

impl Constraint {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::AdmissionRate => "10-1",
            Self::AdmissionBounds => "10-2",
            Self::ChannelSharing => "10-3",
            Self::Association => "10-4",
            Self::CellularExclusive => "10-5",
            Self::D2DExclusive => "10-6",
            Self::MinimumChannel => "10-7",
            Self::PowerBudget => "10-8",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub device: Option<DeviceId>,
    pub channel: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint {}", self.constraint.tag())?;
        if let Some(m) = self.device {
            write!(f, " device {m}")?;
        }
        if let Some(n) = self.channel {
            write!(f, " channel {n}")?;
        }
        Ok(())
    }
}

/// Checks a decision against every per-slot constraint. `states[m].arrivals`
/// is the number of bits device `m` could admit.
pub fn validate(decision: &ScheduleDecision, states: &[DeviceState], topology: &Topology) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |constraint, device, channel| {
        out.push(Violation {
            constraint,
            device,
            channel,
        })
    };

    if !topology.association_is_valid() {
        push(Constraint::Association, None, None);
    }

    for m in 0..topology.len() {
        let a = decision.a[m];
        if !(a >= 0.0 && a <= states[m].arrivals) {
            push(Constraint::AdmissionBounds, Some(m), None);
        }
        if !(a <= decision.rate[m]) {
            push(Constraint::AdmissionRate, Some(m), None);
        }
        let mut total = 0.0;
        for n in 0..decision.n_channels() {
            let p = decision.power[m][n];
            if p < 0.0 || !p.is_finite() || (p > 0.0 && !decision.rho[m][n]) {
                push(Constraint::PowerBudget, Some(m), Some(n));
            }
            total += p;
        }
        if total > topology.devices[m].p_max * (1.0 + POWER_TOL) {
            push(Constraint::PowerBudget, Some(m), None);
        }
    }

    for n in 0..decision.n_channels() {
        let (mut cellular, mut d2d) = (0usize, 0usize);
        for m in 0..topology.len() {
            if decision.rho[m][n] {
                match topology.role(m) {
                    Role::Sr => cellular += 1,
                    Role::Lr => d2d += 1,
                }
            }
        }
        if cellular > 1 {
            push(Constraint::CellularExclusive, None, Some(n));
        }
        if d2d > 1 {
            push(Constraint::D2DExclusive, None, Some(n));
        }
        if cellular + d2d > 2 || (d2d > 0 && cellular == 0) {
            push(Constraint::ChannelSharing, None, Some(n));
        }
    }

    let srs = topology.srs();
    if regime(decision.n_channels(), srs.len()) == Regime::Sufficient {
        for h in srs {
            if decision.channels_of(h).next().is_none() {
                push(Constraint::MinimumChannel, Some(h), None);
            }
        }
    }
    out
}
