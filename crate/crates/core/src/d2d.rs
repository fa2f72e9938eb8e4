//! Interference-aware pairing and power control for LR→SR D2D links that
//! reuse cellular sub-channels.
//!
//! SRs holding cellular channels are ranked by booked admission (largest
//! first). Each LR, in id order, reuses the channel whose cellular
//! transmitter interferes least with the LR's serving SR. Its power is the
//! smaller of the power that meets the D2D SINR floor and the largest power
//! the cellular link tolerates at its own SINR floor. Every SR and channel is
//! reused at most once.

use alloc::vec;
use alloc::vec::Vec;

use crate::dispatch::ScheduleDecision;
use crate::math::db_to_linear;
use crate::netmodel::{rate, sinr_cellular, ChannelState, DeviceId, SpectrumConfig, Topology};
use crate::sufficient::CellularAllocation;

/// Linear SINR floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrThresholds {
    pub d2d_min: f64,
    pub cell_min: f64,
}

impl SinrThresholds {
    pub fn from_db(d2d_min_db: f64, cell_min_db: f64) -> Self {
        Self {
            d2d_min: db_to_linear(d2d_min_db),
            cell_min: db_to_linear(cell_min_db),
        }
    }
}

impl Default for SinrThresholds {
    fn default() -> Self {
        Self::from_db(3.0, 6.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2DLink {
    pub lr: DeviceId,
    /// Serving SR receiving the LR's model.
    pub receiver: DeviceId,
    /// SR whose cellular channel is reused.
    pub reused_sr: DeviceId,
    pub channel: usize,
    /// Transmit power in watts.
    pub power: f64,
    /// Achieved D2D SINR.
    pub sinr: f64,
    /// Achieved D2D rate in bits/s.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// No SR/channel left to reuse (or the LR is not associated).
    NoReusableChannel,
    /// The required power exceeds the LR's maximum.
    PowerCapExceeded,
    /// The cellular link cannot tolerate any D2D interference.
    CellularIntolerant,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct D2DGrant {
    pub links: Vec<D2DLink>,
    pub skipped: Vec<(DeviceId, SkipReason)>,
}

impl D2DGrant {
    pub fn link_of(&self, lr: DeviceId) -> Option<&D2DLink> {
        self.links.iter().find(|l| l.lr == lr)
    }
}

/// Power and SINR of LR `k` reusing channel `n` of cellular SR `cell` whose
/// power on `n` is `cell_power`, delivering to `receiver`.
pub fn d2d_power(
    k: DeviceId,
    receiver: DeviceId,
    cell: DeviceId,
    cell_power: f64,
    n: usize,
    topology: &Topology,
    gains: &ChannelState,
    spectrum: &SpectrumConfig,
    thresholds: &SinrThresholds,
) -> Result<(f64, f64), SkipReason> {
    let n0 = spectrum.noise_power;
    let g_direct = gains.gain(k, receiver, n);
    let g_cross = gains.gain(cell, receiver, n);
    let g_k_edge = gains.to_edge(k, n);
    let g_cell_edge = gains.to_edge(cell, n);
    let interference = cell_power * g_cross;

    let p_floor = if g_direct > 0.0 {
        thresholds.d2d_min * (n0 + interference) / g_direct
    } else {
        f64::INFINITY
    };
    let p_tolerated = if g_k_edge > 0.0 {
        (cell_power * g_cell_edge - thresholds.cell_min * n0) / (thresholds.cell_min * g_k_edge)
    } else {
        f64::INFINITY
    };
    let mut p = p_floor.min(p_tolerated);
    if !(p > 0.0) {
        return Err(SkipReason::CellularIntolerant);
    }
    if p > topology.devices[k].p_max {
        return Err(SkipReason::PowerCapExceeded);
    }
    // Keep the cellular floor exact in floating point.
    let cell_sinr = |p: f64| cell_power * g_cell_edge / (n0 + p * g_k_edge);
    while cell_sinr(p) < thresholds.cell_min {
        p *= 1.0 - f64::EPSILON;
    }
    let sinr = p * g_direct / (n0 + interference);
    Ok((p, sinr))
}

/// Pairs LRs with reusable cellular channels.
pub fn allocate_d2d(
    topology: &Topology,
    cellular: &CellularAllocation,
    gains: &ChannelState,
    spectrum: &SpectrumConfig,
    thresholds: &SinrThresholds,
) -> D2DGrant {
    let mut ranked: Vec<usize> = (0..cellular.srs.len())
        .filter(|&i| cellular.num_channels[i] > 0)
        .collect();
    ranked.sort_by(|&a, &b| {
        cellular.admitted[b]
            .total_cmp(&cellular.admitted[a])
            .then(cellular.srs[a].cmp(&cellular.srs[b]))
    });
    let mut sr_open = vec![true; cellular.srs.len()];
    let mut channel_open: Vec<bool> = cellular.owner.iter().map(Option::is_some).collect();

    let mut grant = D2DGrant::default();
    for k in topology.lrs() {
        let Some(receiver) = topology.serving_sr(k) else {
            grant.skipped.push((k, SkipReason::NoReusableChannel));
            continue;
        };
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &ranked {
            let cell = cellular.srs[i];
            if !sr_open[i] || cell == receiver {
                continue;
            }
            for n in cellular.channels_of(cell).filter(|&n| channel_open[n]) {
                let cross = gains.gain(cell, receiver, n);
                if best.map_or(true, |(b, _, _)| cross < b) {
                    best = Some((cross, i, n));
                }
            }
        }
        let Some((_, i, n)) = best else {
            grant.skipped.push((k, SkipReason::NoReusableChannel));
            continue;
        };
        let cell = cellular.srs[i];
        match d2d_power(k, receiver, cell, cellular.power[n], n, topology, gains, spectrum, thresholds) {
            Ok((power, sinr)) => {
                grant.links.push(D2DLink {
                    lr: k,
                    receiver,
                    reused_sr: cell,
                    channel: n,
                    power,
                    sinr,
                    rate: rate(sinr, spectrum),
                });
                sr_open[i] = false;
                channel_open[n] = false;
            }
            Err(reason) => grant.skipped.push((k, reason)),
        }
    }
    grant
}

/// Channels on which a reusing D2D link pushed the cellular SINR below
/// `cell_min`.
pub fn protection_violations(
    decision: &ScheduleDecision,
    topology: &Topology,
    gains: &ChannelState,
    spectrum: &SpectrumConfig,
    cell_min: f64,
) -> Vec<(usize, f64)> {
    let srs = topology.srs();
    let lrs = topology.lrs();
    (0..decision.n_channels())
        .filter(|&n| lrs.iter().any(|&k| decision.rho[k][n]))
        .filter_map(|n| {
            let h = srs.iter().copied().find(|&h| decision.rho[h][n])?;
            let s = sinr_cellular(h, n, decision, topology, gains, spectrum);
            (s < cell_min).then_some((n, s))
        })
        .collect()
}
