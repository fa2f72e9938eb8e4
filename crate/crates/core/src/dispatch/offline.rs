//! Exhaustive optimum for tiny instances, used as an upper reference.
//!
//! The search space holds every cellular owner assignment (channels may stay
//! idle), with each SR's power split evenly over its channels, and every
//! injective choice of reused channel (or none) per LR at the D2D power rule.
//! Any decision produced by the greedy or baseline allocators lies in it.

use alloc::vec;
use alloc::vec::Vec;

use super::{build_decision, regime, Regime, ScheduleDecision, SlotInput};
use crate::d2d::{d2d_power, D2DGrant, D2DLink, SinrThresholds};
use crate::netmodel::rate;
use crate::sufficient::CellularAllocation;
use crate::{Error, Result};

pub const OFFLINE_MAX_SRS: usize = 3;
pub const OFFLINE_MAX_LRS: usize = 2;
pub const OFFLINE_MAX_CHANNELS: usize = 3;

/// Maximum total admission over the search space and a decision attaining it.
pub fn offline_optimum(input: &SlotInput<'_>, thresholds: &SinrThresholds) -> Result<(f64, ScheduleDecision)> {
    search(input, thresholds).map(|(v, d, _, _)| (v, d))
}

pub(crate) fn search(
    input: &SlotInput<'_>,
    thresholds: &SinrThresholds,
) -> Result<(f64, ScheduleDecision, CellularAllocation, D2DGrant)> {
    let topology = input.topology;
    let srs = topology.srs();
    let lrs = topology.lrs();
    let n_channels = input.n_channels();
    if srs.len() > OFFLINE_MAX_SRS || lrs.len() > OFFLINE_MAX_LRS || n_channels > OFFLINE_MAX_CHANNELS {
        return Err(Error::InstanceTooLarge {
            srs: srs.len(),
            lrs: lrs.len(),
            channels: n_channels,
        });
    }
    let need_all = regime(n_channels, srs.len()) == Regime::Sufficient;
    let base = srs.len() + 1;
    let n_assignments = base.pow(n_channels as u32);

    let mut best: Option<(f64, ScheduleDecision, CellularAllocation, D2DGrant)> = None;
    for code in 0..n_assignments {
        let mut cellular = CellularAllocation::empty(srs.clone(), n_channels);
        let mut c = code;
        for n in 0..n_channels {
            let digit = c % base;
            c /= base;
            if digit > 0 {
                let i = digit - 1;
                cellular.grant_split(i, n, topology.devices[srs[i]].p_max);
            }
        }
        if need_all && cellular.num_channels.iter().any(|&k| k == 0) {
            continue;
        }
        cellular.refresh_actual(input.oracle);
        cellular.admitted.clone_from(&cellular.actual);

        // Candidate links per LR: None plus every feasible reuse.
        let options: Vec<Vec<Option<D2DLink>>> = lrs
            .iter()
            .map(|&k| {
                let mut opts = vec![None];
                let Some(receiver) = topology.serving_sr(k) else {
                    return opts;
                };
                for n in 0..n_channels {
                    let Some(cell) = cellular.owner[n] else { continue };
                    if cell == receiver {
                        continue;
                    }
                    let p = d2d_power(
                        k,
                        receiver,
                        cell,
                        cellular.power[n],
                        n,
                        topology,
                        input.gains,
                        input.spectrum,
                        thresholds,
                    );
                    if let Ok((power, sinr)) = p {
                        opts.push(Some(D2DLink {
                            lr: k,
                            receiver,
                            reused_sr: cell,
                            channel: n,
                            power,
                            sinr,
                            rate: rate(sinr, input.spectrum),
                        }));
                    }
                }
                opts
            })
            .collect();

        let mut pick = vec![0usize; lrs.len()];
        loop {
            let links: Vec<D2DLink> = pick.iter().zip(&options).filter_map(|(&j, o)| o[j]).collect();
            let distinct = links
                .iter()
                .enumerate()
                .all(|(a, l)| links[..a].iter().all(|m| m.channel != l.channel));
            if distinct {
                let d2d = D2DGrant {
                    links,
                    skipped: Vec::new(),
                };
                let decision = build_decision(input, &cellular, &d2d, None);
                let value = decision.total_admitted();
                if best.as_ref().map_or(true, |(b, ..)| value > *b) {
                    best = Some((value, decision, cellular.clone(), d2d));
                }
            }
            // Odometer over LR options.
            let mut idx = 0;
            while idx < pick.len() {
                pick[idx] += 1;
                if pick[idx] < options[idx].len() {
                    break;
                }
                pick[idx] = 0;
                idx += 1;
            }
            if idx == pick.len() {
                break;
            }
        }
    }
    best.ok_or(Error::InvalidParameter("no feasible allocation"))
}
