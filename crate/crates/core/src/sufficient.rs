//! Greedy QoS-aware sub-channel allocation for SRs when there are at least as
//! many sub-channels as SRs.
//!
//! Phase one gives every SR one channel at full power, repeatedly granting the
//! (SR, channel) pair with the largest rate relative to the channel's mean
//! rate across all SRs. Phase two hands each leftover channel to the SR with
//! the smallest booked admission relative to the mean, splitting its power
//! evenly over its channels.

use alloc::vec;
use alloc::vec::Vec;

use crate::netmodel::{DeviceId, RateOracle, Topology};
use crate::{Error, Result};

/// Cellular channel grants for a set of SRs. Each channel has at most one
/// owner, so the one-cellular-link-per-channel constraint holds by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CellularAllocation {
    /// The SR working set, in the order used by `admitted` and `num_channels`.
    pub srs: Vec<DeviceId>,
    /// Owning SR of each channel.
    pub owner: Vec<Option<DeviceId>>,
    /// Power of the owning SR on each channel, in watts.
    pub power: Vec<f64>,
    /// Booked admission per SR, in bits/s.
    pub admitted: Vec<f64>,
    /// Rate per SR evaluated at its final (possibly split) power, in bits/s.
    pub actual: Vec<f64>,
    pub num_channels: Vec<usize>,
    /// Number of grant steps taken.
    pub grant_steps: usize,
}

impl CellularAllocation {
    pub fn empty(srs: Vec<DeviceId>, n_channels: usize) -> Self {
        let h = srs.len();
        Self {
            srs,
            owner: vec![None; n_channels],
            power: vec![0.0; n_channels],
            admitted: vec![0.0; h],
            actual: vec![0.0; h],
            num_channels: vec![0; h],
            grant_steps: 0,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.owner.len()
    }

    pub fn rho(&self, h: DeviceId, n: usize) -> bool {
        self.owner[n] == Some(h)
    }

    pub fn slot_of(&self, h: DeviceId) -> Option<usize> {
        self.srs.iter().position(|&s| s == h)
    }

    pub fn channels_of(&self, h: DeviceId) -> impl Iterator<Item = usize> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == Some(h))
            .map(|(n, _)| n)
    }

    /// Gives channel `n` to the SR at working-set slot `i` and re-splits that
    /// SR's power evenly across all its channels.
    pub(crate) fn grant_split(&mut self, i: usize, n: usize, p_max: f64) {
        let h = self.srs[i];
        debug_assert!(self.owner[n].is_none());
        self.owner[n] = Some(h);
        self.num_channels[i] += 1;
        self.grant_steps += 1;
        let share = p_max / self.num_channels[i] as f64;
        for c in 0..self.owner.len() {
            if self.owner[c] == Some(h) {
                self.power[c] = share;
            }
        }
    }

    /// Recomputes `actual` from the final powers.
    pub(crate) fn refresh_actual(&mut self, oracle: &dyn RateOracle) {
        for (i, &h) in self.srs.iter().enumerate() {
            self.actual[i] = self
                .owner
                .iter()
                .enumerate()
                .filter(|(_, o)| **o == Some(h))
                .map(|(n, _)| oracle.link_rate(h, n, self.power[n]))
                .sum();
        }
    }
}

/// `x / mean`, with `0/0` taken as 0.
fn normalized(x: f64, mean: f64) -> f64 {
    if mean > 0.0 {
        x / mean
    } else {
        0.0
    }
}

/// Allocates every channel in `channels` to the SRs in `srs`.
///
/// Ties in both phases go to the lowest channel index, then the lowest SR id.
pub fn allocate_sufficient(
    topology: &Topology,
    srs: &[DeviceId],
    channels: &[usize],
    n_channels: usize,
    oracle: &dyn RateOracle,
) -> Result<CellularAllocation> {
    if channels.len() < srs.len() {
        return Err(Error::InsufficientChannels {
            srs: srs.len(),
            channels: channels.len(),
        });
    }
    let mut srs_sorted = srs.to_vec();
    srs_sorted.sort_unstable();
    let mut free: Vec<usize> = channels.to_vec();
    free.sort_unstable();
    free.dedup();
    let mut alloc = CellularAllocation::empty(srs_sorted.clone(), n_channels);
    let hc = srs_sorted.len();
    if hc == 0 {
        return Ok(alloc);
    }
    let p_max: Vec<f64> = srs_sorted.iter().map(|&h| topology.devices[h].p_max).collect();

    // Full-power rates and per-channel means over the fixed working set.
    let full_rate = |i: usize, n: usize| oracle.link_rate(srs_sorted[i], n, p_max[i]);
    let channel_mean: Vec<f64> = (0..n_channels)
        .map(|n| {
            if free.binary_search(&n).is_ok() {
                (0..hc).map(|i| full_rate(i, n)).sum::<f64>() / hc as f64
            } else {
                0.0
            }
        })
        .collect();

    let mut pending: Vec<bool> = vec![true; hc];
    for _ in 0..hc {
        let mut best: Option<(f64, usize, usize)> = None;
        for (fi, &n) in free.iter().enumerate() {
            for i in (0..hc).filter(|&i| pending[i]) {
                let score = normalized(full_rate(i, n), channel_mean[n]);
                if best.map_or(true, |(b, _, _)| score > b) {
                    best = Some((score, fi, i));
                }
            }
        }
        let (_, fi, i) = best.expect("free channels outnumber pending SRs");
        let n = free.remove(fi);
        alloc.grant_split(i, n, p_max[i]);
        alloc.admitted[i] = full_rate(i, n);
        pending[i] = false;
    }

    while !free.is_empty() {
        let mean_admitted = alloc.admitted.iter().sum::<f64>() / hc as f64;
        let mut weakest = 0;
        let mut weakest_score = f64::INFINITY;
        for i in 0..hc {
            let score = normalized(alloc.admitted[i], mean_admitted);
            if score < weakest_score {
                weakest_score = score;
                weakest = i;
            }
        }
        let mut best_fi = 0;
        let mut best_rate = f64::NEG_INFINITY;
        for (fi, &n) in free.iter().enumerate() {
            let r = full_rate(weakest, n);
            if r > best_rate {
                best_rate = r;
                best_fi = fi;
            }
        }
        let n = free.remove(best_fi);
        alloc.grant_split(weakest, n, p_max[weakest]);
        let split = p_max[weakest] / alloc.num_channels[weakest] as f64;
        alloc.admitted[weakest] += oracle.link_rate(srs_sorted[weakest], n, split);
    }

    alloc.refresh_actual(oracle);
    Ok(alloc)
}
