//! Comparison allocators without QoS awareness.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::netmodel::{RateOracle, Topology};
use crate::sufficient::CellularAllocation;

/// Gives each SR one uniformly random distinct channel at full power. With
/// fewer channels than SRs a uniformly random subset of SRs is served.
pub fn baseline_random<R: Rng + ?Sized>(
    topology: &Topology,
    n_channels: usize,
    oracle: &dyn RateOracle,
    rng: &mut R,
) -> CellularAllocation {
    let srs = topology.srs();
    let mut alloc = CellularAllocation::empty(srs.clone(), n_channels);
    let mut order: Vec<usize> = (0..srs.len()).collect();
    order.shuffle(rng);
    let mut channels: Vec<usize> = (0..n_channels).collect();
    channels.shuffle(rng);
    for (&i, &n) in order.iter().zip(&channels) {
        alloc.grant_split(i, n, topology.devices[srs[i]].p_max);
    }
    alloc.refresh_actual(oracle);
    alloc.admitted.clone_from(&alloc.actual);
    alloc
}

/// Channels in index order go to the SR with the best full-power rate among
/// those still without a channel; once every SR holds one, leftovers go to the
/// best SR overall and its power is split evenly.
pub fn baseline_max_snr(topology: &Topology, n_channels: usize, oracle: &dyn RateOracle) -> CellularAllocation {
    let srs = topology.srs();
    let mut alloc = CellularAllocation::empty(srs.clone(), n_channels);
    if srs.is_empty() {
        return alloc;
    }
    for n in 0..n_channels {
        let served_all = alloc.num_channels.iter().all(|&c| c > 0);
        let mut best: Option<(f64, usize)> = None;
        for (i, &h) in srs.iter().enumerate() {
            if !served_all && alloc.num_channels[i] > 0 {
                continue;
            }
            let r = oracle.link_rate(h, n, topology.devices[h].p_max);
            if best.map_or(true, |(b, _)| r > b) {
                best = Some((r, i));
            }
        }
        if let Some((_, i)) = best {
            alloc.grant_split(i, n, topology.devices[srs[i]].p_max);
        }
    }
    alloc.refresh_actual(oracle);
    alloc.admitted.clone_from(&alloc.actual);
    alloc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{CapacityTable, Device, Position, Role};
    use alloc::vec;
    use rand::SeedableRng;

    fn srs_topology(h: usize) -> Topology {
        let devices = (0..h)
            .map(|i| Device::new(i, Position::new(i as f64, 0.0), Role::Sr, 0.1).unwrap())
            .collect();
        Topology::new(devices, (300.0, 300.0), 50.0).unwrap()
    }

    #[test]
    fn max_snr_serves_everyone_first() {
        let t = srs_topology(2);
        let table = CapacityTable::from_rows(&[vec![9.0, 8.0, 7.0], vec![1.0, 2.0, 3.0]]);
        let a = baseline_max_snr(&t, 3, &table);
        assert_eq!(a.owner, vec![Some(0), Some(1), Some(0)]);
        assert_eq!(a.power, vec![0.05, 0.1, 0.05]);
        assert_eq!(a.actual, vec![16.0, 2.0]);
    }

    #[test]
    fn random_is_injective() {
        let t = srs_topology(4);
        let table = CapacityTable::new(4, 6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = baseline_random(&t, 6, &table, &mut rng);
            assert_eq!(a.num_channels, vec![1; 4]);
            assert_eq!(a.owner.iter().flatten().count(), 4);
        }
        let a = baseline_random(&t, 2, &table, &mut rng);
        assert_eq!(a.num_channels.iter().sum::<usize>(), 2);
    }
}
