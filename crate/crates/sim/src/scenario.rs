//! Seeded scenario generation: device layout, arrivals, fading and capacity
//! draws. Every draw comes from its own counter-keyed stream.

use cflmec_core::netmodel::{
    associate, rayleigh_power, sample_fading, CapacityTable, ChannelState, Device, Position, Role, Topology,
};
use cflmec_core::seed::{derive_seed, stream};
use cflmec_core::Error as CoreError;
use rand::Rng;

use crate::config::SimConfig;
use crate::SimError;

const LAYOUT: u64 = 1;
const ARRIVALS: u64 = 2;
const FADING: u64 = 3;
const CAPACITY_MEAN: u64 = 4;
const CAPACITY: u64 = 5;

/// Layouts tried before giving up on one without orphaned LRs.
pub const MAX_LAYOUT_ATTEMPTS: u64 = 10_000;

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Places devices uniformly in the area, makes those within
/// `cellular_range_m` of the edge server SRs, and associates LRs. Layouts
/// with an LR out of every SR's reach are redrawn.
pub fn generate_topology(config: &SimConfig) -> Result<Topology, SimError> {
    let (w, h) = config.area_m;
    let center = Position::new(w / 2.0, h / 2.0);
    let mut last = None;
    for attempt in 0..MAX_LAYOUT_ATTEMPTS {
        let devices = (0..config.n_devices)
            .map(|m| {
                let mut rng = stream(config.seed, &[LAYOUT, attempt, m as u64]);
                let p = Position::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
                let role = if p.distance(&center) < config.cellular_range_m {
                    Role::Sr
                } else {
                    Role::Lr
                };
                Device::new(m, p, role, config.p_max_w)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = Topology::new(devices, config.area_m, config.sr_radius_m)?;
        match associate(&t, config.sr_radius_m) {
            Ok(t) => return Ok(t),
            Err(e @ CoreError::OrphanLr(_)) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("at least one attempt").into())
}

/// Slot index used for fading and capacity keys.
fn draw_slot(config: &SimConfig, slot: u64) -> u64 {
    if config.static_scenario {
        0
    } else {
        slot
    }
}

/// New bits arriving at device `m` in `slot`.
pub fn arrival(config: &SimConfig, slot: u64, m: usize) -> f64 {
    if config.static_scenario {
        let (lo, hi) = config.arrival_range_bits;
        return (lo + hi) / 2.0;
    }
    uniform(&mut stream(config.seed, &[ARRIVALS, slot, m as u64]), config.arrival_range_bits)
}

pub fn fading(config: &SimConfig, topology: &Topology, slot: u64) -> ChannelState {
    let seed = derive_seed(config.seed, &[FADING, draw_slot(config, slot)]);
    sample_fading(seed, topology, config.n_subchannels, &config.fading())
}

/// Mean capacity of each device over the run, in bits/s.
pub fn capacity_means(config: &SimConfig, n_devices: usize) -> Vec<f64> {
    (0..n_devices)
        .map(|m| uniform(&mut stream(config.seed, &[CAPACITY_MEAN, m as u64]), config.capacity_range_bps))
        .collect()
}

/// Per-channel capacities for one slot.
pub fn capacities(config: &SimConfig, means: &[f64], slot: u64) -> CapacityTable {
    let mut table = CapacityTable::new(means.len(), config.n_subchannels);
    let key = draw_slot(config, slot);
    for (m, &mean) in means.iter().enumerate() {
        let mut rng = stream(config.seed, &[CAPACITY, key, m as u64]);
        for n in 0..config.n_subchannels {
            table.set(m, n, mean * rayleigh_power(&mut rng));
        }
    }
    table
}
