//! Physical network model: devices, association, sub-channel gains, SINR and
//! achievable rates.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dispatch::ScheduleDecision;
use crate::math::{db_to_linear, hypot, log2, powf};
use crate::seed;
use crate::{Error, Result};

pub type DeviceId = usize;

/// Key used for the edge server when deriving per-link random streams.
const EDGE_KEY: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Strong reliance: direct cellular link to the edge server.
    Sr,
    /// Less reliance: relays through an associated SR over D2D.
    Lr,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub id: DeviceId,
    pub position: Position,
    pub role: Role,
    /// Maximum transmit power in watts.
    pub p_max: f64,
    pub queue_bits: f64,
    /// Slot at which the oldest undelivered bit arrived, if any are queued.
    pub t_gen: Option<u64>,
    /// Last slot in which the device was granted a sub-channel.
    pub t_sched: Option<u64>,
}

impl Device {
    pub fn new(id: DeviceId, position: Position, role: Role, p_max: f64) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::InvalidParameter("p_max must be positive and finite"));
        }
        Ok(Self {
            id,
            position,
            role,
            p_max,
            queue_bits: 0.0,
            t_gen: None,
            t_sched: None,
        })
    }

    pub fn is_sr(&self) -> bool {
        self.role == Role::Sr
    }

    /// Applies one slot of queue dynamics: `queue' = queue + arrivals - admitted`.
    pub fn apply_slot(&mut self, slot: u64, arrivals: f64, admitted: f64, granted: bool) -> Result<()> {
        let available = self.queue_bits + arrivals;
        if admitted < 0.0 || admitted > available {
            return Err(Error::QueueUnderflow {
                device: self.id,
                admitted,
                available,
            });
        }
        let was_empty = self.queue_bits <= 0.0;
        self.queue_bits = available - admitted;
        if self.queue_bits <= 0.0 {
            self.queue_bits = 0.0;
            self.t_gen = None;
        } else if was_empty {
            self.t_gen = Some(slot);
        }
        if granted {
            self.t_sched = Some(slot);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub devices: Vec<Device>,
    /// `association[i][j]` is 1 when the i-th LR (in id order) relays through
    /// the j-th SR (in id order).
    pub association: Vec<Vec<u8>>,
    pub sr_radius: f64,
    /// `(width, height)` in meters.
    pub area: (f64, f64),
    pub edge_position: Position,
}

impl Topology {
    /// Builds an unassociated topology with the edge server at the area center.
    pub fn new(devices: Vec<Device>, area: (f64, f64), sr_radius: f64) -> Result<Self> {
        if devices.iter().enumerate().any(|(i, d)| d.id != i) {
            return Err(Error::InvalidParameter("device ids must equal their index"));
        }
        if !(sr_radius > 0.0) {
            return Err(Error::InvalidParameter("sr_radius must be positive"));
        }
        let lrs = devices.iter().filter(|d| d.role == Role::Lr).count();
        let srs = devices.len() - lrs;
        Ok(Self {
            devices,
            association: vec![vec![0; srs]; lrs],
            sr_radius,
            area,
            edge_position: Position::new(area.0 / 2.0, area.1 / 2.0),
        })
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    /// Node id of the edge server in [`ChannelState`].
    pub fn edge_id(&self) -> usize {
        self.devices.len()
    }

    pub fn srs(&self) -> Vec<DeviceId> {
        self.ids_with(Role::Sr)
    }

    pub fn lrs(&self) -> Vec<DeviceId> {
        self.ids_with(Role::Lr)
    }

    fn ids_with(&self, role: Role) -> Vec<DeviceId> {
        self.devices
            .iter()
            .filter(|d| d.role == role)
            .map(|d| d.id)
            .collect()
    }

    pub fn role(&self, id: DeviceId) -> Role {
        self.devices[id].role
    }

    pub fn position_of(&self, node: usize) -> Position {
        if node == self.edge_id() {
            self.edge_position
        } else {
            self.devices[node].position
        }
    }

    /// The SR that LR `k` relays through, if associated.
    pub fn serving_sr(&self, k: DeviceId) -> Option<DeviceId> {
        let row = self.lrs().iter().position(|&id| id == k)?;
        let srs = self.srs();
        self.association[row]
            .iter()
            .position(|&x| x == 1)
            .map(|j| srs[j])
    }

    /// Unit row sums over LRs and the coverage-radius rule.
    pub fn association_is_valid(&self) -> bool {
        let srs = self.srs();
        let lrs = self.lrs();
        self.association.len() == lrs.len()
            && self.association.iter().zip(&lrs).all(|(row, &k)| {
                row.len() == srs.len()
                    && row.iter().all(|&x| x <= 1)
                    && row.iter().map(|&x| x as usize).sum::<usize>() == 1
                    && row.iter().zip(&srs).all(|(&x, &h)| {
                        x == 0
                            || self.devices[k].position.distance(&self.devices[h].position)
                                <= self.sr_radius
                    })
            })
    }
}

/// Associates each LR with the nearest SR within `sr_radius`; ties go to the
/// lower SR id.
pub fn associate(topology: &Topology, sr_radius: f64) -> Result<Topology> {
    let srs = topology.srs();
    let lrs = topology.lrs();
    let mut association = vec![vec![0u8; srs.len()]; lrs.len()];
    for (row, &k) in lrs.iter().enumerate() {
        let pos = topology.devices[k].position;
        let mut best: Option<(usize, f64)> = None;
        for (j, &h) in srs.iter().enumerate() {
            let d = pos.distance(&topology.devices[h].position);
            if d <= sr_radius && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, _) = best.ok_or(Error::OrphanLr(k))?;
        association[row][j] = 1;
    }
    Ok(Topology {
        association,
        sr_radius,
        ..topology.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    pub n_subchannels: usize,
    /// Total bandwidth in Hz.
    pub total_bandwidth: f64,
    /// Noise power per sub-channel, in watts.
    pub noise_power: f64,
}

impl SpectrumConfig {
    pub fn new(n_subchannels: usize, total_bandwidth: f64, noise_power: f64) -> Result<Self> {
        if n_subchannels == 0 {
            return Err(Error::InvalidParameter("at least one sub-channel is required"));
        }
        if !(total_bandwidth > 0.0) {
            return Err(Error::InvalidParameter("bandwidth must be positive"));
        }
        if !(noise_power > 0.0) {
            return Err(Error::InvalidParameter("noise power must be positive"));
        }
        Ok(Self {
            n_subchannels,
            total_bandwidth,
            noise_power,
        })
    }

    pub fn per_channel_bandwidth(&self) -> f64 {
        self.total_bandwidth / self.n_subchannels as f64
    }
}

/// Linear power gains `g[tx][rx][n]`. Receivers are the devices plus the edge
/// server, which sits at index `n_devices`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    n_devices: usize,
    n_channels: usize,
    gains: Vec<f64>,
}

impl ChannelState {
    pub fn zeros(n_devices: usize, n_channels: usize) -> Self {
        Self {
            n_devices,
            n_channels,
            gains: vec![0.0; n_devices * (n_devices + 1) * n_channels],
        }
    }

    pub fn n_devices(&self) -> usize {
        self.n_devices
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    #[inline]
    fn index(&self, tx: usize, rx: usize, n: usize) -> usize {
        debug_assert!(tx < self.n_devices && rx <= self.n_devices && n < self.n_channels);
        (tx * (self.n_devices + 1) + rx) * self.n_channels + n
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize, n: usize) -> f64 {
        self.gains[self.index(tx, rx, n)]
    }

    pub fn set_gain(&mut self, tx: usize, rx: usize, n: usize, gain: f64) {
        assert!(gain >= 0.0 && gain.is_finite(), "gain must be finite and non-negative");
        let i = self.index(tx, rx, n);
        self.gains[i] = gain;
    }

    pub fn to_edge(&self, tx: usize, n: usize) -> f64 {
        self.gain(tx, self.n_devices, n)
    }
}

/// Log-distance path loss with log-normal shadowing and Rayleigh small-scale
/// fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    pub pathloss_exponent: f64,
    /// Path loss at the 1 m reference distance, in dB.
    pub reference_loss_db: f64,
    pub shadowing_sigma_db: f64,
}

impl Default for FadingModel {
    fn default() -> Self {
        Self {
            pathloss_exponent: 3.5,
            reference_loss_db: 38.5,
            shadowing_sigma_db: 8.0,
        }
    }
}

impl FadingModel {
    /// Mean linear gain at distance `d` (clamped to the 1 m reference).
    pub fn pathloss(&self, d: f64) -> f64 {
        db_to_linear(-self.reference_loss_db) * powf(d.max(1.0), -self.pathloss_exponent)
    }
}

/// `|e|^2` for a unit-variance circularly-symmetric complex Gaussian `e`.
pub fn rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (re * re + im * im) / 2.0
}

/// Draws one slot of channel gains. Each (tx, rx) link has its own random
/// stream keyed by `seed`, so the draws of a link do not depend on how many
/// devices exist.
pub fn sample_fading(seed: u64, topology: &Topology, n_channels: usize, model: &FadingModel) -> ChannelState {
    let m = topology.len();
    let mut state = ChannelState::zeros(m, n_channels);
    for tx in 0..m {
        let tx_pos = topology.devices[tx].position;
        for rx in 0..=m {
            if rx == tx {
                continue;
            }
            let rx_key = if rx == m { EDGE_KEY } else { rx as u64 };
            let mut rng = seed::stream(seed, &[tx as u64, rx_key]);
            let shadow_db: f64 = model.shadowing_sigma_db * rng.sample::<f64, _>(StandardNormal);
            let mean = model.pathloss(tx_pos.distance(&topology.position_of(rx))) * db_to_linear(shadow_db);
            for n in 0..n_channels {
                let g = mean * rayleigh_power(&mut rng);
                state.set_gain(tx, rx, n, g);
            }
        }
    }
    state
}

/// Per-device reported state `S_m(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeviceState {
    /// Bits available for admission in this slot.
    pub arrivals: f64,
    /// Total scheduled rate `R_m(t)` in bits/s.
    pub capacity: f64,
}

/// SINR of SR `h`'s cellular link on channel `n`; co-channel LRs interfere at
/// the edge server.
pub fn sinr_cellular(
    h: DeviceId,
    n: usize,
    decision: &ScheduleDecision,
    topology: &Topology,
    gains: &ChannelState,
    spectrum: &SpectrumConfig,
) -> f64 {
    let signal = decision.power[h][n] * gains.to_edge(h, n);
    let interference: f64 = topology
        .lrs()
        .into_iter()
        .filter(|&k| decision.rho[k][n])
        .map(|k| decision.power[k][n] * gains.to_edge(k, n))
        .sum();
    signal / (spectrum.noise_power + interference)
}

/// SINR of LR `k`'s D2D link on channel `n` at its serving SR; other SRs
/// transmitting on `n` interfere.
pub fn sinr_d2d(
    k: DeviceId,
    n: usize,
    decision: &ScheduleDecision,
    topology: &Topology,
    gains: &ChannelState,
    spectrum: &SpectrumConfig,
) -> f64 {
    let Some(h) = topology.serving_sr(k) else {
        return 0.0;
    };
    let signal = decision.power[k][n] * gains.gain(k, h, n);
    let interference: f64 = topology
        .srs()
        .into_iter()
        .filter(|&hp| hp != h && decision.rho[hp][n])
        .map(|hp| decision.power[hp][n] * gains.gain(hp, h, n))
        .sum();
    signal / (spectrum.noise_power + interference)
}

/// Shannon rate on one sub-channel, in bits/s.
pub fn rate(sinr: f64, spectrum: &SpectrumConfig) -> f64 {
    spectrum.per_channel_bandwidth() * log2(1.0 + sinr)
}

/// Sum of per-channel rates over the channels device `m` holds.
pub fn total_rate(
    m: DeviceId,
    decision: &ScheduleDecision,
    topology: &Topology,
    gains: &ChannelState,
    spectrum: &SpectrumConfig,
) -> f64 {
    (0..decision.n_channels())
        .filter(|&n| decision.rho[m][n])
        .map(|n| {
            let sinr = match topology.role(m) {
                Role::Sr => sinr_cellular(m, n, decision, topology, gains, spectrum),
                Role::Lr => sinr_d2d(m, n, decision, topology, gains, spectrum),
            };
            rate(sinr, spectrum)
        })
        .sum()
}

/// Source of per-link rates for the schedulers.
pub trait RateOracle {
    /// Interference-free rate of `device` on `channel` at `power` watts.
    fn link_rate(&self, device: DeviceId, channel: usize, power: f64) -> f64;

    /// Achieved cellular rate of SR `h` under a complete decision.
    fn cellular_rate(&self, h: DeviceId, decision: &ScheduleDecision) -> f64 {
        (0..decision.n_channels())
            .filter(|&n| decision.rho[h][n])
            .map(|n| self.link_rate(h, n, decision.power[h][n]))
            .sum()
    }
}

/// Rates from the SINR model: SRs toward the edge server, LRs toward their
/// serving SR.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalRates<'a> {
    pub topology: &'a Topology,
    pub gains: &'a ChannelState,
    pub spectrum: &'a SpectrumConfig,
}

impl RateOracle for PhysicalRates<'_> {
    fn link_rate(&self, device: DeviceId, channel: usize, power: f64) -> f64 {
        let g = match self.topology.role(device) {
            Role::Sr => self.gains.to_edge(device, channel),
            Role::Lr => match self.topology.serving_sr(device) {
                Some(h) => self.gains.gain(device, h, channel),
                None => 0.0,
            },
        };
        rate(power * g / self.spectrum.noise_power, self.spectrum)
    }

    fn cellular_rate(&self, h: DeviceId, decision: &ScheduleDecision) -> f64 {
        total_rate(h, decision, self.topology, self.gains, self.spectrum)
    }
}

/// Rates drawn directly as channel capacities, independent of power (any
/// positive power achieves the tabulated rate).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityTable {
    n_channels: usize,
    rates: Vec<f64>,
}

impl CapacityTable {
    pub fn new(n_devices: usize, n_channels: usize) -> Self {
        Self {
            n_channels,
            rates: vec![0.0; n_devices * n_channels],
        }
    }

    /// Builds a table from per-device rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_channels = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_channels), "ragged rate table");
        Self {
            n_channels,
            rates: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn set(&mut self, device: DeviceId, channel: usize, rate: f64) {
        self.rates[device * self.n_channels + channel] = rate;
    }

    pub fn get(&self, device: DeviceId, channel: usize) -> f64 {
        self.rates[device * self.n_channels + channel]
    }
}

impl RateOracle for CapacityTable {
    fn link_rate(&self, device: DeviceId, channel: usize, power: f64) -> f64 {
        if power > 0.0 {
            self.get(device, channel)
        } else {
            0.0
        }
    }
}
