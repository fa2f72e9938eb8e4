//! Run configuration, loaded from and saved as JSON.

use std::path::Path;

use cflmec_core::d2d::SinrThresholds;
use cflmec_core::dispatch::{DispatchConfig, SchedulerKind};
use cflmec_core::netmodel::FadingModel;
use cflmec_core::primal_dual::PrimalDualConfig;
use serde::{Deserialize, Serialize};

use crate::SimError;

/// Where per-link cellular rates come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateOracleKind {
    /// Shannon rates from the fading and interference model.
    Physical,
    /// Each device gets a mean capacity drawn once from `capacity_range_bps`;
    /// per-slot, per-channel rates are that mean scaled by a unit-mean
    /// exponential (Rayleigh power) draw.
    CapacityDraw,
}

mod scheduler_name {
    use cflmec_core::dispatch::SchedulerKind;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &SchedulerKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(k.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SchedulerKind, D::Error> {
        let name = String::deserialize(d)?;
        name.parse()
            .map_err(|_| de::Error::custom(format!("unknown scheduler `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub area_m: (f64, f64),
    pub n_devices: usize,
    pub n_subchannels: usize,
    pub bandwidth_hz: f64,
    pub p_max_w: f64,
    pub sr_radius_m: f64,
    /// Per-slot arrivals per device are uniform on this range (bits).
    pub arrival_range_bits: (f64, f64),
    pub capacity_range_bps: (f64, f64),
    pub epsilon: f64,
    /// Primal step, in scheduler units.
    pub alpha: f64,
    pub slots: u64,
    pub seed: u64,
    #[serde(with = "scheduler_name")]
    pub scheduler: SchedulerKind,
    pub rate_oracle: RateOracleKind,

    /// Devices closer than this to the edge server are SRs.
    pub cellular_range_m: f64,
    pub noise_density_dbm_hz: f64,
    pub pathloss_exponent: f64,
    pub reference_loss_db: f64,
    pub shadowing_sigma_db: f64,
    pub gamma_d2d_db: f64,
    pub gamma_cell_db: f64,
    /// Per-slot admission ceiling of the primal-dual scheduler (bits).
    pub a_max_bits: f64,
    /// Bits per primal-dual scheduler unit.
    pub unit_bits: f64,
    /// Draw positions, fading and capacities once and reuse them every slot;
    /// arrivals are then fixed at the midpoint of `arrival_range_bits`.
    pub static_scenario: bool,
    /// Run the constraint validator on every slot and fail on a violation.
    pub validate_slots: bool,
    /// Record wall-clock time per scheduling call.
    pub record_runtime: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            area_m: (300.0, 300.0),
            n_devices: 20,
            n_subchannels: 10,
            bandwidth_hz: 1e7,
            p_max_w: 0.1,
            sr_radius_m: 50.0,
            arrival_range_bits: (0.0, 40e3),
            capacity_range_bps: (0.0, 125e3),
            epsilon: 0.00025,
            alpha: 1.0,
            slots: 300,
            seed: 0,
            scheduler: SchedulerKind::Cflmec,
            rate_oracle: RateOracleKind::CapacityDraw,
            cellular_range_m: 150.0,
            noise_density_dbm_hz: -174.0,
            pathloss_exponent: 3.5,
            reference_loss_db: 38.5,
            shadowing_sigma_db: 8.0,
            gamma_d2d_db: 3.0,
            gamma_cell_db: 6.0,
            a_max_bits: 40e3,
            unit_bits: 1e3,
            static_scenario: false,
            validate_slots: false,
            record_runtime: false,
        }
    }
}

fn positive(v: f64, what: &'static str) -> Result<(), SimError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{what} must be positive and finite")))
    }
}

fn ordered(r: (f64, f64), what: &'static str) -> Result<(), SimError> {
    if r.0 >= 0.0 && r.0 <= r.1 && r.1.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{what} must be a non-negative ordered range")))
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(path.display().to_string(), e))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| SimError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        positive(self.area_m.0, "area_m width")?;
        positive(self.area_m.1, "area_m height")?;
        if self.n_subchannels == 0 {
            return Err(SimError::Config("n_subchannels must be at least 1".into()));
        }
        positive(self.bandwidth_hz, "bandwidth_hz")?;
        positive(self.p_max_w, "p_max_w")?;
        positive(self.sr_radius_m, "sr_radius_m")?;
        positive(self.cellular_range_m, "cellular_range_m")?;
        positive(self.alpha, "alpha")?;
        positive(self.a_max_bits, "a_max_bits")?;
        positive(self.unit_bits, "unit_bits")?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(SimError::Config("epsilon must be non-negative and finite".into()));
        }
        ordered(self.arrival_range_bits, "arrival_range_bits")?;
        ordered(self.capacity_range_bps, "capacity_range_bps")?;
        if !(self.pathloss_exponent > 0.0) || !(self.shadowing_sigma_db >= 0.0) {
            return Err(SimError::Config("fading parameters out of range".into()));
        }
        Ok(())
    }

    pub fn fading(&self) -> FadingModel {
        FadingModel {
            pathloss_exponent: self.pathloss_exponent,
            reference_loss_db: self.reference_loss_db,
            shadowing_sigma_db: self.shadowing_sigma_db,
        }
    }

    /// Noise power over one sub-channel, in watts.
    pub fn noise_power(&self) -> f64 {
        let per_hz_w = 10f64.powf((self.noise_density_dbm_hz - 30.0) / 10.0);
        per_hz_w * self.bandwidth_hz / self.n_subchannels as f64
    }

    pub fn dispatch(&self) -> DispatchConfig {
        DispatchConfig {
            thresholds: SinrThresholds::from_db(self.gamma_d2d_db, self.gamma_cell_db),
            primal_dual: PrimalDualConfig {
                epsilon: self.epsilon,
                alpha: self.alpha,
                a_max_bits: self.a_max_bits,
                unit_bits: self.unit_bits,
            },
        }
    }
}
