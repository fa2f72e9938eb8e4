//! Experiment presets and parallel batch execution.

use std::collections::BTreeMap;
use std::path::Path;

use cflmec_core::dispatch::SchedulerKind;
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::engine::{run, RunOutput};
use crate::metrics::{mean, stabilization_slot, stddev, write_csv, SummaryRow};
use crate::SimError;

pub const PRESETS: [&str; 5] = ["fig4", "fig5", "fig6", "fig7", "fig8"];

pub const DEVICE_COUNTS: [usize; 7] = [4, 8, 12, 16, 20, 24, 28];
pub const FIG4_EPSILONS: [f64; 3] = [0.001, 0.005, 0.00025];
pub const FIG5_EPSILONS: [f64; 3] = [0.002, 0.001, 0.0005];
pub const FIG6_CHANNELS: [usize; 3] = [5, 10, 15];
pub const FIG8_CHANNELS: [usize; 6] = [5, 10, 15, 20, 25, 30];
pub const FIG8_DEVICES: usize = 30;

/// Multiplier settling rule: every λ moves by less than this per slot...
pub const STABLE_TOL: f64 = 1e-6;
/// ...for this many consecutive slots.
pub const STABLE_WINDOW: usize = 50;

/// Slots per run in the fig5 preset.
pub const FIG5_SLOTS: u64 = 300;
/// Enough devices that SRs outnumber the default ten sub-channels.
pub const FIG5_DEVICES: usize = 20;

fn replicas(base: SimConfig, seeds: u64) -> impl Iterator<Item = SimConfig> {
    (0..seeds).map(move |seed| SimConfig { seed, ..base.clone() })
}

/// Expands a preset into its run configurations, `seeds` replicas each.
pub fn preset(name: &str, seeds: u64) -> Result<Vec<SimConfig>, SimError> {
    let base = SimConfig::default();
    let mut out = Vec::new();
    match name {
        "fig4" => {
            for epsilon in FIG4_EPSILONS {
                for n_devices in DEVICE_COUNTS {
                    out.extend(replicas(
                        SimConfig {
                            epsilon,
                            n_devices,
                            ..base.clone()
                        },
                        seeds,
                    ));
                }
            }
        }
        "fig5" => {
            for epsilon in FIG5_EPSILONS {
                out.extend(replicas(fig5_config(epsilon), seeds));
            }
        }
        "fig6" => {
            for n_subchannels in FIG6_CHANNELS {
                for n_devices in DEVICE_COUNTS {
                    out.extend(replicas(
                        SimConfig {
                            n_subchannels,
                            n_devices,
                            epsilon: 0.00025,
                            record_runtime: true,
                            ..base.clone()
                        },
                        seeds,
                    ));
                }
            }
        }
        "fig7" => {
            for scheduler in [SchedulerKind::Cflmec, SchedulerKind::Random, SchedulerKind::MaxSnr] {
                for n_devices in DEVICE_COUNTS {
                    out.extend(replicas(
                        SimConfig {
                            scheduler,
                            n_devices,
                            ..base.clone()
                        },
                        seeds,
                    ));
                }
            }
        }
        "fig8" => {
            for n_subchannels in FIG8_CHANNELS {
                out.extend(replicas(
                    SimConfig {
                        n_subchannels,
                        n_devices: FIG8_DEVICES,
                        ..base.clone()
                    },
                    seeds,
                ));
            }
        }
        other => return Err(SimError::UnknownPreset(other.to_string())),
    }
    Ok(out)
}

/// The multiplier-trace scenario for one step size.
pub fn fig5_config(epsilon: f64) -> SimConfig {
    SimConfig {
        epsilon,
        n_devices: FIG5_DEVICES,
        slots: FIG5_SLOTS,
        ..SimConfig::default()
    }
}

/// Runs every configuration in parallel. Results keep the input order.
pub fn run_batch(configs: &[SimConfig]) -> Result<Vec<RunOutput>, SimError> {
    configs.par_iter().map(run).collect()
}

/// Groups runs that differ only in seed.
pub fn summarize(preset: &str, configs: &[SimConfig], outputs: &[RunOutput]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<String, (SimConfig, Vec<&RunOutput>)> = BTreeMap::new();
    let mut order = Vec::new();
    for (c, o) in configs.iter().zip(outputs) {
        let key = SimConfig { seed: 0, ..c.clone() }.to_json();
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                (c.clone(), Vec::new())
            })
            .1
            .push(o);
    }
    order
        .iter()
        .map(|key| {
            let (c, runs) = &groups[key];
            let tp: Vec<f64> = runs.iter().map(|o| o.throughput()).collect();
            let runtime: Vec<f64> = runs
                .iter()
                .map(|o| mean(&o.rows.iter().filter(|r| r.device == 0).map(|r| r.runtime).collect::<Vec<_>>()))
                .collect();
            let settled: Vec<f64> = runs
                .iter()
                .filter_map(|o| stabilization_slot(&o.lambda_trace, STABLE_TOL, STABLE_WINDOW))
                .map(|s| s as f64)
                .collect();
            SummaryRow {
                preset: preset.to_string(),
                scheduler: c.scheduler.name().to_string(),
                n_devices: c.n_devices,
                n_subchannels: c.n_subchannels,
                epsilon: c.epsilon,
                seeds: runs.len(),
                throughput_mean_bps: mean(&tp),
                throughput_std_bps: stddev(&tp),
                runtime_mean_s: mean(&runtime),
                stabilization_mean_slot: (!settled.is_empty()).then(|| mean(&settled)),
            }
        })
        .collect()
}

pub fn run_file_name(c: &SimConfig) -> String {
    format!(
        "run_{}_d{}_n{}_e{}_s{}.csv",
        c.scheduler.name(),
        c.n_devices,
        c.n_subchannels,
        c.epsilon,
        c.seed
    )
}

/// Runs a preset and writes one CSV per run plus `summary.csv` into `out`.
pub fn run_preset(name: &str, seeds: u64, out: &Path) -> Result<Vec<SummaryRow>, SimError> {
    let configs = preset(name, seeds)?;
    std::fs::create_dir_all(out).map_err(|e| SimError::Io(out.display().to_string(), e))?;
    let outputs = run_batch(&configs)?;
    for (c, o) in configs.iter().zip(&outputs) {
        write_csv(&out.join(run_file_name(c)), &o.rows)?;
    }
    let summary = summarize(name, &configs, &outputs);
    write_csv(&out.join("summary.csv"), &summary)?;
    Ok(summary)
}
