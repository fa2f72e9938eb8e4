//! Acceptance suite: one PASS/FAIL line per criterion, each checked against
//! an oracle written here independently of the library code paths.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cflmec_core::aggregate::{gradient, LocalDataset, Loss, ModelWeights};
use cflmec_core::d2d::SinrThresholds;
use cflmec_core::dispatch::{offline_optimum, validate, DispatchConfig, Dispatcher, SchedulerKind, SlotInput};
use cflmec_core::netmodel::{
    associate, sample_fading, CapacityTable, ChannelState, Device, DeviceState, FadingModel, PhysicalRates,
    Position, Role, SpectrumConfig, Topology,
};
use cflmec_core::primal_dual::{optimal_admission, select_channels, PrimalState};
use cflmec_core::seed::{derive_seed, stream};
use cflmec_sim::metrics::SummaryRow;
use cflmec_sim::presets::{fig5_config, preset, run_batch, summarize, FIG5_EPSILONS};
use cflmec_sim::{run, SimConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const MASTER: u64 = 0xacce_97;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Runs one criterion, checks its time budget and prints its line.
fn criterion(name: &str, budget: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let started = Instant::now();
    let o = check();
    let elapsed = started.elapsed();
    let in_time = elapsed < budget;
    let pass = o.pass && in_time;
    let timing = if in_time {
        String::new()
    } else {
        format!(", over the {:.0} s budget", budget.as_secs_f64())
    };
    println!(
        "{} {name}: {}{timing} [{:.2} s]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn rng(keys: &[u64]) -> ChaCha8Rng {
    stream(MASTER, keys)
}

// ---------------------------------------------------------------- ceiling

fn multiplier_ceiling() -> Outcome {
    let mut worst = Vec::new();
    for epsilon in [0.00025, 0.001, 0.005] {
        let config = SimConfig {
            epsilon,
            n_devices: 20,
            n_subchannels: 4,
            slots: 10_000,
            seed: 11,
            ..SimConfig::default()
        };
        let units = config.a_max_bits / config.unit_bits;
        let ceiling = (epsilon + 1.0 / config.alpha) * units + 1.0;
        let out = match run(&config) {
            Ok(o) => o,
            Err(e) => return outcome(false, format!("eps={epsilon}: {e}")),
        };
        if out.lambda_trace.len() != config.slots as usize {
            return outcome(false, format!("eps={epsilon}: primal-dual ran on {} slots", out.lambda_trace.len()));
        }
        let (lo, hi) = out
            .lambda_trace
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        if !(lo >= 0.0 && hi <= ceiling) {
            return outcome(false, format!("eps={epsilon}: lambda in [{lo}, {hi}], ceiling {ceiling}"));
        }
        worst.push(format!("eps={epsilon} max {hi:.3} <= {ceiling:.3}"));
    }
    outcome(true, format!("10^4 slots each, {}", worst.join("; ")))
}

// ------------------------------------------------------------- projection

fn projection_oracle() -> Outcome {
    let mut r = rng(&[2]);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lambda = r.random_range(0.0..3.0);
        let a_prev = r.random_range(0.0..10.0);
        let alpha = r.random_range(0.1..3.0);
        let cap: f64 = r.random_range(0.0..10.0);
        let obj = |a: f64| a * a / (2.0 * alpha) + (-1.0 + lambda - a_prev / alpha) * a;
        let steps = (cap / 1e-4).floor() as usize;
        let mut best = (obj(0.0), 0.0);
        for i in 1..=steps {
            let a = i as f64 * 1e-4;
            let v = obj(a);
            if v < best.0 {
                best = (v, a);
            }
        }
        if obj(cap) < best.0 {
            best = (obj(cap), cap);
        }
        worst = worst.max((optimal_admission(lambda, a_prev, alpha, cap) - best.1).abs());
    }
    outcome(worst <= 1e-4, format!("10^3 draws, worst gap to grid minimizer {worst:.2e}"))
}

// -------------------------------------------------------------- selection

fn selection_oracle() -> Outcome {
    let mut r = rng(&[3]);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let h = r.random_range(1..=4usize);
        let n = r.random_range(1..=4usize);
        let alpha = r.random_range(0.2..2.0);
        let lambda: Vec<f64> = (0..h).map(|_| r.random_range(0.0..2.0)).collect();
        let mut p = PrimalState::new(h, n);
        for i in 0..h {
            for c in 0..n {
                p.r_prev[i][c] = r.random_range(0.0..50.0);
                p.rho_prev[i][c] = r.random_bool(0.3);
            }
        }
        // η over a one-hot assignment: ρ² = ρ for binary indicators.
        let eta = |assign: &[usize]| -> f64 {
            assign
                .iter()
                .enumerate()
                .map(|(c, &i)| {
                    let prev = if p.rho_prev[i][c] { 1.0 } else { 0.0 };
                    1.0 / (2.0 * alpha) + (-lambda[i] * p.r_prev[i][c] - prev / alpha)
                })
                .sum()
        };
        let mut best: Option<(f64, Vec<usize>)> = None;
        for code in 0..h.pow(n as u32) {
            let assign: Vec<usize> = (0..n).map(|c| code / h.pow(c as u32) % h).collect();
            let v = eta(&assign);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, assign));
            }
        }
        let picks = select_channels(&lambda, &p, alpha, &(0..n).collect::<Vec<_>>());
        let got: Vec<usize> = picks.iter().map(|&(_, i)| i).collect();
        if got != best.expect("at least one assignment").1 {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("10^3 draws up to 4x4, {mismatches} mismatches"))
}

// ------------------------------------------------------------ aggregation

fn random_topology(r: &mut ChaCha8Rng, n_srs: usize, n_lrs: usize) -> Topology {
    let mut devices = Vec::new();
    for i in 0..n_srs {
        let p = Position::new(r.random_range(0.0..300.0), r.random_range(0.0..300.0));
        devices.push(Device::new(i, p, Role::Sr, 0.1).unwrap());
    }
    for j in 0..n_lrs {
        let anchor = devices[r.random_range(0..n_srs)].position;
        let (rad, ang) = (r.random_range(5.0..45.0), r.random_range(0.0..std::f64::consts::TAU));
        let p = Position::new(anchor.x + rad * f64::cos(ang), anchor.y + rad * f64::sin(ang));
        devices.push(Device::new(n_srs + j, p, Role::Lr, 0.1).unwrap());
    }
    let t = Topology::new(devices, (300.0, 300.0), 50.0).unwrap();
    associate(&t, 50.0).unwrap()
}

fn hierarchical_equivalence() -> Outcome {
    let mut r = rng(&[4]);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n_devices = r.random_range(1..=5usize);
        let n_srs = r.random_range(1..=n_devices);
        let t = random_topology(&mut r, n_srs, n_devices - n_srs);
        let dim = r.random_range(1..=8usize);
        let data: Vec<LocalDataset> = (0..n_devices)
            .map(|_| {
                let l = r.random_range(1..=20usize);
                let x = (0..l * dim).map(|_| r.random_range(-1.0..1.0)).collect();
                let y = (0..l).map(|_| r.random_range(-1.0..1.0)).collect();
                LocalDataset::new(x, y, dim).unwrap()
            })
            .collect();
        let w0: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        let step = r.random_range(0.01..0.5);

        // Local steps, then SR-level and edge-level size-weighted averages.
        let local: Vec<Vec<f64>> = data
            .iter()
            .map(|d| {
                let g = gradient(&w0, d, Loss::Quadratic);
                w0.iter().zip(&g).map(|(w, g)| w - step * g).collect()
            })
            .collect();
        let mut edge = vec![0.0; dim];
        let mut total = 0usize;
        for h in t.srs() {
            let members: Vec<usize> = (0..t.len()).filter(|&m| m == h || t.serving_sr(m) == Some(h)).collect();
            let size: usize = members.iter().map(|&m| data[m].size()).sum();
            let sr_model: Vec<f64> = (0..dim)
                .map(|j| members.iter().map(|&m| data[m].size() as f64 * local[m][j]).sum::<f64>() / size as f64)
                .collect();
            for j in 0..dim {
                edge[j] += size as f64 * sr_model[j];
            }
            total += size;
        }
        edge.iter_mut().for_each(|x| *x /= total as f64);

        // Centralized step on the pooled data, gradient written out directly.
        let mut g = vec![0.0; dim];
        let mut count = 0usize;
        for d in &data {
            for i in 0..d.size() {
                let x = d.row(i);
                let resid: f64 = x.iter().zip(&w0).map(|(a, b)| a * b).sum::<f64>() - d.label(i);
                for j in 0..dim {
                    g[j] += resid * x[j];
                }
                count += 1;
            }
        }
        let central: Vec<f64> = w0.iter().zip(&g).map(|(w, g)| w - step * g / count as f64).collect();
        let scale = central.iter().fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()));
        let gap = edge.iter().zip(&central).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        worst = worst.max(gap);
        // The library's own check must agree.
        let w = ModelWeights::new(w0.clone(), step).unwrap();
        let lib = cflmec_core::aggregate::check_theorem2(&t, &data, &w, Loss::Quadratic).unwrap();
        worst = worst.max(lib);
    }
    outcome(worst <= 1e-9, format!("10^3 quadratic instances, worst relative gap {worst:.2e}"))
}

// ------------------------------------------------- small-instance scenarios

struct Scenario {
    topology: Topology,
    spectrum: SpectrumConfig,
    seed: u64,
}

fn small_scenario(r: &mut ChaCha8Rng, n_channels: usize, n_srs: usize, n_lrs: usize) -> Scenario {
    let topology = random_topology(r, n_srs, n_lrs);
    let noise = SimConfig {
        n_subchannels: n_channels,
        ..SimConfig::default()
    }
    .noise_power();
    Scenario {
        topology,
        spectrum: SpectrumConfig::new(n_channels, 1e7, noise).unwrap(),
        seed: r.random(),
    }
}

/// Cellular SINR at the edge with every co-channel LR as interference.
fn edge_sinr(h: usize, n: usize, power: &[Vec<f64>], rho: &[Vec<bool>], t: &Topology, g: &ChannelState, noise: f64) -> f64 {
    let lrs = (0..t.len()).filter(|&k| !t.devices[k].is_sr() && rho[k][n]);
    let interference: f64 = lrs.map(|k| power[k][n] * g.to_edge(k, n)).sum();
    power[h][n] * g.to_edge(h, n) / (noise + interference)
}

#[derive(Default)]
struct FeasibilityTally {
    decisions: usize,
    violations: Vec<String>,
    d2d_grants: usize,
    protection_failures: Vec<String>,
}

fn feasibility_suite() -> FeasibilityTally {
    const SLOTS: u64 = 4;
    let cell_min = SinrThresholds::default().cell_min;
    let mut r = rng(&[5]);
    let mut tally = FeasibilityTally::default();
    for draw in 0..1000u64 {
        let n_channels = r.random_range(1..=3usize);
        let n_srs = r.random_range(1..=3usize);
        let n_lrs = r.random_range(0..=2usize);
        let s = small_scenario(&mut r, n_channels, n_srs, n_lrs);
        let t = &s.topology;
        for kind in SchedulerKind::ALL {
            let mut dispatcher = Dispatcher::new(kind, DispatchConfig::default(), s.seed).unwrap();
            let mut queue = vec![0.0; t.len()];
            for slot in 0..SLOTS {
                let gains = sample_fading(derive_seed(s.seed, &[slot]), t, n_channels, &FadingModel::default());
                let oracle = PhysicalRates {
                    topology: t,
                    gains: &gains,
                    spectrum: &s.spectrum,
                };
                let states: Vec<DeviceState> = queue
                    .iter()
                    .map(|q| DeviceState {
                        arrivals: q + r.random_range(0.0..40e3),
                        capacity: 0.0,
                    })
                    .collect();
                let input = SlotInput {
                    topology: t,
                    gains: &gains,
                    spectrum: &s.spectrum,
                    oracle: &oracle,
                    states: &states,
                };
                let d = match dispatcher.dispatch(&input) {
                    Ok(o) => o.decision,
                    Err(e) => {
                        tally.violations.push(format!("draw {draw} {kind}: {e}"));
                        break;
                    }
                };
                tally.decisions += 1;
                for v in validate(&d, &states, t) {
                    tally.violations.push(format!("draw {draw} {kind} slot {slot}: {v}"));
                }
                for k in (0..t.len()).filter(|&k| !t.devices[k].is_sr()) {
                    for n in d.channels_of(k).collect::<Vec<_>>() {
                        tally.d2d_grants += 1;
                        let owner = (0..t.len()).find(|&h| t.devices[h].is_sr() && d.rho[h][n]);
                        let ok = owner.is_some_and(|h| {
                            edge_sinr(h, n, &d.power, &d.rho, t, &gains, s.spectrum.noise_power) >= cell_min
                        });
                        if !ok {
                            tally
                                .protection_failures
                                .push(format!("draw {draw} {kind} slot {slot} channel {n}"));
                        }
                    }
                }
                for (m, q) in queue.iter_mut().enumerate() {
                    *q = states[m].arrivals - d.a[m];
                }
            }
        }
    }
    tally
}

fn sandwich() -> Outcome {
    let mut r = rng(&[6]);
    let heuristics = [SchedulerKind::Cflmec, SchedulerKind::MaxSnr, SchedulerKind::Random];
    let mut sums = [0.0; 3];
    let mut above = Vec::new();
    for draw in 0..200 {
        let n_channels = r.random_range(1..=3usize);
        let n_srs = r.random_range(1..=n_channels);
        let n_lrs = r.random_range(0..=2usize);
        let s = small_scenario(&mut r, n_channels, n_srs, n_lrs);
        let t = &s.topology;
        let gains = sample_fading(s.seed, t, n_channels, &FadingModel::default());
        // Capacity draws as in the simulator's default oracle.
        let rows: Vec<Vec<f64>> = (0..t.len())
            .map(|_| {
                let mean = r.random_range(0.0..125e3);
                (0..n_channels).map(|_| mean * -f64::ln(1.0 - r.random::<f64>())).collect()
            })
            .collect();
        let oracle = CapacityTable::from_rows(&rows);
        let states: Vec<DeviceState> = (0..t.len())
            .map(|_| DeviceState {
                arrivals: r.random_range(0.0..40e3),
                capacity: 0.0,
            })
            .collect();
        let input = SlotInput {
            topology: t,
            gains: &gains,
            spectrum: &s.spectrum,
            oracle: &oracle,
            states: &states,
        };
        let (best, _) = offline_optimum(&input, &SinrThresholds::default()).unwrap();
        for (i, kind) in heuristics.into_iter().enumerate() {
            let v = Dispatcher::new(kind, DispatchConfig::default(), s.seed)
                .unwrap()
                .dispatch(&input)
                .unwrap()
                .decision
                .total_admitted();
            if v > best {
                above.push(format!("draw {draw} {kind}: {v} > {best}"));
            }
            sums[i] += v;
        }
    }
    let means = sums.map(|s| s / 200.0);
    let ordered = means[0] >= means[1] && means[1] >= means[2];
    outcome(
        above.is_empty() && ordered,
        format!(
            "200 draws, {} above optimum; means cflmec {:.0} / max_snr {:.0} / random {:.0} bits",
            above.len(),
            means[0],
            means[1],
            means[2]
        ),
    )
}

// ----------------------------------------------------------------- trends

fn non_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0])
}

fn kbps(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{:.0}", x / 1e3)).collect::<Vec<_>>().join(" ")
}

fn run_summary(name: &str, configs: Vec<SimConfig>) -> Result<Vec<SummaryRow>, String> {
    let outputs = run_batch(&configs).map_err(|e| format!("{name}: {e}"))?;
    Ok(summarize(name, &configs, &outputs))
}

fn trends() -> Outcome {
    const SEEDS: u64 = 30;
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let sweeps: [(&str, fn(&SummaryRow) -> String); 3] = [
        ("fig4", |r| format!("eps={}", r.epsilon)),
        ("fig7", |r| r.scheduler.clone()),
        ("fig8", |_| "channels".to_string()),
    ];
    for (name, key) in sweeps {
        let rows = match preset(name, SEEDS).map_err(|e| e.to_string()).and_then(|c| run_summary(name, c)) {
            Ok(rows) => rows,
            Err(e) => {
                failures.push(e);
                continue;
            }
        };
        let mut keys: Vec<String> = rows.iter().map(key).collect();
        keys.dedup();
        for k in keys {
            let tp: Vec<f64> = rows.iter().filter(|r| key(r) == k).map(|r| r.throughput_mean_bps).collect();
            let line = format!("{name} {k}: {} kbps", kbps(&tp));
            if non_decreasing(&tp) {
                notes.push(line);
            } else {
                failures.push(line);
            }
        }
    }

    let configs: Vec<SimConfig> = FIG5_EPSILONS
        .iter()
        .flat_map(|&eps| (0..SEEDS).map(move |seed| SimConfig { seed, ..fig5_config(eps) }))
        .collect();
    match run_summary("fig5", configs) {
        Ok(rows) => {
            let settled: Vec<Option<f64>> = rows.iter().map(|r| r.stabilization_mean_slot).collect();
            let line = format!(
                "fig5 settling slot for eps {:?}: {}",
                FIG5_EPSILONS,
                settled
                    .iter()
                    .map(|s| s.map_or("never".to_string(), |s| format!("{s:.1}")))
                    .collect::<Vec<_>>()
                    .join(" / ")
            );
            let increasing = settled.iter().all(Option::is_some)
                && settled.windows(2).all(|w| w[1].unwrap() > w[0].unwrap());
            if increasing {
                notes.push(line);
            } else {
                failures.push(line);
            }
        }
        Err(e) => failures.push(e),
    }

    if failures.is_empty() {
        outcome(true, notes.join("; "))
    } else {
        outcome(false, format!("violated: {}; held: {}", failures.join("; "), notes.join("; ")))
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    println!("acceptance suite");
    let mut all = true;
    all &= criterion("multiplier ceiling", secs(10), multiplier_ceiling);
    all &= criterion("projection oracle", secs(5), projection_oracle);
    all &= criterion("channel-selection oracle", secs(5), selection_oracle);
    all &= criterion("hierarchical aggregation equals centralized step", secs(5), hierarchical_equivalence);

    let started = Instant::now();
    let tally = feasibility_suite();
    let suite_time = started.elapsed();
    all &= criterion("feasibility", Duration::MAX, || {
        outcome(
            tally.violations.is_empty(),
            format!(
                "{} decisions over 10^3 scenarios x 4 schedulers, {} violations{} (suite ran {:.2} s)",
                tally.decisions,
                tally.violations.len(),
                tally.violations.first().map_or(String::new(), |v| format!(", first: {v}")),
                suite_time.as_secs_f64()
            ),
        )
    });
    all &= criterion("D2D protection", Duration::MAX, || {
        outcome(
            tally.d2d_grants > 0 && tally.protection_failures.is_empty(),
            format!(
                "{} reuse grants checked, {} below the cellular floor{}",
                tally.d2d_grants,
                tally.protection_failures.len(),
                tally.protection_failures.first().map_or(String::new(), |v| format!(", first: {v}"))
            ),
        )
    });
    all &= criterion("optimality sandwich", Duration::MAX, sandwich);
    all &= criterion("trends at desk scale", secs(120), trends);

    if all {
        println!("all criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("some criteria FAIL");
        ExitCode::FAILURE
    }
}
