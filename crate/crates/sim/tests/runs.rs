use cflmec_core::dispatch::SchedulerKind;
use cflmec_sim::metrics::{read_csv, write_csv, SummaryRow};
use cflmec_sim::presets::{run_batch, summarize};
use cflmec_sim::{run, MetricsRow, RateOracleKind, SimConfig};

fn small(seed: u64) -> SimConfig {
    SimConfig {
        n_devices: 12,
        n_subchannels: 6,
        slots: 40,
        seed,
        validate_slots: true,
        ..Default::default()
    }
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_csv(&a, &run(&small(7)).unwrap().rows).unwrap();
    write_csv(&b, &run(&small(7)).unwrap().rows).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    write_csv(&c, &run(&small(8)).unwrap().rows).unwrap();
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn csv_header_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let rows = run(&small(1)).unwrap().rows;
    write_csv(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "slot,device,admitted,queue,lambda,rate,scheduler,seed,runtime"
    );
    let back: Vec<MetricsRow> = read_csv(&path).unwrap();
    assert_eq!(back.len(), rows.len());
    assert_eq!(back[5].device, rows[5].device);
}

#[test]
fn every_scheduler_and_oracle_runs_feasibly() {
    for rate_oracle in [RateOracleKind::Physical, RateOracleKind::CapacityDraw] {
        for scheduler in [SchedulerKind::Cflmec, SchedulerKind::Random, SchedulerKind::MaxSnr] {
            let out = run(&SimConfig {
                scheduler,
                rate_oracle,
                ..small(2)
            })
            .unwrap();
            assert!(out.total_admitted <= out.total_arrivals);
            assert!(out.rows.iter().all(|r| r.queue >= 0.0 && r.admitted >= 0.0));
        }
    }
}

#[test]
fn offline_scheduler_on_a_tiny_run() {
    let c = SimConfig {
        n_devices: 3,
        n_subchannels: 2,
        scheduler: SchedulerKind::Offline,
        ..small(4)
    };
    let out = run(&c).unwrap();
    assert_eq!(out.rows.len(), 3 * 40);
}

#[test]
fn summary_groups_seed_replicas() {
    let configs: Vec<SimConfig> = (0..3).map(small).chain((0..3).map(|s| SimConfig { n_devices: 6, ..small(s) })).collect();
    let outputs = run_batch(&configs).unwrap();
    let summary = summarize("test", &configs, &outputs);
    assert_eq!(summary.len(), 2);
    assert!(summary.iter().all(|s| s.seeds == 3));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.csv");
    write_csv(&path, &summary).unwrap();
    let back: Vec<SummaryRow> = read_csv(&path).unwrap();
    assert_eq!(back, summary);
}
