use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use cflmec_sim::metrics::write_csv;
use cflmec_sim::presets::run_preset;
use cflmec_sim::{oracle_report, run, SimConfig};

#[derive(Parser)]
#[command(name = "cflmec", version, about = "Cooperative federated learning edge scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its per-slot metrics as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment preset (fig4 to fig8) into a directory.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        seeds: u64,
    },
    /// Run a configuration with every slot checked against the constraints.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare every scheduler with the exhaustive optimum on the first slot
    /// of a small configuration.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, out } => {
            let c = SimConfig::load(&config)?;
            let output = run(&c)?;
            match out {
                Some(path) => write_csv(&path, &output.rows)?,
                None => {
                    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
                    for r in &output.rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
            }
            eprintln!("throughput {:.1} bit/s over {} slots", output.throughput(), c.slots);
        }
        Command::Preset { name, out, seeds } => {
            let summary = run_preset(&name, seeds, &out).with_context(|| format!("preset {name}"))?;
            eprintln!("{} configurations written to {}", summary.len(), out.display());
        }
        Command::Validate { config } => {
            let c = SimConfig {
                validate_slots: true,
                ..SimConfig::load(&config)?
            };
            run(&c)?;
            println!("ok: {} slots, no violations", c.slots);
        }
        Command::Oracle { config } => {
            let c = SimConfig::load(&config)?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "scheduler,total_admitted_bits")?;
            for (kind, value) in oracle_report(&c)? {
                writeln!(stdout, "{kind},{value}")?;
            }
        }
    }
    Ok(())
}
