//! `mrlbm table` runs the reflection benchmark sweep and writes a CSV (or
//! JSON) table; `mrlbm snapshot` writes solution profiles for plotting.
//!
//! Settings are layered: defaults, then `--config` file, then the
//! `MRLBM_OUT_DIR` environment variable, then command-line flags.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mrlbm::experiment::{self, parse_level_range, ExperimentConfig};
use mrlbm::ErrorReport;
use serde_json::json;

const OUT_DIR_ENV: &str = "MRLBM_OUT_DIR";

#[derive(Parser)]
#[command(name = "mrlbm", version, about = "Reflection at a mesh level jump for a multiresolution lattice Boltzmann scheme")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep (l_max, l_jump) and write the error table.
    Table {
        #[command(flatten)]
        common: Common,
        /// Levels for l_max, e.g. `7..13` (inclusive).
        #[arg(long, value_name = "A..B")]
        lmax_range: Option<String>,
        /// Comma-separated level gaps, e.g. `1,2,3`.
        #[arg(long, value_name = "LIST")]
        ljump: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Write u profiles of the jump and reference runs.
    Snapshot {
        #[command(flatten)]
        common: Common,
        /// Finest level (left of the interface).
        #[arg(long)]
        lmax: Option<u32>,
        /// Level gap across the interface.
        #[arg(long)]
        ljump: Option<u32>,
        /// Comma-separated output times.
        #[arg(long, value_name = "LIST")]
        times: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// key = value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Relaxation rate of the non-conserved moment.
    #[arg(long)]
    p: Option<f64>,
    /// Wave speed.
    #[arg(long)]
    c: Option<f64>,
    /// Lattice velocity.
    #[arg(long)]
    lambda: Option<f64>,
    /// Final time.
    #[arg(long = "T", value_name = "T")]
    final_time: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.out_dir = dir.into();
        }
        if let Some(p) = self.p {
            cfg.relaxation = p;
        }
        if let Some(c) = self.c {
            cfg.wave_speed = c;
        }
        if let Some(l) = self.lambda {
            cfg.lattice_velocity = l;
        }
        if let Some(t) = self.final_time {
            cfg.final_time = t;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        Ok(cfg)
    }
}

fn table_json(rows: &[ErrorReport]) -> serde_json::Value {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            obj.insert("l_max".into(), json!(r.l_max));
            obj.insert("l_jump".into(), json!(r.l_jump));
            for (name, v) in ErrorReport::NAMES.iter().zip(r.values()) {
                obj.insert((*name).into(), json!(v));
            }
            for (name, v) in ErrorReport::NAMES.iter().zip(r.rates) {
                obj.insert(format!("rate_{name}"), json!(v));
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    json!(rows)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table {
            common,
            lmax_range,
            ljump,
            format,
        } => {
            let mut cfg = common.load()?;
            if let Some(r) = lmax_range {
                (cfg.lmax_min, cfg.lmax_max) = parse_level_range(&r)?;
            }
            if let Some(j) = ljump {
                cfg.set("ljump", &j)?;
            }
            match format {
                Format::Csv => {
                    let (rows, path) = experiment::run_table_to_file(&cfg)?;
                    println!("{} rows written to {}", rows.len(), path.display());
                }
                Format::Json => {
                    let rows = experiment::run_table(&cfg)?;
                    let path = cfg.table_path().with_extension("json");
                    fs::create_dir_all(&cfg.out_dir)
                        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
                    fs::write(&path, serde_json::to_string_pretty(&table_json(&rows))? + "\n")
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("{} rows written to {}", rows.len(), path.display());
                }
            }
        }
        Command::Snapshot {
            common,
            lmax,
            ljump,
            times,
        } => {
            let mut cfg = common.load()?;
            if let Some(t) = times {
                cfg.set("snapshot_times", &t)?;
            }
            let l_max = lmax.unwrap_or(cfg.snapshot_lmax);
            let l_jump = ljump.unwrap_or(cfg.snapshot_ljump);
            cfg.scheme()?;
            let written = experiment::run_snapshot(&cfg, l_max, l_jump, &cfg.snapshot_times)?;
            for path in written {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
