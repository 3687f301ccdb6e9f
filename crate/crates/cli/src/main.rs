use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ltbf_core::harness::output::{cdf_csv, read_records, write_outputs};
use ltbf_core::harness::{flops_report, run_monte_carlo, ScenarioConfig};
use ltbf_core::polyinv::fit_inv_sqrt_poly;
use ltbf_core::LtbfError;

#[derive(Parser)]
#[command(name = "ltbf", version, about = "Long-term beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the weighted minimax polynomial for the inverse square root on [1, B].
    FitPoly {
        #[arg(long)]
        d: usize,
        #[arg(long = "B")]
        b: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the Monte Carlo simulation and write records, CDFs, FLOPs and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Print the FLOP report for a configuration as JSON.
    Flops {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute per-method CDFs from a records CSV.
    Cdf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig> {
    ScenarioConfig::from_file(path).with_context(|| format!("reading config {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::FitPoly { d, b, out } => {
            let coeffs = match fit_inv_sqrt_poly(d, b) {
                Ok(fit) => fit.coeffs,
                Err(LtbfError::RemezNonConvergence { iterations, best }) => {
                    eprintln!("warning: exchange did not converge after {iterations} iterations; writing best iterate");
                    *best
                }
                Err(e) => return Err(e.into()),
            };
            std::fs::write(&out, coeffs.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            println!("d = {d}, B = {b}: minimax error {:.6e}", coeffs.minimax_error);
        }
        Command::Run { config, out, trials, seed, workers } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.n_trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let res = run_monte_carlo(&cfg, workers)?;
            let paths = write_outputs(&res, &out).with_context(|| format!("writing outputs to {}", out.display()))?;
            let n_rec = res.records().count();
            let n_users: usize = res.trials.iter().map(|t| t.connected.len()).sum();
            println!("{} trials, {n_rec}/{n_users} users connected", res.trials.len());
            for (name, cdf) in res.cdfs() {
                if let Some(m) = cdf.median() {
                    println!("  {name:<16} median {m:8.3} dB");
                }
            }
            println!("records: {}", paths.records.display());
        }
        Command::Flops { config } => {
            let cfg = load_config(&config)?;
            println!("{}", flops_report(&cfg).to_json());
        }
        Command::Cdf { input, out } => {
            let table = read_records(&input).with_context(|| format!("reading {}", input.display()))?;
            std::fs::write(&out, cdf_csv(&table.cdfs())?).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}
