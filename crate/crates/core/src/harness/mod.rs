//! Monte Carlo driver, power control, complexity accounting and output files.

pub mod cdf;
pub mod config;
pub mod flops;
pub mod montecarlo;
pub mod output;
pub mod power;
pub mod trial;

pub use cdf::EmpiricalCdf;
pub use config::ScenarioConfig;
pub use flops::{flops_report, FlopReport};
pub use montecarlo::{run_monte_carlo, MonteCarloResult};
pub use trial::{run_trial, run_trial_with, TrialOptions, TrialResult};
