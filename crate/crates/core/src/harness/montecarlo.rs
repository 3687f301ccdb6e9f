use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::cdf::EmpiricalCdf;
use super::config::ScenarioConfig;
use super::trial::{run_trial, TrialResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub config: ScenarioConfig,
    /// Ordered by trial index.
    pub trials: Vec<TrialResult>,
}

/// Column label of a method in the output files.
pub fn method_names(d_list: &[usize]) -> Vec<String> {
    let mut names = vec!["instantaneous".to_string(), "ltbf_exact".to_string()];
    names.extend(sorted_degrees(d_list).into_iter().map(|d| format!("ltbf_poly_d{d}")));
    names
}

pub fn sorted_degrees(d_list: &[usize]) -> Vec<usize> {
    let mut d = d_list.to_vec();
    d.sort_unstable();
    d.dedup();
    d
}

impl MonteCarloResult {
    pub fn d_list(&self) -> Vec<usize> {
        sorted_degrees(&self.config.d)
    }

    pub fn records(&self) -> impl Iterator<Item = &crate::equalize::SinrRecord> {
        self.trials.iter().flat_map(|t| t.records.iter())
    }

    /// SINR samples (dB) per method over all connected users.
    pub fn method_samples(&self) -> Vec<(String, Vec<f64>)> {
        let d_list = self.d_list();
        let mut out: Vec<(String, Vec<f64>)> = method_names(&d_list).into_iter().map(|n| (n, Vec::new())).collect();
        for rec in self.records() {
            out[0].1.push(rec.gamma_instantaneous_db);
            out[1].1.push(rec.gamma_ltbf_exact_db);
            for (k, d) in d_list.iter().enumerate() {
                if let Some(v) = rec.gamma_ltbf_poly_db.get(d) {
                    out[2 + k].1.push(*v);
                }
            }
        }
        out
    }

    pub fn cdfs(&self) -> Vec<(String, EmpiricalCdf)> {
        self.method_samples().into_iter().map(|(n, v)| (n, EmpiricalCdf::new(v))).collect()
    }
}

/// Runs `cfg.n_trials` trials on `workers` threads. Trial `t` always uses
/// random stream `t`, so the result does not depend on `workers`.
pub fn run_monte_carlo(cfg: &ScenarioConfig, workers: usize) -> Result<MonteCarloResult> {
    cfg.validate()?;
    let trials = run_trials(cfg, workers.max(1))?;
    Ok(MonteCarloResult { config: cfg.clone(), trials })
}

#[cfg(feature = "parallel")]
fn run_trials(cfg: &ScenarioConfig, workers: usize) -> Result<Vec<TrialResult>> {
    use rayon::prelude::*;
    if workers == 1 {
        return (0..cfg.n_trials as u64).map(|t| run_trial(cfg, t)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::LtbfError::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| (0..cfg.n_trials as u64).into_par_iter().map(|t| run_trial(cfg, t)).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_trials(cfg: &ScenarioConfig, _workers: usize) -> Result<Vec<TrialResult>> {
    (0..cfg.n_trials as u64).map(|t| run_trial(cfg, t)).collect()
}
