//! Browser entry points. Each returns a JSON string for the page to plot.

use ltbf_core::harness::{flops_report, run_monte_carlo, ScenarioConfig};
use ltbf_core::polyinv::{fit_inv_sqrt_poly, weighted_residual, PolyCoeffs};
use ltbf_core::LtbfError;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest array the page may simulate; keeps a click under a few seconds.
pub const MAX_BROWSER_ANTENNAS: usize = 64;
pub const MAX_BROWSER_TRIALS: usize = 200;

#[derive(Serialize)]
struct FitView {
    coeffs: PolyCoeffs,
    /// `(λ, λ^{1/2} p(λ) − 1)` samples across `[1, B]`.
    curve: Vec<(f64, f64)>,
    converged: bool,
}

#[derive(Serialize)]
struct CdfView {
    methods: Vec<MethodCdf>,
    connected: usize,
    users: usize,
}

#[derive(Serialize)]
struct MethodCdf {
    name: String,
    median: Option<f64>,
    points: Vec<(f64, f64)>,
}

pub fn fit_poly_json(d: usize, b: f64, samples: usize) -> Result<String, String> {
    let (coeffs, converged) = match fit_inv_sqrt_poly(d, b) {
        Ok(fit) => (fit.coeffs, true),
        Err(LtbfError::RemezNonConvergence { best, .. }) => (*best, false),
        Err(e) => return Err(e.to_string()),
    };
    let n = samples.clamp(2, 5000);
    let curve = (0..n)
        .map(|k| {
            let l = 1.0 + (b - 1.0) * k as f64 / (n - 1) as f64;
            (l, weighted_residual(&coeffs, l))
        })
        .collect();
    serde_json::to_string(&FitView { coeffs, curve, converged }).map_err(|e| e.to_string())
}

pub fn sinr_cdf_json(config_toml: &str) -> Result<String, String> {
    let cfg = ScenarioConfig::from_toml_str(config_toml).map_err(|e| e.to_string())?;
    if cfg.n_rx() > MAX_BROWSER_ANTENNAS || cfg.n_trials > MAX_BROWSER_TRIALS {
        return Err(format!(
            "browser runs are limited to {MAX_BROWSER_ANTENNAS} antennas and {MAX_BROWSER_TRIALS} trials"
        ));
    }
    let res = run_monte_carlo(&cfg, 1).map_err(|e| e.to_string())?;
    let methods = res
        .cdfs()
        .into_iter()
        .map(|(name, cdf)| MethodCdf { name, median: cdf.median(), points: cdf.points() })
        .collect();
    let users = res.trials.iter().map(|t| t.connected.len()).sum();
    serde_json::to_string(&CdfView { methods, connected: res.records().count(), users }).map_err(|e| e.to_string())
}

pub fn flops_json(config_toml: &str) -> Result<String, String> {
    let cfg = ScenarioConfig::from_toml_str(config_toml).map_err(|e| e.to_string())?;
    Ok(flops_report(&cfg).to_json())
}

#[wasm_bindgen]
pub fn fit_poly(d: usize, b: f64, samples: usize) -> Result<String, JsError> {
    fit_poly_json(d, b, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sinr_cdf(config_toml: &str) -> Result<String, JsError> {
    sinr_cdf_json(config_toml).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn flops(config_toml: &str) -> Result<String, JsError> {
    flops_json(config_toml).map_err(|e| JsError::new(&e))
}
