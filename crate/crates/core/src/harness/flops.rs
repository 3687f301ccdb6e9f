use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;

/// Which period a complexity row is counted over before scaling to `T_LT`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    LongTerm,
    Coherence,
    ResourceElement,
}

/// One operation; `None` means the method does not perform it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopRow {
    pub operation: String,
    pub period: Period,
    pub instantaneous: Option<f64>,
    pub ltbf_exact: Option<f64>,
    /// Keyed by the number of polynomial coefficients.
    pub ltbf_poly: BTreeMap<usize, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopParams {
    pub n_rx: usize,
    pub n_ue: usize,
    pub n_s: usize,
    pub r: usize,
    pub n_srs: usize,
    pub c_i: f64,
    pub d: Vec<usize>,
    /// Resource elements per second.
    pub w: f64,
    pub t_lt_s: f64,
    pub t_coh_s: f64,
    pub t_re_s: f64,
}

/// FLOPs per `T_LT`, row by row, with per-method totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopReport {
    pub params: FlopParams,
    pub rows: Vec<FlopRow>,
    pub total_instantaneous: f64,
    pub total_ltbf_exact: f64,
    pub total_ltbf_poly: BTreeMap<usize, f64>,
}

impl FlopReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("flop report serializes")
    }

    /// Difference between the exact and polynomial `Q` inversion rows.
    pub fn inversion_saving(&self, d: usize) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.operation == "q_inversion")?;
        Some(row.ltbf_exact? - (*row.ltbf_poly.get(&d)?)?)
    }
}

pub fn flop_params(cfg: &ScenarioConfig) -> FlopParams {
    let mut d = cfg.d.clone();
    d.sort_unstable();
    d.dedup();
    FlopParams {
        n_rx: cfg.n_rx(),
        n_ue: cfg.n_ue,
        n_s: cfg.n_s,
        r: cfg.r,
        n_srs: cfg.n_srs,
        c_i: cfg.c_i,
        d,
        w: cfg.re_rate(),
        t_lt_s: cfg.t_lt_s(),
        t_coh_s: cfg.t_coh_s(),
        t_re_s: cfg.t_re_s(),
    }
}

pub fn flops_report(cfg: &ScenarioConfig) -> FlopReport {
    report_from_params(flop_params(cfg))
}

/// Builds the report from explicit parameters (`r = 0` is allowed here).
pub fn report_from_params(params: FlopParams) -> FlopReport {
    let n = params.n_rx as f64;
    let k = params.n_ue as f64;
    let ns = params.n_s as f64;
    let r = params.r as f64;
    let per_coh = params.t_lt_s / params.t_coh_s;
    // Per-RE counts are rates over the band: multiply by W and integrate over T_LT.
    let per_re = params.w * params.t_lt_s;

    let same_poly = |v: Option<f64>| params.d.iter().map(|&d| (d, v)).collect::<BTreeMap<_, _>>();
    let rows = vec![
        FlopRow {
            operation: "covariance_estimation".into(),
            period: Period::LongTerm,
            instantaneous: None,
            ltbf_exact: Some(n * n * params.n_srs as f64 * k),
            ltbf_poly: same_poly(Some(n * n * params.n_srs as f64 * k)),
        },
        FlopRow {
            operation: "q_inversion".into(),
            period: Period::LongTerm,
            instantaneous: None,
            ltbf_exact: Some(params.c_i * n.powi(3)),
            ltbf_poly: params.d.iter().map(|&d| (d, Some((d as f64 - 1.0) * n.powi(3)))).collect(),
        },
        FlopRow {
            operation: "projection".into(),
            period: Period::ResourceElement,
            instantaneous: None,
            ltbf_exact: Some(r * n * k * per_re),
            ltbf_poly: same_poly(Some(r * n * k * per_re)),
        },
        FlopRow {
            operation: "channel_estimation".into(),
            period: Period::Coherence,
            instantaneous: Some(params.c_i * n.powi(3) * k * per_coh),
            ltbf_exact: Some(params.c_i * r.powi(3) * k * per_coh),
            ltbf_poly: same_poly(Some(params.c_i * r.powi(3) * k * per_coh)),
        },
        FlopRow {
            operation: "equalization".into(),
            period: Period::ResourceElement,
            instantaneous: Some(n * ns * k * per_re),
            ltbf_exact: Some(r * ns * k * per_re),
            ltbf_poly: same_poly(Some(r * ns * k * per_re)),
        },
    ];

    let total_instantaneous = rows.iter().filter_map(|r| r.instantaneous).sum();
    let total_ltbf_exact = rows.iter().filter_map(|r| r.ltbf_exact).sum();
    let total_ltbf_poly = params
        .d
        .iter()
        .map(|d| (*d, rows.iter().filter_map(|r| r.ltbf_poly.get(d).copied().flatten()).sum()))
        .collect();
    FlopReport { params, rows, total_instantaneous, total_ltbf_exact, total_ltbf_poly }
}
