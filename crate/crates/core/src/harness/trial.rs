use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_at, draw_users};
use crate::covariance::{aggregate_covariance, estimate_user_covariance, simulate_srs, srs_noise_std, srs_times, SpatialCovariance};
use crate::equalize::{sinr_instantaneous, sinr_projected, sinr_projected_lower_bound, SinrRecord};
use crate::error::{LtbfError, Result};
use crate::linalg::{db, CMat, CVec, HermitianEigen};
use crate::polyinv::{certify_with, eval_poly_matrix, fit_inv_sqrt_poly, spectral_upper_bound, ErrorCertificate, PolyCoeffs};
use crate::projection::{build_projection, energy_loss, inv_sqrt_from, ProjectionMethod};
use crate::rng;

use super::config::ScenarioConfig;
use super::power::{in_outage, max_strongest_path_snr_db, power_control};

/// Test hooks for a single trial.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOptions {
    /// Replace every polynomial `P` by the exact `Q̂^{-1/2}`.
    pub force_exact_poly: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    /// One record per connected user, in user order.
    pub records: Vec<SinrRecord>,
    /// Indexed by user.
    pub connected: Vec<bool>,
    /// Keyed by `d`.
    pub certificates: BTreeMap<usize, ErrorCertificate>,
    pub coefficients: BTreeMap<usize, PolyCoeffs>,
    pub spectral_bound: f64,
}

fn fit_or_best(d: usize, b: f64) -> Result<PolyCoeffs> {
    match fit_inv_sqrt_poly(d, b) {
        Ok(fit) => Ok(fit.coeffs),
        Err(LtbfError::RemezNonConvergence { best, .. }) => Ok(*best),
        Err(e) => Err(e),
    }
}

pub fn run_trial(cfg: &ScenarioConfig, trial: u64) -> Result<TrialResult> {
    run_trial_with(cfg, trial, TrialOptions::default())
}

pub fn run_trial_with(cfg: &ScenarioConfig, trial: u64, opts: TrialOptions) -> Result<TrialResult> {
    cfg.validate()?;
    let geom = cfg.geometry()?;
    let n = geom.n_rx();
    let mut r = rng::stream(cfg.seed, trial);

    let subcarrier = r.random_range(0..cfg.n_fft);
    let links = draw_users(&mut r, &cfg.channel_scenario(), cfg.n_ue, cfg.min_separation_deg.to_radians())?;
    let caps: Vec<f64> = links.iter().map(|l| max_strongest_path_snr_db(l, cfg)).collect();
    let caps = cfg.outage.then_some(caps.as_slice());
    let alphas = power_control(&links, &geom, &mut r, (cfg.snr_min_db, cfg.snr_max_db), 0.0, subcarrier, caps);
    let mut connected: Vec<bool> = links.iter().zip(&alphas).map(|(l, a)| a.is_some() && !in_outage(l, cfg)).collect();

    let times = srs_times(0.0, cfg.t_lt_s(), cfg.n_srs);
    let noise = srs_noise_std(cfg.srs_snr_db);
    let mut qhat_user: Vec<Option<SpatialCovariance>> = vec![None; links.len()];
    for (i, link) in links.iter().enumerate() {
        if connected[i] {
            let batch = simulate_srs(link, &geom, i, &times, cfg.n_fft, noise, &mut r);
            qhat_user[i] = Some(estimate_user_covariance(&batch));
        }
    }
    let active: Vec<usize> = (0..links.len()).filter(|&i| connected[i]).collect();
    let alpha = |i: usize| alphas[i].expect("connected users have a power setting");

    let mut result = TrialResult {
        trial,
        records: Vec::new(),
        connected: connected.clone(),
        certificates: BTreeMap::new(),
        coefficients: BTreeMap::new(),
        spectral_bound: 1.0,
    };
    if active.is_empty() {
        return Ok(result);
    }

    let est: Vec<&SpatialCovariance> = active.iter().map(|&i| qhat_user[i].as_ref().unwrap()).collect();
    let act_alphas: Vec<f64> = active.iter().map(|&i| alpha(i)).collect();
    let qhat = aggregate_covariance(n, &est, &act_alphas)?;
    let eig = HermitianEigen::new(&qhat.matrix);
    let s_exact = inv_sqrt_from(&eig)?;
    let b = spectral_upper_bound(&qhat);
    result.spectral_bound = b;

    let mut d_list = cfg.d.clone();
    d_list.sort_unstable();
    d_list.dedup();
    let mut p_mats: BTreeMap<usize, CMat> = BTreeMap::new();
    for &d in &d_list {
        let coeffs = fit_or_best(d, b)?;
        let p = if opts.force_exact_poly { s_exact.clone() } else { eval_poly_matrix(&coeffs, &qhat).matrix };
        let cert = certify_with(&coeffs, &qhat, &eig, &p, cfg.certificate_grid)?;
        result.certificates.insert(d, cert);
        result.coefficients.insert(d, coeffs);
        p_mats.insert(d, p);
    }
    let d_max = *d_list.last().unwrap();

    let h_eval: BTreeMap<usize, CVec> =
        active.iter().map(|&i| (i, channel_at(&links[i], &geom, cfg.t_lt_s(), subcarrier).vector())).collect();

    for &i in &active {
        let outcome = evaluate_user(cfg, i, &active, &alphas, &h_eval, qhat_user[i].as_ref().unwrap(), &s_exact, &p_mats, &result.certificates[&d_max], d_max);
        match outcome {
            Ok(rec) => result.records.push(rec),
            Err(e @ LtbfError::Invariant(_)) => return Err(e),
            Err(_) => connected[i] = false,
        }
    }
    result.connected = connected;
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_user(
    cfg: &ScenarioConfig,
    i: usize,
    active: &[usize],
    alphas: &[Option<f64>],
    h_eval: &BTreeMap<usize, CVec>,
    qi_hat: &SpatialCovariance,
    s_exact: &CMat,
    p_mats: &BTreeMap<usize, CMat>,
    cert_max: &ErrorCertificate,
    d_max: usize,
) -> Result<SinrRecord> {
    let a_i = alphas[i].unwrap();
    let h = &h_eval[&i];
    let interferers: Vec<(CVec, f64)> =
        active.iter().filter(|&&j| j != i).map(|&j| (h_eval[&j].clone(), alphas[j].unwrap())).collect();

    let g_inst = sinr_instantaneous(h, &interferers, a_i)?;
    let exact = build_projection(qi_hat, s_exact, cfg.r, i, ProjectionMethod::Exact)?;
    let g_exact = sinr_projected(&exact.g, h, &interferers, a_i)?;
    if g_exact > g_inst * (1.0 + 1e-9) + 1e-9 {
        return Err(LtbfError::Invariant(format!(
            "user {i}: projected SINR {g_exact} exceeds instantaneous {g_inst}"
        )));
    }

    let mut poly = BTreeMap::new();
    let mut eps_r = None;
    let mut lower = None;
    for (&d, p) in p_mats {
        let proj = build_projection(qi_hat, p, cfg.r, i, ProjectionMethod::Poly { d })?;
        poly.insert(d, db(sinr_projected(&proj.g, h, &interferers, a_i)?));
        if d == d_max {
            eps_r = energy_loss(&proj, p, h).ok();
            let ht2 = (&proj.g * h).norm_squared();
            lower = sinr_projected_lower_bound(cert_max.eps1_measured, ht2, a_i).ok().map(db);
        }
    }

    Ok(SinrRecord {
        user: i,
        gamma_instantaneous_db: db(g_inst),
        gamma_ltbf_exact_db: db(g_exact),
        gamma_ltbf_poly_db: poly,
        gamma_lower_bound_db: lower,
        eps1: Some(cert_max.eps1_measured),
        eps2: Some(cert_max.eps2_measured),
        eps_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        ScenarioConfig { n_h: 4, n_v: 4, n_ue: 3, n_trials: 1, seed: 11, ..Default::default() }
    }

    #[test]
    fn records_match_connected_users() {
        let res = run_trial(&small(), 0).unwrap();
        let n_conn = res.connected.iter().filter(|&&c| c).count();
        assert_eq!(res.records.len(), n_conn);
        for rec in &res.records {
            assert!(res.connected[rec.user]);
            assert!(rec.gamma_instantaneous_db.is_finite());
            assert!(rec.gamma_ltbf_exact_db.is_finite());
            assert_eq!(rec.gamma_ltbf_poly_db.len(), 2);
        }
    }

    #[test]
    fn static_full_rank_is_lossless() {
        let cfg = ScenarioConfig {
            v_ue_max_kmh: 0.0,
            srs_snr_db: f64::INFINITY,
            r: 16,
            outage: false,
            ..small()
        };
        let res = run_trial(&cfg, 2).unwrap();
        assert_eq!(res.records.len(), 3);
        for rec in &res.records {
            assert!((rec.gamma_ltbf_exact_db - rec.gamma_instantaneous_db).abs() < 1e-6, "{rec:?}");
        }
    }

    #[test]
    fn forced_exact_polynomial_matches_exact() {
        let cfg = ScenarioConfig { d: vec![3], ..small() };
        let res = run_trial_with(&cfg, 1, TrialOptions { force_exact_poly: true }).unwrap();
        assert!(!res.records.is_empty());
        for rec in &res.records {
            assert!((rec.gamma_ltbf_poly_db[&3] - rec.gamma_ltbf_exact_db).abs() < 1e-9);
        }
    }

    #[test]
    fn same_trial_same_result() {
        let cfg = small();
        assert_eq!(run_trial(&cfg, 5).unwrap(), run_trial(&cfg, 5).unwrap());
    }
}
