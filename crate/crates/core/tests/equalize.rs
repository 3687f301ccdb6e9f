mod common;

use common::*;
use ltbf_core::equalize::{
    mmse_instantaneous, sinr_instantaneous, sinr_projected, sinr_projected_lower_bound,
};
use ltbf_core::harness::{run_trial, ScenarioConfig};
use ltbf_core::linalg::{real, CMat, CVec};
use ltbf_core::rng;
use rand::Rng;

fn filter_sinr(w: &CVec, h: &CVec, interferers: &[(CVec, f64)], alpha: f64) -> f64 {
    let sig = alpha * w.dotc(h).norm_sqr();
    let mut den = w.norm_squared();
    for (hj, a) in interferers {
        den += a * w.dotc(hj).norm_sqr();
    }
    sig / den
}

#[test]
fn mmse_beats_perturbed_filters() {
    let mut r = rng::master(51);
    for _ in 0..50 {
        let n = 8;
        let users = 4;
        let hs: Vec<CVec> = (0..users).map(|_| gaussian_vec(&mut r, n)).collect();
        let alphas: Vec<f64> = (0..users).map(|_| r.random_range(0.1..2.0)).collect();
        let mats: Vec<CMat> = hs.iter().map(|h| CMat::from_column_slice(n, 1, h.as_slice())).collect();
        let filters = mmse_instantaneous(&mats, &alphas).unwrap();
        let interferers: Vec<(CVec, f64)> = (1..users).map(|j| (hs[j].clone(), alphas[j])).collect();
        let w: CVec = filters[0].adjoint().column(0).into_owned();
        let best = filter_sinr(&w, &hs[0], &interferers, alphas[0]);
        let formula = sinr_instantaneous(&hs[0], &interferers, alphas[0]).unwrap();
        assert!((best - formula).abs() <= 1e-9 * formula);
        for _ in 0..200 {
            let dw = gaussian_vec(&mut r, n) * real(0.05 * w.norm());
            assert!(filter_sinr(&(&w + dw), &hs[0], &interferers, alphas[0]) <= best * (1.0 + 1e-12));
        }
    }
}

#[test]
fn projection_never_helps() {
    let mut r = rng::master(52);
    for _ in 0..200 {
        let n = 12;
        let rank = r.random_range(1..=n);
        let h = gaussian_vec(&mut r, n);
        let interferers: Vec<(CVec, f64)> = (0..3).map(|_| (gaussian_vec(&mut r, n), r.random_range(0.1..3.0))).collect();
        let g = gaussian_mat(&mut r, rank, n);
        let full = sinr_instantaneous(&h, &interferers, 0.7).unwrap();
        let proj = sinr_projected(&g, &h, &interferers, 0.7).unwrap();
        assert!(proj <= full * (1.0 + 1e-9) + 1e-12, "{proj} > {full}");
    }
}

#[test]
fn single_user_lower_bound_holds() {
    let cfg = ScenarioConfig {
        n_h: 4,
        n_v: 4,
        n_ue: 1,
        paths_max: 1,
        v_ue_max_kmh: 0.0,
        srs_snr_db: f64::INFINITY,
        outage: false,
        d: vec![2, 3],
        seed: 53,
        ..Default::default()
    };
    let mut checked = 0;
    for t in 0..100 {
        let res = run_trial(&cfg, t).unwrap();
        for rec in &res.records {
            let bound = rec.gamma_lower_bound_db.expect("precondition holds at these SNRs");
            assert!(bound <= rec.gamma_ltbf_poly_db[&3] + 1e-9, "trial {t}: {bound} > {:?}", rec.gamma_ltbf_poly_db);
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn lower_bound_edge_cases() {
    assert_eq!(sinr_projected_lower_bound(f64::INFINITY, 3.0, 1.0).unwrap(), 0.0);
    assert!(sinr_projected_lower_bound(0.0, 2.0, 1.0).is_err());
    let v = sinr_projected_lower_bound(0.25, 0.4, 1.0).unwrap();
    assert!((v - 0.32 / 0.68).abs() < 1e-15);
}
