//! Instantaneous MMSE and projected receivers with their SINR formulas.
//!
//! All SINR functions return linear values for single-stream users.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LtbfError, Result};
use crate::linalg::{cholesky, hermitian_part, hpd_solve, identity, real, CMat, CVec};

/// Per-user SINRs from one trial, in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrRecord {
    pub user: usize,
    pub gamma_instantaneous_db: f64,
    pub gamma_ltbf_exact_db: f64,
    /// Keyed by polynomial coefficient count `d`.
    pub gamma_ltbf_poly_db: BTreeMap<usize, f64>,
    /// `None` when the bound's precondition `α'‖h̃‖² < 1` fails.
    pub gamma_lower_bound_db: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub eps_r: Option<f64>,
}

fn check_len(v: &CVec, n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(LtbfError::DimensionMismatch(format!("{what} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

/// `F_i = α_i H_i^H (I + Σ_j α_j H_j H_j^H)^{-1}` for every user.
pub fn mmse_instantaneous(channels: &[CMat], alphas: &[f64]) -> Result<Vec<CMat>> {
    if channels.len() != alphas.len() {
        return Err(LtbfError::DimensionMismatch(format!("{} channels for {} alphas", channels.len(), alphas.len())));
    }
    let Some(first) = channels.first() else {
        return Ok(Vec::new());
    };
    let n = first.nrows();
    let mut k = identity(n);
    for (h, &a) in channels.iter().zip(alphas) {
        if h.nrows() != n {
            return Err(LtbfError::DimensionMismatch(format!("channel with {} rows, expected {n}", h.nrows())));
        }
        k += h * h.adjoint() * real(a);
    }
    let chol = cholesky(&k, "I + Σ α H H^H")?;
    Ok(channels
        .iter()
        .zip(alphas)
        .map(|(h, &a)| (chol.solve(h) * real(a)).adjoint())
        .collect())
}

/// `I + Σ_j α_j h_j h_j^H`.
pub fn interference_plus_noise(n: usize, interferers: &[(CVec, f64)]) -> Result<CMat> {
    let mut k = identity(n);
    for (h, a) in interferers {
        check_len(h, n, "interferer channel")?;
        k += h * h.adjoint() * real(*a);
    }
    Ok(k)
}

/// `γ = α_i h_i^H (I + Σ_{j≠i} α_j h_j h_j^H)^{-1} h_i`.
pub fn sinr_instantaneous(h: &CVec, interferers: &[(CVec, f64)], alpha: f64) -> Result<f64> {
    let k = interference_plus_noise(h.len(), interferers)?;
    let x = hpd_solve(&k, h, "interference-plus-noise covariance")?;
    Ok(alpha * h.dotc(&x).re)
}

/// `γ = α h^H Q^{-1} h / (1 − α h^H Q^{-1} h)`, where `Q` contains the
/// user's own term `α h h^H`.
pub fn sinr_longterm_closed_form(h: &CVec, q: &CMat, alpha: f64) -> Result<f64> {
    check_len(h, q.nrows(), "channel")?;
    let x = hpd_solve(q, h, "aggregate covariance")?;
    let s = alpha * h.dotc(&x).re;
    let denom = 1.0 - s;
    if denom <= 0.0 {
        return Err(LtbfError::NonPositiveDenominator(denom));
    }
    Ok(s / denom)
}

/// `γ = α h^H R^{-1} h` with `R = Q − α h h^H`, computed directly.
pub fn sinr_longterm_direct(h: &CVec, q: &CMat, alpha: f64) -> Result<f64> {
    check_len(h, q.nrows(), "channel")?;
    let r = q - h * h.adjoint() * real(alpha);
    let x = hpd_solve(&r, h, "interference covariance Q − α h h^H")?;
    Ok(alpha * h.dotc(&x).re)
}

/// `γ̃ = α_i h̃^H R̃^{-1} h̃` with `h̃ = G h_i` and
/// `R̃ = G (I + Σ_{j≠i} α_j h_j h_j^H) G^H`.
pub fn sinr_projected(g: &CMat, h: &CVec, interferers: &[(CVec, f64)], alpha: f64) -> Result<f64> {
    let n = g.ncols();
    check_len(h, n, "channel")?;
    let mut rt = g * g.adjoint();
    for (hj, a) in interferers {
        check_len(hj, n, "interferer channel")?;
        let p = g * hj;
        rt += &p * p.adjoint() * real(*a);
    }
    let ht = g * h;
    let rt = hermitian_part(&rt);
    let chol = rt.cholesky().ok_or_else(|| LtbfError::Singular("projected interference R̃".into()))?;
    let l = chol.l();
    let d_max = (0..l.nrows()).map(|i| l[(i, i)].norm_sqr()).fold(0.0, f64::max);
    let d_min = (0..l.nrows()).map(|i| l[(i, i)].norm_sqr()).fold(f64::INFINITY, f64::min);
    if d_min <= 1e-14 * d_max {
        return Err(LtbfError::Singular("projected interference R̃ is rank deficient".into()));
    }
    Ok(alpha * ht.dotc(&chol.solve(&ht)).re)
}

/// `γ̃ ≥ α' ‖h̃‖² / (1 − α' ‖h̃‖²)` with `α' = α / (1 + ε_s)`.
pub fn sinr_projected_lower_bound(eps_s: f64, h_tilde_norm2: f64, alpha: f64) -> Result<f64> {
    if eps_s.is_infinite() {
        return Ok(0.0);
    }
    let alpha_p = alpha / (1.0 + eps_s);
    let x = alpha_p * h_tilde_norm2;
    if x >= 1.0 {
        return Err(LtbfError::InvalidParameter(format!("α'‖h̃‖² = {x} >= 1")));
    }
    Ok(alpha_p * h_tilde_norm2 / (1.0 - x))
}
