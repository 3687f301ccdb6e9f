//! Polynomial approximation of the aggregate covariance inverse square root.
//!
//! `P = Σ_k β_k Q̂^k ≈ Q̂^{-1/2}`, with `β` fitted once per spectral bound
//! `B` by a weighted Remez exchange on `[1, B]`, and a certificate relating
//! the grid bounds to the errors measured on a concrete `Q̂`.

mod remez;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::SpatialCovariance;
use crate::error::{LtbfError, Result};
use crate::linalg::{hermitian_norm2, hermitian_part, identity, real, CMat, CVec, HermitianEigen};
use crate::rng;

use remez::{chebyshev_to_power, golden_max, remez, Interval};

pub const POWER_ITERATIONS: usize = 30;
pub const SAFETY_FACTOR: f64 = 1.05;
pub const MIN_CERTIFICATE_GRID: usize = 1000;

/// Power-basis coefficients `β_0 .. β_{d-1}` valid on `[1, B]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    pub d: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub beta: Vec<f64>,
    /// `max_{λ∈[1,B]} |λ^{1/2} p(λ) − 1|`.
    pub minimax_error: f64,
}

impl PolyCoeffs {
    /// Wraps arbitrary coefficients; the stored error is measured on a dense grid.
    pub fn from_beta(beta: Vec<f64>, b: f64) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|v| !v.is_finite()) {
            return Err(LtbfError::InvalidParameter("coefficients must be non-empty and finite".into()));
        }
        if !(b >= 1.0 && b.is_finite()) {
            return Err(LtbfError::InvalidParameter(format!("spectral bound B = {b}")));
        }
        let mut c = Self { d: beta.len(), b, beta, minimax_error: 0.0 };
        c.minimax_error = interval_max(|l| weighted_residual(&c, l).abs(), 1.0, b, 20_000);
        Ok(c)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        eval_poly_scalar(self, lambda)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        if c.d != c.beta.len() || c.d == 0 {
            return Err(LtbfError::InvalidParameter(format!("d = {} with {} coefficients", c.d, c.beta.len())));
        }
        Ok(c)
    }
}

/// Fitted coefficients plus diagnostics of the exchange.
#[derive(Debug, Clone)]
pub struct PolyFit {
    pub coeffs: PolyCoeffs,
    /// Final reference points in `λ` and the residual there.
    pub reference: Vec<(f64, f64)>,
    pub iterations: usize,
    /// Error of the Chebyshev-node interpolant used to seed the exchange.
    pub init_error: f64,
    /// `max |λ p(λ)^2 − 1|` on `[1, B]`.
    pub quadratic_error: f64,
}

/// Weighted minimax fit of `λ^{-1/2}` on `[1, B]` with `d` coefficients.
pub fn fit_inv_sqrt_poly(d: usize, b: f64) -> Result<PolyFit> {
    if d == 0 {
        return Err(LtbfError::InvalidParameter("polynomial needs at least one coefficient".into()));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return Err(LtbfError::InvalidParameter(format!("spectral bound B = {b} must be >= 1")));
    }
    if b - 1.0 <= 1e-12 {
        let mut beta = vec![0.0; d];
        beta[0] = 1.0;
        let coeffs = PolyCoeffs { d, b, beta, minimax_error: 0.0 };
        return Ok(PolyFit { coeffs, reference: vec![(1.0, 0.0)], iterations: 0, init_error: 0.0, quadratic_error: 0.0 });
    }
    let iv = Interval { lo: 1.0, hi: b };
    let out = remez(iv, d);
    let beta = chebyshev_to_power(iv, &out.chebyshev);
    let coeffs = PolyCoeffs { d, b, beta, minimax_error: out.error };
    if !out.converged {
        return Err(LtbfError::RemezNonConvergence { iterations: out.iterations, best: Box::new(coeffs) });
    }
    let quadratic_error = interval_max(|l| quadratic_residual(&coeffs, l).abs(), 1.0, b, 20_000);
    let reference = out.reference_t.iter().zip(&out.reference_values).map(|(&t, &v)| (iv.lambda(t), v)).collect();
    Ok(PolyFit { coeffs, reference, iterations: out.iterations, init_error: out.init_error, quadratic_error })
}

/// `p(λ) = Σ β_k λ^k` by Horner's rule.
pub fn eval_poly_scalar(c: &PolyCoeffs, lambda: f64) -> f64 {
    c.beta.iter().rev().fold(0.0, |acc, &b| acc * lambda + b)
}

/// `λ^{1/2} p(λ) − 1`.
pub fn weighted_residual(c: &PolyCoeffs, lambda: f64) -> f64 {
    lambda.sqrt() * eval_poly_scalar(c, lambda) - 1.0
}

/// `λ p(λ)^2 − 1`.
pub fn quadratic_residual(c: &PolyCoeffs, lambda: f64) -> f64 {
    let p = eval_poly_scalar(c, lambda);
    lambda * p * p - 1.0
}

/// Max of `f` over `[lo, hi]`: `n`-point uniform grid, every local maximum refined.
pub fn interval_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    if hi <= lo || n < 2 {
        return f(lo);
    }
    let xs: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for j in 1..n - 1 {
        if ys[j] >= ys[j - 1] && ys[j] >= ys[j + 1] {
            let (_, v) = golden_max(&f, xs[j - 1], xs[j + 1]);
            best = best.max(v);
        }
    }
    best
}

/// Result of the Horner evaluation of `P = p(Q̂)`.
#[derive(Debug, Clone)]
pub struct PolyMatrix {
    pub matrix: CMat,
    /// Horner steps that multiply the accumulator by `Q̂`.
    pub matmuls: usize,
}

/// `P = Σ β_k Q̂^k` by Horner's rule with `d − 1` multiplications by `Q̂`.
///
/// The first step multiplies the scaled identity `β_{d-1} I` by `Q̂`, so it
/// is formed directly as `β_{d-1} Q̂`.
pub fn eval_poly_matrix(c: &PolyCoeffs, qhat: &SpatialCovariance) -> PolyMatrix {
    let q = &qhat.matrix;
    let n = q.nrows();
    let d = c.beta.len();
    let mut matmuls = 0;
    let mut acc = identity(n) * real(c.beta[d - 1]);
    for k in (0..d - 1).rev() {
        acc = if matmuls == 0 { q * real(c.beta[d - 1]) } else { &acc * q };
        matmuls += 1;
        for i in 0..n {
            acc[(i, i)] += c.beta[k];
        }
    }
    PolyMatrix { matrix: acc, matmuls }
}

/// Grid bounds against measured approximation errors on one `Q̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCertificate {
    /// `max_{[1,B]} |λ p(λ)^2 − 1|`.
    pub eps1_bound: f64,
    /// `max_{[1,B]} |p(λ) − λ^{-1/2}|`.
    pub eps2_bound: f64,
    /// `max_{[1,B]} |λ p(λ) − λ^{-1/2}|`, the λ-weighted variant.
    pub eps2_bound_weighted: f64,
    /// `‖P Q̂ P − I‖_2`.
    pub eps1_measured: f64,
    /// `‖P − Q̂^{-1/2}‖_2`.
    pub eps2_measured: f64,
    pub grid_size: usize,
    /// Set when the spectrum of `Q̂` leaves `[1, B]`; the bounds then do not apply.
    pub out_of_interval: bool,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
}

impl ErrorCertificate {
    pub fn is_sound(&self, slack: f64) -> bool {
        self.eps1_measured <= self.eps1_bound + slack && self.eps2_measured <= self.eps2_bound + slack
    }
}

pub fn certify(c: &PolyCoeffs, qhat: &SpatialCovariance, grid_size: usize) -> Result<ErrorCertificate> {
    let eig = HermitianEigen::new(&qhat.matrix);
    let p = eval_poly_matrix(c, qhat).matrix;
    certify_with(c, qhat, &eig, &p, grid_size)
}

/// As [`certify`], reusing an eigendecomposition of `Q̂` and an evaluated `P`.
pub fn certify_with(
    c: &PolyCoeffs,
    qhat: &SpatialCovariance,
    eig: &HermitianEigen,
    p: &CMat,
    grid_size: usize,
) -> Result<ErrorCertificate> {
    if grid_size < MIN_CERTIFICATE_GRID {
        return Err(LtbfError::InvalidParameter(format!(
            "certificate grid of {grid_size} points (minimum {MIN_CERTIFICATE_GRID})"
        )));
    }
    let b = c.b;
    let eps1_bound = interval_max(|l| quadratic_residual(c, l).abs(), 1.0, b, grid_size);
    let eps2_bound = interval_max(|l| (eval_poly_scalar(c, l) - l.powf(-0.5)).abs(), 1.0, b, grid_size);
    let eps2_bound_weighted = interval_max(|l| (l * eval_poly_scalar(c, l) - l.powf(-0.5)).abs(), 1.0, b, grid_size);

    let n = qhat.dim();
    let mut pqp = p * &qhat.matrix * p;
    for i in 0..n {
        pqp[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    let eps1_measured = hermitian_norm2(&hermitian_part(&pqp));
    let inv_sqrt = eig.map(|l| l.max(f64::MIN_POSITIVE).powf(-0.5));
    let eps2_measured = hermitian_norm2(&hermitian_part(&(p - inv_sqrt)));

    let (lo, hi) = (eig.min(), eig.max());
    let out_of_interval = hi > b * (1.0 + 1e-12) || lo < 1.0 - 1e-10;
    Ok(ErrorCertificate {
        eps1_bound,
        eps2_bound,
        eps2_bound_weighted,
        eps1_measured,
        eps2_measured,
        grid_size,
        out_of_interval,
        spectrum_min: lo,
        spectrum_max: hi,
    })
}

/// Upper spectral bound `B` for `Q̂`: Rayleigh quotient after
/// [`POWER_ITERATIONS`] power steps from a fixed pseudo-random start,
/// times [`SAFETY_FACTOR`], never below 1.
pub fn spectral_upper_bound(qhat: &SpatialCovariance) -> f64 {
    let q = &qhat.matrix;
    let n = q.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut r = rng::master(0x5eed_b0d5);
    let mut v = CVec::from_fn(n, |_, _| rng::complex_normal(&mut r, 1.0));
    v /= real(v.norm());
    for _ in 0..POWER_ITERATIONS {
        let w = q * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 1.0;
        }
        v = w / real(norm);
    }
    let theta = v.dotc(&(q * &v)).re;
    (SAFETY_FACTOR * theta).max(1.0)
}
