//! Rank-`r` long-term projections `G_i = [Q_i^{1/2} S]_r S`, where `S` is
//! either the exact `Q̂^{-1/2}` or its polynomial approximation `P`, and the
//! capacity upper bound they maximize.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::SpatialCovariance;
use crate::error::{LtbfError, Result};
use crate::linalg::{hermitian_part, real, CMat, CVec, HermitianEigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMethod {
    Exact,
    Poly { d: usize },
}

#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    /// `r x N_rx`.
    pub g: CMat,
    /// Orthonormal rows with `G = U S`.
    pub u: CMat,
    pub user: usize,
    pub method: ProjectionMethod,
    /// Fewer than `r` non-zero singular values; trailing rows of `U` were
    /// completed from the null space.
    pub rank_deficient: bool,
}

impl ProjectionMatrix {
    pub fn rank(&self) -> usize {
        self.g.nrows()
    }
}

/// `V diag(√max(λ, 0)) V^H`.
pub fn psd_sqrt(q: &SpatialCovariance) -> Result<CMat> {
    let eig = HermitianEigen::new(&q.matrix);
    let trace = q.trace().abs();
    if eig.min() < -1e-6 * trace {
        return Err(LtbfError::Indefinite { min_eigenvalue: eig.min(), trace });
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// `Q^{-1/2}` of a positive definite covariance.
pub fn inv_sqrt(q: &SpatialCovariance) -> Result<CMat> {
    inv_sqrt_from(&HermitianEigen::new(&q.matrix))
}

pub fn inv_sqrt_from(eig: &HermitianEigen) -> Result<CMat> {
    if eig.min() <= 0.0 {
        return Err(LtbfError::Indefinite { min_eigenvalue: eig.min(), trace: eig.values.iter().sum() });
    }
    Ok(eig.map(|l| 1.0 / l.sqrt()))
}

#[derive(Debug, Clone)]
pub struct TopRows {
    /// `r x n`, orthonormal.
    pub rows: CMat,
    /// Singular values of the kept rows, descending; zero for completed rows.
    pub singular_values: Vec<f64>,
    pub rank_deficient: bool,
}

/// Rescales a row so its largest-magnitude entry (lowest index on ties) is
/// real positive.
fn fix_phase(row: &mut [Complex64]) {
    let max = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = row.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap();
    let phase = row[pivot].conj() / row[pivot].norm();
    for z in row.iter_mut() {
        *z *= phase;
    }
}

/// Hermitian-transposed right singular vectors of the `r` largest singular
/// values of `a`, as rows.
pub fn top_r_rows(a: &CMat, r: usize) -> Result<TopRows> {
    let n = a.ncols();
    if r > n {
        return Err(LtbfError::InvalidParameter(format!("rank {r} exceeds {n} columns")));
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let tol = sv.iter().copied().fold(0.0, f64::max) * (a.nrows().max(n) as f64) * f64::EPSILON;

    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    let mut values = Vec::with_capacity(r);
    for &i in order.iter().take(r) {
        if sv[i] <= tol {
            break;
        }
        rows.push(v_t.row(i).iter().copied().collect());
        values.push(sv[i]);
    }
    let rank_deficient = rows.len() < r;
    // Complete from canonical basis vectors, lowest index first.
    let mut e = 0;
    while rows.len() < r && e < n {
        let mut cand = vec![Complex64::new(0.0, 0.0); n];
        cand[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for row in &rows {
                let proj: Complex64 = row.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                for (c, x) in cand.iter_mut().zip(row) {
                    *c -= proj * x;
                }
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            for z in cand.iter_mut() {
                *z /= norm;
            }
            rows.push(cand);
            values.push(0.0);
        }
        e += 1;
    }
    for row in &mut rows {
        fix_phase(row);
    }
    let rows_mat = CMat::from_fn(r, n, |i, j| rows[i][j]);
    Ok(TopRows { rows: rows_mat, singular_values: values, rank_deficient })
}

/// Builds `G = [Q_i^{1/2} S]_r S`.
///
/// With a factored estimate `Q_i = F F^H`, the right singular vectors of
/// `Q_i^{1/2} S` are those of `F^H S`, since both share the Gram matrix
/// `S Q_i S`; no eigendecomposition of `Q_i` is needed.
pub fn build_projection(
    qi_hat: &SpatialCovariance,
    inv_sqrt_factor: &CMat,
    r: usize,
    user: usize,
    method: ProjectionMethod,
) -> Result<ProjectionMatrix> {
    let n = qi_hat.dim();
    if inv_sqrt_factor.nrows() != n || inv_sqrt_factor.ncols() != n {
        return Err(LtbfError::DimensionMismatch(format!(
            "{}x{} inverse-sqrt factor for {n} antennas",
            inv_sqrt_factor.nrows(),
            inv_sqrt_factor.ncols()
        )));
    }
    let a = match &qi_hat.factor {
        Some(f) => f.adjoint() * inv_sqrt_factor,
        None => psd_sqrt(qi_hat)? * inv_sqrt_factor,
    };
    let top = top_r_rows(&a, r)?;
    let g = &top.rows * inv_sqrt_factor;
    Ok(ProjectionMatrix { g, u: top.rows, user, method, rank_deficient: top.rank_deficient })
}

/// Projection with the exact `Q̂^{-1/2}`.
pub fn projection_exact(qi_hat: &SpatialCovariance, qhat: &SpatialCovariance, r: usize, user: usize) -> Result<ProjectionMatrix> {
    let s = inv_sqrt(qhat)?;
    build_projection(qi_hat, &s, r, user, ProjectionMethod::Exact)
}

/// Projection with the polynomial approximation `P` of degree count `d`.
pub fn projection_poly(qi_hat: &SpatialCovariance, p: &CMat, r: usize, user: usize, d: usize) -> Result<ProjectionMatrix> {
    build_projection(qi_hat, p, r, user, ProjectionMethod::Poly { d })
}

/// `C̄ = log2 det(I + G S G^H (G R G^H)^{-1})` in bits.
///
/// `signal` is the user's scaled covariance `α_i Q_i`; `interference` is
/// `R_i`.
pub fn capacity_upper_bound(g: &CMat, signal: &CMat, interference: &CMat) -> Result<f64> {
    let n = g.ncols();
    if signal.nrows() != n || interference.nrows() != n {
        return Err(LtbfError::DimensionMismatch(format!(
            "projection with {n} columns against {}x{} and {}x{} covariances",
            signal.nrows(),
            signal.ncols(),
            interference.nrows(),
            interference.ncols()
        )));
    }
    let gs = hermitian_part(&(g * signal * g.adjoint()));
    if gs.norm() == 0.0 {
        return Ok(0.0);
    }
    let gr = hermitian_part(&(g * interference * g.adjoint()));
    let chol = gr
        .clone()
        .cholesky()
        .ok_or_else(|| LtbfError::Singular("projected interference G R G^H".into()))?;
    let l = chol.l();
    let diag_max = (0..l.nrows()).map(|i| l[(i, i)].norm_sqr()).fold(0.0, f64::max);
    let diag_min = (0..l.nrows()).map(|i| l[(i, i)].norm_sqr()).fold(f64::INFINITY, f64::min);
    if diag_min <= 1e-14 * diag_max {
        return Err(LtbfError::Singular("projected interference G R G^H is rank deficient".into()));
    }
    let y = l.solve_lower_triangular(&gs).expect("non-singular triangle");
    let z = l.solve_lower_triangular(&y.adjoint()).expect("non-singular triangle");
    let m = hermitian_part(&z.adjoint());
    let eig = HermitianEigen::new(&m);
    Ok(eig.values.iter().map(|&mu| (1.0 + mu.max(0.0)).log2()).sum())
}

/// Ergodic capacity `log2 det(I + G h h^H G^H (G R G^H)^{-1})` for one
/// small-scale realization `h` (already scaled by `√α_i`).
pub fn instantaneous_capacity(g: &CMat, h: &CVec, interference: &CMat) -> Result<f64> {
    let hh = h * h.adjoint();
    capacity_upper_bound(g, &hh, interference)
}

/// `ε_r = 1 − ‖U P h‖² / ‖P h‖²`.
pub fn energy_loss(proj: &ProjectionMatrix, p: &CMat, h: &CVec) -> Result<f64> {
    let ph = p * h;
    let total = ph.norm_squared();
    if total == 0.0 {
        return Err(LtbfError::ZeroNorm("P h".into()));
    }
    let kept = (&proj.u * &ph).norm_squared();
    Ok((1.0 - kept / total).clamp(0.0, 1.0))
}

/// Scales a matrix, used when forming `α_i Q_i`.
pub fn scaled(m: &CMat, s: f64) -> CMat {
    m * real(s)
}
