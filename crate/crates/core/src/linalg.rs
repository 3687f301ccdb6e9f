//! Dense complex helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LtbfError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * real(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(a: &CMat) -> Self {
        let eig = hermitian_part(a).symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V^H`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for r in 0..n {
                scaled[(r, k)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Induced 2-norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_norm2(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// Relative Hermitian defect `‖A − A^H‖_F / ‖A‖_F`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.norm();
    if n == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / n
}

/// Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(a: &CMat, what: &str) -> Result<nalgebra::Cholesky<Complex64, nalgebra::Dyn>> {
    hermitian_part(a)
        .cholesky()
        .ok_or_else(|| LtbfError::Singular(format!("{what} is not positive definite")))
}

/// Solve `A x = b` for Hermitian positive definite `A`.
pub fn hpd_solve(a: &CMat, b: &CVec, what: &str) -> Result<CVec> {
    Ok(cholesky(a, what)?.solve(b))
}

/// `x^H y`.
pub fn dot_h(x: &CVec, y: &CVec) -> Complex64 {
    x.dotc(y)
}

pub fn outer_h(x: &CVec) -> CMat {
    x * x.adjoint()
}

/// Cosines of the principal angles between the row spaces of two matrices
/// with orthonormal rows, descending.
pub fn principal_cosines(a: &CMat, b: &CMat) -> Vec<f64> {
    let m = a * b.adjoint();
    let mut s: Vec<f64> = m.singular_values().iter().map(|v| v.min(1.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest principal angle in radians between two row spaces.
pub fn max_principal_angle(a: &CMat, b: &CMat) -> f64 {
    principal_cosines(a, b).last().map(|c| c.acos()).unwrap_or(0.0)
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
