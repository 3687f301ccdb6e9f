#![allow(dead_code)]

use ltbf_core::covariance::{CovarianceKind, SpatialCovariance};
use ltbf_core::linalg::{hermitian_part, identity, real, CMat, CVec};
use ltbf_core::rng::{complex_normal, SimRng};
use nalgebra::DMatrix;
use rand::Rng;

pub fn gaussian_mat(rng: &mut SimRng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng, 1.0))
}

pub fn gaussian_vec(rng: &mut SimRng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng, 1.0))
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn unitary(rng: &mut SimRng, n: usize) -> CMat {
    gaussian_mat(rng, n, n).qr().q()
}

/// `V diag(λ) V^H` with the given spectrum.
pub fn with_spectrum(rng: &mut SimRng, lambdas: &[f64]) -> CMat {
    let v = unitary(rng, lambdas.len());
    let d = CMat::from_diagonal(&CVec::from_iterator(lambdas.len(), lambdas.iter().map(|&l| real(l))));
    hermitian_part(&(&v * d * v.adjoint()))
}

/// `I + Σ_k α_k F_k F_k^H` with random rank-`rank` factors.
pub fn random_aggregate(rng: &mut SimRng, n: usize, users: usize, rank: usize) -> SpatialCovariance {
    let mut q = identity(n);
    for _ in 0..users {
        let f = gaussian_mat(rng, n, rank);
        let a: f64 = rng.random_range(0.05..2.0);
        q += &f * f.adjoint() * real(a);
    }
    SpatialCovariance { matrix: hermitian_part(&q), kind: CovarianceKind::Aggregate, factor: None }
}

/// `cos(k arccos t)` evaluated independently of the library's Clenshaw code.
pub fn chebyshev_t(k: usize, t: f64) -> f64 {
    (k as f64 * t.clamp(-1.0, 1.0).acos()).cos()
}

/// Discrete weighted minimax error
/// `min_c max_i |√λ_i Σ_k c_k T_k(t_i) − 1|` over a uniform grid in `[1, B]`,
/// solved as the dual linear program
/// `max Σ (u_i − v_i)` s.t. `Σ (u_i − v_i) a_i = 0`, `Σ (u_i + v_i) = 1`, `u, v ≥ 0`
/// with a two-phase revised simplex.
pub fn discrete_minimax_lp(d: usize, b: f64, grid: usize) -> f64 {
    let lam: Vec<f64> = (0..grid).map(|i| 1.0 + (b - 1.0) * i as f64 / (grid - 1) as f64).collect();
    let rows: Vec<Vec<f64>> = lam
        .iter()
        .map(|&l| {
            let t = (2.0 * l - (b + 1.0)) / (b - 1.0);
            (0..d).map(|k| l.sqrt() * chebyshev_t(k, t)).collect()
        })
        .collect();
    let m = d + 1;
    let n_real = 2 * grid;
    let column = |j: usize| -> Vec<f64> {
        if j >= n_real {
            let mut e = vec![0.0; m];
            e[j - n_real] = 1.0;
            return e;
        }
        let s = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut c: Vec<f64> = rows[j / 2].iter().map(|x| s * x).collect();
        c.push(1.0);
        c
    };
    let cost2 = |j: usize| if j >= n_real { 0.0 } else if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let cost1 = |j: usize| if j >= n_real { -1.0 } else { 0.0 };
    let mut rhs = vec![0.0; m];
    rhs[m - 1] = 1.0;
    let mut basis: Vec<usize> = (0..m).map(|k| n_real + k).collect();

    let solve_phase = |basis: &mut Vec<usize>, cost: &dyn Fn(usize) -> f64, allow_art: bool| -> f64 {
        for _ in 0..20_000 {
            let bmat = DMatrix::<f64>::from_fn(m, m, |r, c| column(basis[c])[r]);
            let binv = bmat.try_inverse().expect("basis stays non-singular");
            let xb = &binv * nalgebra::DVector::from_vec(rhs.clone());
            let cb = nalgebra::DVector::from_iterator(m, basis.iter().map(|&j| cost(j)));
            let y = binv.transpose() * &cb;
            let mut best = (1e-12, usize::MAX);
            for (i, row) in rows.iter().enumerate() {
                let dot: f64 = row.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
                for (j, s) in [(2 * i, 1.0), (2 * i + 1, -1.0)] {
                    let rc = cost(j) - (s * dot + y[m - 1]);
                    if rc > best.0 && !basis.contains(&j) {
                        best = (rc, j);
                    }
                }
            }
            if allow_art {
                for k in 0..m {
                    let j = n_real + k;
                    let rc = cost(j) - y[k];
                    if rc > best.0 && !basis.contains(&j) {
                        best = (rc, j);
                    }
                }
            }
            if best.1 == usize::MAX {
                return cb.dot(&xb);
            }
            let dir = &binv * nalgebra::DVector::from_vec(column(best.1));
            let mut leave = (f64::INFINITY, usize::MAX);
            for k in 0..m {
                if dir[k] > 1e-12 {
                    let ratio = xb[k].max(0.0) / dir[k];
                    if ratio < leave.0 - 1e-15 {
                        leave = (ratio, k);
                    }
                }
            }
            assert!(leave.1 != usize::MAX, "dual LP is bounded");
            basis[leave.1] = best.1;
        }
        panic!("simplex iteration limit");
    };

    let phase1 = solve_phase(&mut basis, &cost1, true);
    assert!(phase1.abs() < 1e-10, "dual LP infeasible: {phase1}");
    // Drive zero-level artificials out of the basis.
    for k in 0..m {
        if basis[k] < n_real {
            continue;
        }
        let bmat = DMatrix::<f64>::from_fn(m, m, |r, c| column(basis[c])[r]);
        let binv = bmat.try_inverse().unwrap();
        let swap = (0..n_real).find(|&j| {
            !basis.contains(&j) && (&binv * nalgebra::DVector::from_vec(column(j)))[k].abs() > 1e-9
        });
        if let Some(j) = swap {
            basis[k] = j;
        }
    }
    solve_phase(&mut basis, &cost2, false)
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Golden-section maximisation of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x1, f1), (x2, f2)].into_iter().fold((x, fx), |acc, p| if p.1 > acc.1 { p } else { acc })
}
