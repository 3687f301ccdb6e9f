//! Remez exchange for the weighted minimax fit of `λ^{-1/2}` on `[1, B]`.
//!
//! The fit minimizes `max |λ^{1/2} p(λ) − 1|` over polynomials `p` of degree
//! `d − 1`. Internally `p` is expanded in Chebyshev polynomials of the
//! variable `t ∈ [-1, 1]` mapped affinely onto `[1, B]`, then converted to
//! power-basis coefficients in `λ`.

use nalgebra::{DMatrix, DVector};

const MAX_ITERATIONS: usize = 100;
const LEVEL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn lambda(&self, t: f64) -> f64 {
        0.5 * ((self.hi - self.lo) * t + (self.hi + self.lo))
    }
}

fn chebyshev_row(t: f64, n: usize, out: &mut [f64]) {
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = t;
    }
    for k in 2..n {
        out[k] = 2.0 * t * out[k - 1] - out[k - 2];
    }
}

/// `λ^{1/2} p(λ(t)) − 1` for Chebyshev coefficients `coef`.
pub(crate) fn residual(iv: Interval, coef: &[f64], t: f64) -> f64 {
    let lambda = iv.lambda(t);
    // Clenshaw recurrence.
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in coef.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    let p = coef.first().copied().unwrap_or(0.0) + t * b1 - b2;
    lambda.sqrt() * p - 1.0
}

/// Maximizes `f` on `[a, b]` by golden-section search.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    t: f64,
    value: f64,
}

/// One extremum per sign segment of the residual, refined locally.
fn alternating_extrema(iv: Interval, coef: &[f64], grid: &[f64]) -> Vec<Extremum> {
    let vals: Vec<f64> = grid.iter().map(|&t| residual(iv, coef, t)).collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < grid.len() {
        let sign = vals[start] >= 0.0;
        let mut end = start;
        while end + 1 < grid.len() && (vals[end + 1] >= 0.0) == sign {
            end += 1;
        }
        let j = (start..=end).max_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs())).unwrap();
        let s = if sign { 1.0 } else { -1.0 };
        let ext = if j == 0 || j == grid.len() - 1 {
            Extremum { t: grid[j], value: vals[j] }
        } else {
            let (t, v) = golden_max(|t| s * residual(iv, coef, t), grid[j - 1], grid[j + 1]);
            if v >= s * vals[j] {
                Extremum { t, value: s * v }
            } else {
                Extremum { t: grid[j], value: vals[j] }
            }
        };
        out.push(ext);
        start = end + 1;
    }
    out
}

/// Trims an alternating extremum list to `m` points, never dropping the
/// global maximum.
fn trim_alternating(mut pts: Vec<Extremum>, m: usize) -> Vec<Extremum> {
    while pts.len() > m {
        let last = pts.len() - 1;
        if pts.len() == m + 1 {
            if pts[0].value.abs() < pts[last].value.abs() {
                pts.remove(0);
            } else {
                pts.remove(last);
            }
            continue;
        }
        let k = (0..pts.len()).min_by(|&a, &b| pts[a].value.abs().total_cmp(&pts[b].value.abs())).unwrap();
        if k == 0 || k == last {
            pts.remove(k);
        } else {
            pts.remove(k);
            // neighbours k-1 and k now share a sign
            if pts[k - 1].value.abs() >= pts[k].value.abs() {
                pts.remove(k);
            } else {
                pts.remove(k - 1);
            }
        }
    }
    pts
}

fn search_grid(n: usize) -> Vec<f64> {
    let g = (400 * n).max(4000);
    (0..g).map(|j| -(std::f64::consts::PI * j as f64 / (g - 1) as f64).cos()).collect()
}

/// Solves for coefficients and levelled error on a reference of `n + 1` points.
fn levelled_solve(iv: Interval, reference: &[f64], n: usize) -> Option<(Vec<f64>, f64)> {
    let m = n + 1;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut row = vec![0.0; n];
    for (i, &t) in reference.iter().enumerate() {
        chebyshev_row(t, n, &mut row);
        let w = iv.lambda(t).sqrt();
        for k in 0..n {
            a[(i, k)] = w * row[k];
        }
        a[(i, n)] = if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    let sol = a.lu().solve(&DVector::from_element(m, 1.0))?;
    Some((sol.iter().take(n).copied().collect(), sol[n]))
}

/// Interpolates `λ^{1/2} p(λ) = 1` at the `n` Chebyshev nodes of the first kind.
fn chebyshev_interpolant(iv: Interval, n: usize) -> Option<Vec<f64>> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut row = vec![0.0; n];
    for i in 0..n {
        let t = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
        chebyshev_row(t, n, &mut row);
        let w = iv.lambda(t).sqrt();
        for k in 0..n {
            a[(i, k)] = w * row[k];
        }
    }
    let sol = a.lu().solve(&DVector::from_element(n, 1.0))?;
    Some(sol.iter().copied().collect())
}

fn max_abs_residual(iv: Interval, coef: &[f64], grid: &[f64]) -> f64 {
    alternating_extrema(iv, coef, grid).iter().fold(0.0, |m, e| m.max(e.value.abs()))
}

#[derive(Debug, Clone)]
pub(crate) struct RemezOutcome {
    pub chebyshev: Vec<f64>,
    pub error: f64,
    pub reference_t: Vec<f64>,
    pub reference_values: Vec<f64>,
    pub iterations: usize,
    pub init_error: f64,
    pub converged: bool,
}

pub(crate) fn remez(iv: Interval, n: usize) -> RemezOutcome {
    let grid = search_grid(n);
    let init = chebyshev_interpolant(iv, n).unwrap_or_else(|| vec![0.0; n]);
    let init_error = max_abs_residual(iv, &init, &grid);

    let mut reference: Vec<f64> = (0..=n).map(|i| -(std::f64::consts::PI * i as f64 / n as f64).cos()).collect();
    let mut best: Option<RemezOutcome> = None;

    for iteration in 1..=MAX_ITERATIONS {
        let Some((coef, _level)) = levelled_solve(iv, &reference, n) else {
            break;
        };
        let ext = alternating_extrema(iv, &coef, &grid);
        if ext.len() < n + 1 {
            // Residual no longer alternates on n + 1 points; only possible
            // when it is identically levelled at rounding precision.
            let err = ext.iter().fold(0.0_f64, |m, e| m.max(e.value.abs()));
            let done = err <= 1e-14;
            let outcome = RemezOutcome {
                chebyshev: coef,
                error: err,
                reference_t: ext.iter().map(|e| e.t).collect(),
                reference_values: ext.iter().map(|e| e.value).collect(),
                iterations: iteration,
                init_error,
                converged: done,
            };
            return outcome;
        }
        let ext = trim_alternating(ext, n + 1);
        let e_max = ext.iter().fold(0.0_f64, |m, e| m.max(e.value.abs()));
        let e_min = ext.iter().fold(f64::INFINITY, |m, e| m.min(e.value.abs()));
        let outcome = RemezOutcome {
            chebyshev: coef,
            error: e_max,
            reference_t: ext.iter().map(|e| e.t).collect(),
            reference_values: ext.iter().map(|e| e.value).collect(),
            iterations: iteration,
            init_error,
            converged: false,
        };
        let spread = e_max - e_min;
        if best.as_ref().is_none_or(|b| outcome.error < b.error) {
            best = Some(outcome.clone());
        }
        if spread <= LEVEL_TOLERANCE * e_max || e_max <= 1e-15 {
            return RemezOutcome { converged: true, ..outcome };
        }
        reference = outcome.reference_t;
    }
    best.unwrap_or(RemezOutcome {
        chebyshev: init,
        error: init_error,
        reference_t: Vec::new(),
        reference_values: Vec::new(),
        iterations: MAX_ITERATIONS,
        init_error,
        converged: false,
    })
}

/// Power-basis coefficients in `λ` of `Σ c_k T_k(t(λ))`.
pub(crate) fn chebyshev_to_power(iv: Interval, coef: &[f64]) -> Vec<f64> {
    let n = coef.len();
    if n == 0 {
        return Vec::new();
    }
    // Σ c_k T_k(t) as power series in t.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut tk = vec![0.0; n];
        match k {
            0 => tk[0] = 1.0,
            1 => tk[1] = 1.0,
            _ => {
                for m in 0..n - 1 {
                    tk[m + 1] += 2.0 * basis[k - 1][m];
                }
                for m in 0..n {
                    tk[m] -= basis[k - 2][m];
                }
            }
        }
        basis.push(tk);
    }
    let mut in_t = vec![0.0; n];
    for (ck, tk) in coef.iter().zip(&basis) {
        for m in 0..n {
            in_t[m] += ck * tk[m];
        }
    }
    // Substitute t = s λ + o.
    let s = 2.0 / (iv.hi - iv.lo);
    let o = -(iv.hi + iv.lo) / (iv.hi - iv.lo);
    let mut out = vec![0.0; n];
    for &a in in_t.iter().rev() {
        let mut next = vec![0.0; n];
        for m in 0..n {
            next[m] += o * out[m];
            if m + 1 < n {
                next[m + 1] += s * out[m];
            }
        }
        next[0] += a;
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_conversion_matches_clenshaw() {
        let iv = Interval { lo: 1.0, hi: 16.0 };
        let coef = [0.3, -0.2, 0.05, 0.01];
        let beta = chebyshev_to_power(iv, &coef);
        for &lambda in &[1.0, 2.5, 7.0, 16.0] {
            let t = (2.0 * lambda - 17.0) / 15.0;
            let direct = residual(iv, &coef, t) + 1.0;
            let p: f64 = beta.iter().rev().fold(0.0, |acc, b| acc * lambda + b);
            assert!((direct - lambda.sqrt() * p).abs() < 1e-12);
        }
    }

    #[test]
    fn trimming_keeps_global_max() {
        let pts = [0.1, -0.5, 0.2, -0.3, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &v)| Extremum { t: i as f64, value: v })
            .collect();
        let kept = trim_alternating(pts, 3);
        assert_eq!(kept.len(), 3);
        assert!(kept.iter().any(|e| e.value == 0.9));
        for w in kept.windows(2) {
            assert!(w[0].value * w[1].value < 0.0);
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 1.0);
        assert!((x - 0.3).abs() < 1e-7);
        assert!(v.abs() < 1e-14);
    }
}
