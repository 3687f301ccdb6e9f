//! SRS-based spatial covariance estimates and the aggregate/interference
//! matrices built from them.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_at, steering_vector, ArrayGeometry, UserLink};
use crate::error::{LtbfError, Result};
use crate::linalg::{hermitian_part, identity, real, trace_re, CMat, HermitianEigen};
use crate::rng::complex_normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    PerUserTrue,
    PerUserEstimate,
    Aggregate,
    Interference,
}

/// Hermitian PSD spatial covariance.
///
/// Per-user matrices may carry a factor `F` with `matrix = F F^H`; the
/// projection code uses it to avoid full eigendecompositions of low-rank
/// estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCovariance {
    pub matrix: CMat,
    pub kind: CovarianceKind,
    pub factor: Option<CMat>,
}

impl SpatialCovariance {
    /// Builds a covariance from measured data: symmetrizes, then clamps
    /// negative eigenvalues to zero.
    pub fn from_data(matrix: &CMat, kind: CovarianceKind) -> Result<Self> {
        check_square(matrix)?;
        let eig = HermitianEigen::new(matrix);
        let repaired = if eig.min() < 0.0 { eig.map(|l| l.max(0.0)) } else { hermitian_part(matrix) };
        Ok(Self { matrix: repaired, kind, factor: None })
    }

    /// `F F^H`, PSD by construction.
    pub fn from_factor(factor: CMat, kind: CovarianceKind) -> Self {
        let matrix = hermitian_part(&(&factor * factor.adjoint()));
        Self { matrix, kind, factor: Some(factor) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.matrix)
    }

    pub fn identity(n: usize, kind: CovarianceKind) -> Self {
        Self { matrix: identity(n), kind, factor: None }
    }

    /// Row-major interleaved `re, im` matrix dump.
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.matrix)
    }
}

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(LtbfError::DimensionMismatch(format!("{}x{} covariance", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// JSON matrix format: `{"rows", "cols", "data": [re, im, re, im, ...]}`,
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(2 * m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(m[(r, c)].re);
                data.push(m[(r, c)].im);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.data.len() != 2 * self.rows * self.cols {
            return Err(LtbfError::DimensionMismatch(format!(
                "{} values for a {}x{} complex matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |r, c| {
            let k = 2 * (r * self.cols + c);
            Complex64::new(self.data[k], self.data[k + 1])
        }))
    }
}

/// Channel estimates from one user's sounding over a long-term period.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsBatch {
    /// `N_rx x N_SRS`.
    pub estimates: CMat,
    pub user: usize,
    pub period_start: f64,
    pub period_end: f64,
}

impl SrsBatch {
    pub fn n_srs(&self) -> usize {
        self.estimates.ncols()
    }
}

/// `N_SRS` sounding instants spread evenly over `[start, start + t_lt)`.
pub fn srs_times(start: f64, t_lt: f64, n_srs: usize) -> Vec<f64> {
    (0..n_srs).map(|t| start + t as f64 * t_lt / n_srs as f64).collect()
}

/// Per-entry estimation noise standard deviation for a target estimation
/// SNR (dB), given unit per-antenna channel power.
pub fn srs_noise_std(estimation_snr_db: f64) -> f64 {
    if estimation_snr_db.is_infinite() && estimation_snr_db > 0.0 {
        0.0
    } else {
        10f64.powf(-estimation_snr_db / 20.0)
    }
}

/// Sounds `link` at each of `times` on a random subcarrier in `0..n_subcarriers`.
pub fn simulate_srs<R: Rng + ?Sized>(
    link: &UserLink,
    geom: &ArrayGeometry,
    user: usize,
    times: &[f64],
    n_subcarriers: usize,
    est_noise_std: f64,
    rng: &mut R,
) -> SrsBatch {
    let n_rx = geom.n_rx();
    let mut estimates = CMat::zeros(n_rx, times.len());
    let var = est_noise_std * est_noise_std;
    for (t, &time) in times.iter().enumerate() {
        let k = rng.random_range(0..n_subcarriers.max(1));
        let h = channel_at(link, geom, time, k).vector();
        for r in 0..n_rx {
            let noise = if var > 0.0 { complex_normal(rng, var) } else { Complex64::new(0.0, 0.0) };
            estimates[(r, t)] = h[r] + noise;
        }
    }
    let period_start = times.first().copied().unwrap_or(0.0);
    let period_end = times.last().copied().unwrap_or(0.0);
    SrsBatch { estimates, user, period_start, period_end }
}

/// `Q̂_j = Ĥ_j Ĥ_j^H / N_SRS`.
pub fn estimate_user_covariance(batch: &SrsBatch) -> SpatialCovariance {
    let n = batch.n_srs().max(1) as f64;
    let factor = &batch.estimates * real(1.0 / n.sqrt());
    SpatialCovariance::from_factor(factor, CovarianceKind::PerUserEstimate)
}

/// `Q_j = Σ_p |g_p|^2 a_p a_p^H`, the expectation over independent path phases.
pub fn true_user_covariance(link: &UserLink, geom: &ArrayGeometry) -> SpatialCovariance {
    let mut factor = CMat::zeros(geom.n_rx(), link.paths.len());
    for (p, path) in link.paths.iter().enumerate() {
        let a = steering_vector(geom, path.azimuth, path.elevation) * real(path.gain.norm());
        factor.set_column(p, &a);
    }
    SpatialCovariance::from_factor(factor, CovarianceKind::PerUserTrue)
}

/// `Q̂ = I + Σ_j α_j Q̂_j`.
pub fn aggregate_covariance(n_rx: usize, estimates: &[&SpatialCovariance], alphas: &[f64]) -> Result<SpatialCovariance> {
    if estimates.len() != alphas.len() {
        return Err(LtbfError::DimensionMismatch(format!(
            "{} covariances for {} alphas",
            estimates.len(),
            alphas.len()
        )));
    }
    let mut q = identity(n_rx);
    for (qj, &a) in estimates.iter().zip(alphas) {
        if qj.dim() != n_rx {
            return Err(LtbfError::DimensionMismatch(format!("{}x{} covariance in {n_rx}-antenna aggregate", qj.dim(), qj.dim())));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(LtbfError::InvalidParameter(format!("alpha {a}")));
        }
        q += &qj.matrix * real(a);
    }
    Ok(SpatialCovariance { matrix: hermitian_part(&q), kind: CovarianceKind::Aggregate, factor: None })
}

/// `R_i = Q − α_i Q_i`.
pub fn interference_covariance(q: &SpatialCovariance, qi: &SpatialCovariance, alpha_i: f64) -> Result<SpatialCovariance> {
    if q.kind != CovarianceKind::Aggregate {
        return Err(LtbfError::InvalidParameter(format!("expected an aggregate covariance, got {:?}", q.kind)));
    }
    if q.dim() != qi.dim() {
        return Err(LtbfError::DimensionMismatch(format!("aggregate {} vs user {}", q.dim(), qi.dim())));
    }
    let r = hermitian_part(&(&q.matrix - &qi.matrix * real(alpha_i)));
    let min = HermitianEigen::new(&r).min();
    if min < 1.0 - 1e-6 {
        return Err(LtbfError::InconsistentInterference(min));
    }
    Ok(SpatialCovariance { matrix: r, kind: CovarianceKind::Interference, factor: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelScenario, Path};
    use crate::linalg::{c, hermitian_eigenvalues};
    use crate::rng;

    fn static_link() -> UserLink {
        UserLink {
            paths: vec![Path { gain: c(0.6, 0.8), azimuth: 0.2, elevation: -0.1, doppler_hz: 0.0, delay_s: 0.0 }],
            alpha: 1.0,
            n_streams: 1,
            distance_m: 200.0,
            subcarrier_spacing_hz: 60e3,
        }
    }

    #[test]
    fn noiseless_static_sounding_repeats_columns() {
        let g = ArrayGeometry::new(4, 2).unwrap();
        let times = srs_times(0.0, 0.01, 8);
        let b = simulate_srs(&static_link(), &g, 0, &times, 1024, 0.0, &mut rng::master(1));
        assert_eq!(b.n_srs(), 8);
        for t in 1..8 {
            assert!((b.estimates.column(t) - b.estimates.column(0)).norm() < 1e-12);
        }
    }

    #[test]
    fn sounding_is_deterministic() {
        let g = ArrayGeometry::new(4, 4).unwrap();
        let link = crate::channel::draw_user(&mut rng::master(4), &ChannelScenario::default());
        let times = srs_times(0.0, 0.01, 8);
        let a = simulate_srs(&link, &g, 0, &times, 1024, 0.3, &mut rng::master(2));
        let b = simulate_srs(&link, &g, 0, &times, 1024, 0.3, &mut rng::master(2));
        assert_eq!(a, b);
    }

    #[test]
    fn rank_one_estimate() {
        let h = crate::linalg::CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let est = CMat::from_fn(3, 4, |r, _| h[r]);
        let q = estimate_user_covariance(&SrsBatch { estimates: est, user: 0, period_start: 0.0, period_end: 0.0 });
        assert!((q.matrix - &h * h.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn identity_soundings_give_scaled_identity() {
        let q = estimate_user_covariance(&SrsBatch { estimates: CMat::identity(5, 5), user: 0, period_start: 0.0, period_end: 0.0 });
        assert!((q.matrix - CMat::identity(5, 5) * real(0.2)).norm() < 1e-14);
    }

    #[test]
    fn random_batch_rank_matches_srs_count() {
        let mut r = rng::master(3);
        let est = CMat::from_fn(64, 8, |_, _| complex_normal(&mut r, 1.0));
        let q = estimate_user_covariance(&SrsBatch { estimates: est, user: 0, period_start: 0.0, period_end: 0.0 });
        let eig = hermitian_eigenvalues(&q.matrix);
        let tol = 1e-10 * q.trace();
        let rank = eig.iter().filter(|&&l| l > tol).count();
        assert_eq!(rank, 8);
        assert!(eig[0] > -tol);
    }

    #[test]
    fn true_covariance_single_path() {
        let g = ArrayGeometry::new(4, 4).unwrap();
        let mut link = static_link();
        link.paths[0].gain = c(1.0, 0.0);
        let q = true_user_covariance(&link, &g);
        let a = steering_vector(&g, 0.2, -0.1);
        assert!((q.matrix.clone() - &a * a.adjoint()).norm() < 1e-12);
        assert!((q.trace() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_equal_paths_give_equal_eigenvalues() {
        // On a 2-element half-wavelength array, az = 0 and az = π/2 give
        // [1, 1] and [1, -1], which are orthogonal.
        let g = ArrayGeometry::new(2, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let link = UserLink {
            paths: vec![
                Path { gain: c(s, 0.0), azimuth: 0.0, elevation: 0.0, doppler_hz: 0.0, delay_s: 0.0 },
                Path { gain: c(0.0, s), azimuth: std::f64::consts::FRAC_PI_2, elevation: 0.0, doppler_hz: 0.0, delay_s: 0.0 },
            ],
            ..static_link()
        };
        let eig = hermitian_eigenvalues(&true_user_covariance(&link, &g).matrix);
        assert!((eig[0] - eig[1]).abs() < 1e-12);
        assert!((eig[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn true_covariance_matches_random_phase_average() {
        // Monte Carlo oracle: average H H^H over independent uniform path phases.
        let g = ArrayGeometry::new(4, 4).unwrap();
        let sc = ChannelScenario { paths_min: 4, paths_max: 4, angle_spread_deg: 15.0, ..Default::default() };
        let mut r = rng::master(21);
        let link = crate::channel::draw_user(&mut r, &sc);
        let q = true_user_covariance(&link, &g);
        let draws = 10_000;
        let mut acc = CMat::zeros(16, 16);
        for _ in 0..draws {
            let mut h = crate::linalg::CVec::zeros(16);
            for p in &link.paths {
                let phase: f64 = r.random_range(0.0..std::f64::consts::TAU);
                h += steering_vector(&g, p.azimuth, p.elevation) * (p.gain * Complex64::from_polar(1.0, phase));
            }
            acc += &h * h.adjoint();
        }
        acc /= real(draws as f64);
        let rel = (acc - &q.matrix).norm() / q.matrix.norm();
        assert!(rel < 0.03, "relative Frobenius error {rel}");
    }

    #[test]
    fn aggregate_cases() {
        let empty = aggregate_covariance(3, &[], &[]).unwrap();
        assert_eq!(empty.matrix, CMat::identity(3, 3));
        let eye = SpatialCovariance::identity(3, CovarianceKind::PerUserEstimate);
        let two = aggregate_covariance(3, &[&eye], &[1.0]).unwrap();
        assert!((two.matrix - CMat::identity(3, 3) * real(2.0)).norm() < 1e-15);
        let other = SpatialCovariance::identity(4, CovarianceKind::PerUserEstimate);
        assert!(aggregate_covariance(3, &[&other], &[1.0]).is_err());
        assert!(aggregate_covariance(3, &[&eye], &[]).is_err());
    }

    #[test]
    fn aggregate_dominates_identity() {
        let mut r = rng::master(8);
        for _ in 0..20 {
            let users: Vec<SpatialCovariance> = (0..5)
                .map(|_| {
                    let f = CMat::from_fn(12, 3, |_, _| complex_normal(&mut r, 1.0));
                    SpatialCovariance::from_factor(f, CovarianceKind::PerUserEstimate)
                })
                .collect();
            let alphas: Vec<f64> = (0..5).map(|_| r.random_range(0.0..2.0)).collect();
            let refs: Vec<&SpatialCovariance> = users.iter().collect();
            let q = aggregate_covariance(12, &refs, &alphas).unwrap();
            assert!(hermitian_eigenvalues(&q.matrix)[0] >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn interference_identities() {
        let mut r = rng::master(6);
        let users: Vec<SpatialCovariance> = (0..3)
            .map(|_| {
                let f = CMat::from_fn(6, 2, |_, _| complex_normal(&mut r, 1.0));
                SpatialCovariance::from_factor(f, CovarianceKind::PerUserEstimate)
            })
            .collect();
        let alphas = [0.7, 1.3, 0.4];
        let refs: Vec<&SpatialCovariance> = users.iter().collect();
        let q = aggregate_covariance(6, &refs, &alphas).unwrap();
        for i in 0..3 {
            let ri = interference_covariance(&q, &users[i], alphas[i]).unwrap();
            let mut direct = CMat::identity(6, 6);
            for j in (0..3).filter(|&j| j != i) {
                direct += &users[j].matrix * real(alphas[j]);
            }
            assert!((ri.matrix - direct).norm() <= 1e-12 * q.matrix.norm());
        }

        let single = aggregate_covariance(6, &refs[..1], &alphas[..1]).unwrap();
        let r0 = interference_covariance(&single, &users[0], alphas[0]).unwrap();
        assert!((r0.matrix - CMat::identity(6, 6)).norm() < 1e-12);

        let eye = SpatialCovariance::identity(2, CovarianceKind::PerUserEstimate);
        let q2 = aggregate_covariance(2, &[&eye, &eye], &[1.0, 1.0]).unwrap();
        let r1 = interference_covariance(&q2, &eye, 1.0).unwrap();
        assert!((r1.matrix - CMat::identity(2, 2) * real(2.0)).norm() < 1e-14);

        // Own term larger than what the aggregate contains.
        assert!(matches!(interference_covariance(&q2, &eye, 5.0), Err(LtbfError::InconsistentInterference(_))));
        assert!(interference_covariance(&eye, &eye, 1.0).is_err());
    }

    #[test]
    fn psd_repair_clamps_negative_eigenvalues() {
        let m = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![real(2.0), real(-1e-3)]));
        let q = SpatialCovariance::from_data(&m, CovarianceKind::PerUserEstimate).unwrap();
        let eig = hermitian_eigenvalues(&q.matrix);
        assert!(eig[0].abs() < 1e-15);
        assert!((eig[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 3.0), c(4.0, -1.0)]);
        let j = MatrixJson::from_matrix(&m);
        assert_eq!(j.data[..4], [1.0, 0.5, -2.0, 0.0]);
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }
}
