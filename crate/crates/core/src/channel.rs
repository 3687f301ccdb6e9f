//! Synthetic clustered multipath channels for a uniform planar array.
//!
//! Each user sees a handful of plane-wave paths clustered around a random
//! boresight. Path gains are normalized to unit total power; large-scale
//! gain is carried by the user's transmit SNR `alpha`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LtbfError, Result};
use crate::linalg::{CMat, CVec};
use crate::rng::complex_normal;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_h: usize,
    pub n_v: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn new(n_h: usize, n_v: usize) -> Result<Self> {
        Self::with_spacing(n_h, n_v, 0.5)
    }

    pub fn with_spacing(n_h: usize, n_v: usize, spacing: f64) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(LtbfError::InvalidParameter(format!("array {n_h}x{n_v} has no elements")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LtbfError::InvalidParameter(format!("element spacing {spacing}")));
        }
        Ok(Self { n_h, n_v, spacing })
    }

    pub fn n_rx(&self) -> usize {
        self.n_h * self.n_v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub gain: Complex64,
    pub azimuth: f64,
    pub elevation: f64,
    pub doppler_hz: f64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserLink {
    pub paths: Vec<Path>,
    /// Transmit SNR `E_x / (N_0 N_s)`, linear.
    pub alpha: f64,
    pub n_streams: usize,
    pub distance_m: f64,
    pub subcarrier_spacing_hz: f64,
}

impl UserLink {
    pub fn validate(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(LtbfError::InvalidParameter("user link without paths".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(LtbfError::InvalidParameter(format!("alpha {}", self.alpha)));
        }
        if self.n_streams == 0 {
            return Err(LtbfError::InvalidParameter("zero streams".into()));
        }
        Ok(())
    }

    /// Path with the largest `|g|^2`.
    pub fn strongest_path_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N_rx x N_s`.
    pub matrix: CMat,
    pub time: f64,
    pub subcarrier: usize,
}

impl ChannelRealization {
    /// First stream column, the channel vector for single-stream users.
    pub fn vector(&self) -> CVec {
        self.matrix.column(0).into_owned()
    }
}

/// Parameters of the random user drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelScenario {
    pub paths_min: usize,
    pub paths_max: usize,
    /// Laplacian scale of the per-path azimuth offset from the boresight.
    pub angle_spread_deg: f64,
    pub elevation_spread_deg: f64,
    /// Boresights are uniform in `[-w, w]`.
    pub sector_half_width_deg: f64,
    pub distance_min_m: f64,
    pub distance_max_m: f64,
    pub v_max_kmh: f64,
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub delay_max_s: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub n_streams: usize,
}

impl Default for ChannelScenario {
    fn default() -> Self {
        Self {
            paths_min: 1,
            paths_max: 8,
            angle_spread_deg: 5.0,
            elevation_spread_deg: 2.0,
            sector_half_width_deg: 60.0,
            distance_min_m: 100.0,
            distance_max_m: 2000.0,
            v_max_kmh: 100.0,
            carrier_hz: 3.5e9,
            subcarrier_spacing_hz: 60e3,
            delay_max_s: 1e-6,
            bs_height_m: 40.0,
            ue_height_m: 1.5,
            n_streams: 1,
        }
    }
}

impl ChannelScenario {
    pub fn validate(&self) -> Result<()> {
        if self.paths_min == 0 || self.paths_min > self.paths_max {
            return Err(LtbfError::InvalidParameter(format!(
                "path count range [{}, {}]",
                self.paths_min, self.paths_max
            )));
        }
        if !(self.distance_min_m > 0.0 && self.distance_min_m <= self.distance_max_m) {
            return Err(LtbfError::InvalidParameter("distance range".into()));
        }
        if self.v_max_kmh < 0.0 || self.delay_max_s < 0.0 || self.angle_spread_deg < 0.0 {
            return Err(LtbfError::InvalidParameter("negative spread, speed or delay".into()));
        }
        if self.n_streams == 0 {
            return Err(LtbfError::InvalidParameter("zero streams".into()));
        }
        Ok(())
    }

    /// Maximum Doppler shift for a UE moving at `speed_mps`.
    pub fn doppler_max_hz(&self, speed_mps: f64) -> f64 {
        speed_mps * self.carrier_hz / SPEED_OF_LIGHT
    }
}

/// Planar-array response; element `(ih, iv)` sits at index `iv * n_h + ih`.
pub fn steering_vector(geom: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVec {
    let u = azimuth.sin() * elevation.cos();
    let v = elevation.sin();
    CVec::from_fn(geom.n_rx(), |idx, _| {
        let ih = (idx % geom.n_h) as f64;
        let iv = (idx / geom.n_h) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * geom.spacing * (ih * u + iv * v))
    })
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.random_range(-0.5..0.5);
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Draws one user around a random boresight.
pub fn draw_user<R: Rng + ?Sized>(rng: &mut R, scenario: &ChannelScenario) -> UserLink {
    let w = scenario.sector_half_width_deg.to_radians();
    let boresight = if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 };
    draw_user_at(rng, scenario, boresight)
}

/// Draws one user whose path cluster is centred on `boresight` (radians).
pub fn draw_user_at<R: Rng + ?Sized>(rng: &mut R, scenario: &ChannelScenario, boresight: f64) -> UserLink {
    let distance = if scenario.distance_max_m > scenario.distance_min_m {
        rng.random_range(scenario.distance_min_m..=scenario.distance_max_m)
    } else {
        scenario.distance_min_m
    };
    let el0 = -((scenario.bs_height_m - scenario.ue_height_m) / distance).atan();
    let n_paths = rng.random_range(scenario.paths_min..=scenario.paths_max);
    let speed = rng.random_range(0.0..=1.0) * scenario.v_max_kmh / 3.6;
    let f_max = scenario.doppler_max_hz(speed);
    let az_scale = scenario.angle_spread_deg.to_radians();
    let el_scale = scenario.elevation_spread_deg.to_radians();

    let mut paths: Vec<Path> = (0..n_paths)
        .map(|_| {
            let gain = complex_normal(rng, 1.0);
            let azimuth = boresight + laplacian(rng, az_scale);
            let elevation = el0 + laplacian(rng, el_scale);
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            let delay_s = rng.random_range(0.0..=1.0) * scenario.delay_max_s;
            Path { gain, azimuth, elevation, doppler_hz: f_max * theta.cos(), delay_s }
        })
        .collect();
    let power: f64 = paths.iter().map(|p| p.gain.norm_sqr()).sum();
    let scale = 1.0 / power.sqrt();
    for p in &mut paths {
        p.gain *= scale;
    }

    UserLink {
        paths,
        alpha: 1.0,
        n_streams: scenario.n_streams,
        distance_m: distance,
        subcarrier_spacing_hz: scenario.subcarrier_spacing_hz,
    }
}

/// Draws `n` users whose boresights are pairwise at least `min_separation`
/// radians apart (rejection sampling).
pub fn draw_users<R: Rng + ?Sized>(
    rng: &mut R,
    scenario: &ChannelScenario,
    n: usize,
    min_separation: f64,
) -> Result<Vec<UserLink>> {
    let w = scenario.sector_half_width_deg.to_radians();
    if min_separation > 0.0 && n > 1 && (n - 1) as f64 * min_separation > 2.0 * w {
        return Err(LtbfError::InvalidParameter(format!(
            "{n} users cannot be {:.1} deg apart in a +/-{:.1} deg sector",
            min_separation.to_degrees(),
            scenario.sector_half_width_deg
        )));
    }
    let mut boresights: Vec<f64> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while boresights.len() < n {
        attempts += 1;
        if attempts > 100_000 {
            return Err(LtbfError::InvalidParameter("could not place users with the requested separation".into()));
        }
        let b = if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 };
        if boresights.iter().all(|&o| (o - b).abs() >= min_separation) {
            boresights.push(b);
        }
    }
    Ok(boresights.into_iter().map(|b| draw_user_at(rng, scenario, b)).collect())
}

/// Channel matrix at `time` on `subcarrier`.
///
/// Stream `s` is excited by the paths with index `p ≡ s (mod N_s)`; for a
/// single stream every path feeds the one column.
pub fn channel_at(link: &UserLink, geom: &ArrayGeometry, time: f64, subcarrier: usize) -> ChannelRealization {
    let n_s = link.n_streams.max(1);
    let mut matrix = CMat::zeros(geom.n_rx(), n_s);
    let freq = subcarrier as f64 * link.subcarrier_spacing_hz;
    for (p, path) in link.paths.iter().enumerate() {
        let phase = 2.0 * PI * (path.doppler_hz * time - freq * path.delay_s);
        let coeff = path.gain * Complex64::from_polar(1.0, phase);
        let a = steering_vector(geom, path.azimuth, path.elevation);
        let mut col = matrix.column_mut(p % n_s);
        col.axpy(coeff, &a, Complex64::new(1.0, 0.0));
    }
    ChannelRealization { matrix, time, subcarrier }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    #[default]
    Gaussian,
    Qpsk,
}

/// One transmit vector with covariance `(energy / N_s) I`.
pub fn draw_symbols<R: Rng + ?Sized>(rng: &mut R, n_streams: usize, energy: f64, kind: SymbolKind) -> CVec {
    let per_stream = energy / n_streams as f64;
    CVec::from_fn(n_streams, |_, _| match kind {
        SymbolKind::Gaussian => complex_normal(rng, per_stream),
        SymbolKind::Qpsk => {
            let s = (per_stream / 2.0).sqrt();
            let re = if rng.random::<bool>() { s } else { -s };
            let im = if rng.random::<bool>() { s } else { -s };
            Complex64::new(re, im)
        }
    })
}

/// `y = Σ H_i x_i + w` with `w ~ CN(0, noise_std^2 I)`.
pub fn received_signal<R: Rng + ?Sized>(
    channels: &[ChannelRealization],
    symbols: &[CVec],
    noise_std: f64,
    n_rx: usize,
    rng: &mut R,
) -> Result<CVec> {
    if channels.len() != symbols.len() {
        return Err(LtbfError::DimensionMismatch(format!(
            "{} channels for {} symbol vectors",
            channels.len(),
            symbols.len()
        )));
    }
    let mut y = CVec::zeros(n_rx);
    for (h, x) in channels.iter().zip(symbols) {
        if h.matrix.nrows() != n_rx || h.matrix.ncols() != x.len() {
            return Err(LtbfError::DimensionMismatch(format!(
                "channel {}x{} against {} receive antennas and {} streams",
                h.matrix.nrows(),
                h.matrix.ncols(),
                n_rx,
                x.len()
            )));
        }
        y += &h.matrix * x;
    }
    if noise_std > 0.0 {
        let var = noise_std * noise_std;
        for v in y.iter_mut() {
            *v += complex_normal(rng, var);
        }
    }
    Ok(y)
}
