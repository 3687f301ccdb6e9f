use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, ChannelScenario};
use crate::error::{LtbfError, Result};

/// Scenario and accounting parameters, read from a flat TOML file.
///
/// Key names follow the usual link-budget table: `f_c` (GHz), `N_SRS`,
/// `N_UE`, `T_LT_ms`, `C_I`, and so on. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Carrier frequency in GHz.
    pub f_c: f64,
    pub n_h: usize,
    pub n_v: usize,
    pub spacing: f64,
    pub r: usize,
    #[serde(rename = "N_SRS")]
    pub n_srs: usize,
    /// Polynomial coefficient counts to evaluate.
    pub d: Vec<usize>,
    #[serde(rename = "C_I")]
    pub c_i: f64,
    #[serde(rename = "N_UE")]
    pub n_ue: usize,
    #[serde(rename = "N_s")]
    pub n_s: usize,
    #[serde(rename = "T_LT_ms")]
    pub t_lt_ms: f64,
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    pub n_fft: usize,
    pub scs_khz: f64,
    pub v_ue_max_kmh: f64,
    pub d_ue_min_m: f64,
    pub d_ue_max_m: f64,
    pub h_gnb_m: f64,
    pub h_ue_m: f64,
    pub p_ue_max_dbm: f64,
    pub nf_gnb_db: f64,
    pub paths_min: usize,
    pub paths_max: usize,
    pub angle_spread_deg: f64,
    pub elevation_spread_deg: f64,
    pub sector_half_width_deg: f64,
    pub min_separation_deg: f64,
    pub delay_max_us: f64,
    /// SRS channel-estimation SNR in dB; `inf` gives noiseless soundings.
    pub srs_snr_db: f64,
    /// Apply the max-power outage rule; when off every user is connected.
    pub outage: bool,
    pub n_trials: usize,
    pub seed: u64,
    pub t_coh_ms: f64,
    /// Resource-element (OFDM symbol) duration; derived from `scs_khz` when absent.
    pub t_re_us: Option<f64>,
    pub certificate_grid: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            f_c: 3.5,
            n_h: 16,
            n_v: 16,
            spacing: 0.5,
            r: 2,
            n_srs: 8,
            d: vec![2, 3],
            c_i: 2.0,
            n_ue: 10,
            n_s: 1,
            t_lt_ms: 10.0,
            snr_min_db: -6.0,
            snr_max_db: 3.0,
            n_fft: 1024,
            scs_khz: 60.0,
            v_ue_max_kmh: 100.0,
            d_ue_min_m: 100.0,
            d_ue_max_m: 2000.0,
            h_gnb_m: 40.0,
            h_ue_m: 1.5,
            p_ue_max_dbm: 26.0,
            nf_gnb_db: 2.0,
            paths_min: 1,
            paths_max: 8,
            angle_spread_deg: 5.0,
            elevation_spread_deg: 2.0,
            sector_half_width_deg: 60.0,
            min_separation_deg: 0.0,
            delay_max_us: 1.0,
            srs_snr_db: 10.0,
            outage: true,
            n_trials: 100,
            seed: 1,
            t_coh_ms: 0.5,
            t_re_us: None,
            certificate_grid: 2000,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LtbfError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LtbfError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LtbfError::Config(m));
        if self.n_h == 0 || self.n_v == 0 {
            return bad(format!("array {}x{}", self.n_h, self.n_v));
        }
        if self.r == 0 || self.r > self.n_rx() {
            return bad(format!("rank r = {} for {} antennas", self.r, self.n_rx()));
        }
        if self.n_srs == 0 || self.n_ue == 0 || self.n_trials == 0 || self.n_fft == 0 {
            return bad("N_SRS, N_UE, n_trials and n_fft must be positive".into());
        }
        if self.n_s != 1 {
            return bad(format!("N_s = {}: the SINR harness is single-stream", self.n_s));
        }
        if self.d.is_empty() || self.d.contains(&0) {
            return bad(format!("polynomial degree list {:?}", self.d));
        }
        if self.snr_min_db > self.snr_max_db {
            return bad(format!("snr range [{}, {}]", self.snr_min_db, self.snr_max_db));
        }
        let positive = [
            ("f_c", self.f_c),
            ("spacing", self.spacing),
            ("T_LT_ms", self.t_lt_ms),
            ("scs_khz", self.scs_khz),
            ("t_coh_ms", self.t_coh_ms),
            ("C_I", self.c_i),
            ("d_ue_min_m", self.d_ue_min_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if let Some(t) = self.t_re_us {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("t_re_us = {t}"));
            }
        }
        if self.certificate_grid < crate::polyinv::MIN_CERTIFICATE_GRID {
            return bad(format!("certificate_grid = {}", self.certificate_grid));
        }
        self.channel_scenario().validate().map_err(|e| LtbfError::Config(e.to_string()))
    }

    pub fn n_rx(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::with_spacing(self.n_h, self.n_v, self.spacing)
    }

    pub fn t_lt_s(&self) -> f64 {
        self.t_lt_ms * 1e-3
    }

    pub fn t_coh_s(&self) -> f64 {
        self.t_coh_ms * 1e-3
    }

    /// OFDM symbol duration: 14 symbols per slot, `scs / 15 kHz` slots per ms.
    pub fn t_re_s(&self) -> f64 {
        match self.t_re_us {
            Some(t) => t * 1e-6,
            None => 1.0 / (14.0 * 1000.0 * self.scs_khz / 15.0),
        }
    }

    /// Resource elements per second across the FFT.
    pub fn re_rate(&self) -> f64 {
        self.n_fft as f64 / self.t_re_s()
    }

    pub fn max_degree(&self) -> usize {
        self.d.iter().copied().max().unwrap_or(1)
    }

    pub fn channel_scenario(&self) -> ChannelScenario {
        ChannelScenario {
            paths_min: self.paths_min,
            paths_max: self.paths_max,
            angle_spread_deg: self.angle_spread_deg,
            elevation_spread_deg: self.elevation_spread_deg,
            sector_half_width_deg: self.sector_half_width_deg,
            distance_min_m: self.d_ue_min_m,
            distance_max_m: self.d_ue_max_m,
            v_max_kmh: self.v_ue_max_kmh,
            carrier_hz: self.f_c * 1e9,
            subcarrier_spacing_hz: self.scs_khz * 1e3,
            delay_max_s: self.delay_max_us * 1e-6,
            bs_height_m: self.h_gnb_m,
            ue_height_m: self.h_ue_m,
            n_streams: self.n_s,
        }
    }
}
