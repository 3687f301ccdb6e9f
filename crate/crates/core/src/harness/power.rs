use rand::Rng;

use crate::channel::{channel_at, ArrayGeometry, UserLink};
use crate::linalg::{db, from_db};

use super::config::ScenarioConfig;

/// Thermal noise density in dBm/Hz.
pub const NOISE_DENSITY_DBM_HZ: f64 = -174.0;

/// Urban-macro NLOS-like path loss in dB for a 3-D distance and carrier in GHz.
pub fn path_loss_db(distance_3d_m: f64, f_c_ghz: f64, ue_height_m: f64) -> f64 {
    13.54 + 39.08 * distance_3d_m.max(1.0).log10() + 20.0 * f_c_ghz.log10() - 0.6 * (ue_height_m - 1.5)
}

pub fn noise_power_dbm(cfg: &ScenarioConfig) -> f64 {
    NOISE_DENSITY_DBM_HZ + db(cfg.n_fft as f64 * cfg.scs_khz * 1e3) + cfg.nf_gnb_db
}

/// Best post-combining SNR (dB) the user can reach at full power: MRC on
/// its strongest path alone, with the array gain of `N_rx` antennas.
pub fn max_strongest_path_snr_db(link: &UserLink, cfg: &ScenarioConfig) -> f64 {
    let dz = cfg.h_gnb_m - cfg.h_ue_m;
    let d3 = (link.distance_m * link.distance_m + dz * dz).sqrt();
    let strongest = link.strongest_path_power();
    if strongest <= 0.0 {
        return f64::NEG_INFINITY;
    }
    cfg.p_ue_max_dbm - path_loss_db(d3, cfg.f_c, cfg.h_ue_m) - noise_power_dbm(cfg)
        + db(cfg.n_rx() as f64 * strongest)
}

/// Outage when even the full-power strongest-path SNR misses `snr_min_db`.
pub fn in_outage(link: &UserLink, cfg: &ScenarioConfig) -> bool {
    cfg.outage && max_strongest_path_snr_db(link, cfg) < cfg.snr_min_db
}

/// Sets `α_i` so that `α_i ‖h_i(t₀)‖²` hits a target drawn uniformly (dB) in
/// `snr_range`. A target above `cap_db[i]` is lowered to it. `None` marks a
/// zero-norm channel.
pub fn power_control<R: Rng + ?Sized>(
    links: &[UserLink],
    geom: &ArrayGeometry,
    rng: &mut R,
    snr_range: (f64, f64),
    t0: f64,
    subcarrier: usize,
    cap_db: Option<&[f64]>,
) -> Vec<Option<f64>> {
    links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let mut target = if snr_range.1 > snr_range.0 { rng.random_range(snr_range.0..=snr_range.1) } else { snr_range.0 };
            if let Some(cap) = cap_db {
                target = target.min(cap[i]).max(snr_range.0);
            }
            let g = channel_at(link, geom, t0, subcarrier).vector().norm_squared();
            (g > 0.0).then(|| from_db(target) / g)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_users, ChannelScenario, Path};
    use crate::linalg::c;
    use crate::rng;

    fn one_path_link() -> UserLink {
        UserLink {
            paths: vec![Path { gain: c(1.0, 0.0), azimuth: 0.2, elevation: -0.1, doppler_hz: 0.0, delay_s: 0.0 }],
            alpha: 1.0,
            n_streams: 1,
            distance_m: 500.0,
            subcarrier_spacing_hz: 60e3,
        }
    }

    #[test]
    fn zero_db_target_on_256_antennas() {
        let geom = ArrayGeometry::new(16, 16).unwrap();
        let mut r = rng::master(3);
        let a = power_control(&[one_path_link()], &geom, &mut r, (0.0, 0.0), 0.0, 0, None);
        assert!((a[0].unwrap() - 1.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn targets_inside_range_and_reproducible() {
        let geom = ArrayGeometry::new(8, 8).unwrap();
        let sc = ChannelScenario::default();
        let links = draw_users(&mut rng::master(9), &sc, 20, 0.0).unwrap();
        let a1 = power_control(&links, &geom, &mut rng::master(4), (-6.0, 3.0), 0.0, 5, None);
        let a2 = power_control(&links, &geom, &mut rng::master(4), (-6.0, 3.0), 0.0, 5, None);
        assert_eq!(a1, a2);
        for (link, a) in links.iter().zip(&a1) {
            let g = channel_at(link, &geom, 0.0, 5).vector().norm_squared();
            let snr = db(a.unwrap() * g);
            assert!((-6.0 - 1e-9..=3.0 + 1e-9).contains(&snr), "{snr}");
        }
    }

    #[test]
    fn zero_channel_is_flagged() {
        let geom = ArrayGeometry::new(2, 2).unwrap();
        let mut link = one_path_link();
        link.paths[0].gain = c(0.0, 0.0);
        let a = power_control(&[link], &geom, &mut rng::master(1), (-6.0, 3.0), 0.0, 0, None);
        assert_eq!(a, vec![None]);
    }

    #[test]
    fn far_users_drop_out() {
        let cfg = ScenarioConfig::default();
        let mut near = one_path_link();
        near.distance_m = 100.0;
        let mut far = one_path_link();
        far.distance_m = 1e5;
        assert!(!in_outage(&near, &cfg));
        assert!(in_outage(&far, &cfg));
        let off = ScenarioConfig { outage: false, ..Default::default() };
        assert!(!in_outage(&far, &off));
    }
}
