#![allow(dead_code)]

use cellfree_coexist::config::{RawConfig, SimConfig};
use cellfree_coexist::scenario::{GeometryConfig, NetworkScenario, Placement, ServiceClass};
use cellfree_coexist::CMat;
use nalgebra::DMatrix;
use rand::Rng;

/// Scenario with random large-scale gains (log-uniform over 60 dB), single
/// antennas and a random subset of URLLC users. Pilots and clusters follow
/// the regular assignment rule.
pub fn random_beta_scenario<R: Rng>(rng: &mut R, l_n: usize, k_n: usize, tau_p: usize, k_u: usize) -> NetworkScenario {
    let beta = DMatrix::from_fn(k_n, l_n, |_, _| 10f64.powf(-6.0 - 6.0 * rng.random::<f64>()));
    let mut service = vec![ServiceClass::Embb; k_n];
    let mut picked = 0;
    while picked < k_u.min(k_n) {
        let k = rng.random_range(0..k_n);
        if service[k] == ServiceClass::Embb {
            service[k] = ServiceClass::Urllc;
            picked += 1;
        }
    }
    let corr = (0..k_n * l_n)
        .map(|i| CMat::from_element(1, 1, cellfree_coexist::linalg::c64(beta[(i / l_n, i % l_n)], 0.0)))
        .collect();
    let geometry = GeometryConfig {
        num_aps: l_n,
        antennas: 1,
        num_ues: k_n,
        urllc_fraction: k_u as f64 / k_n as f64,
        side_km: 1.0,
        ap_height_m: 10.0,
        ue_height_m: 1.5,
        asd_deg: 15.0,
    };
    let placement = Placement {
        ap_pos: vec![[0.0, 0.0]; l_n],
        ue_pos: vec![[0.0, 0.0]; k_n],
        service,
        degenerate_urllc: false,
    };
    NetworkScenario::from_parts(geometry, tau_p, placement, beta, corr)
}

/// Small but complete configuration for fast end-to-end runs.
pub fn small_raw_config() -> RawConfig {
    RawConfig::from_json(
        r#"{
            "num_aps": 16,
            "antennas_per_ap": 2,
            "num_ues": 8,
            "urllc_fraction": 0.25,
            "side_km": 0.5,
            "tau_p": 4,
            "n_drops": 2,
            "n_blocks": 10,
            "n_norm_blocks": 20,
            "master_seed": 11
        }"#,
    )
    .unwrap()
}

pub fn small_config() -> SimConfig {
    SimConfig::from_raw(&small_raw_config()).unwrap()
}

/// Worst-case estimator calibration errors over every served pair of one
/// drop of `cfg`, from `blocks` independent channel and pilot-noise draws.
/// Returns `max ||E[h_hat h_hat^H] + C - R||_F / ||R||_F` and
/// `max |E[h_hat (h - h_hat)^H]|_ij / beta`.
pub fn calibration_errors(cfg: &SimConfig, blocks: usize, seed: u64) -> (f64, f64) {
    use cellfree_coexist::channel::{ChannelBlock, EstimationStats, UplinkConfig};
    use cellfree_coexist::rng::{rng_from_seed, SeedLineage};

    let lineage = SeedLineage::new(seed);
    let s = NetworkScenario::generate(&cfg.geometry, cfg.tau_p, &lineage, 0);
    let uplink = UplinkConfig { pilot_power_w: cfg.p_ul_w, noise_w: cfg.noise_w, tau_p: cfg.tau_p };
    let stats = EstimationStats::new(&s, &uplink);
    let m = s.antennas();
    let mut est_cov = vec![CMat::zeros(m, m); s.pairs.len()];
    let mut cross = vec![CMat::zeros(m, m); s.pairs.len()];
    let mut ch_rng = rng_from_seed(seed ^ 0xA5A5);
    let mut noise_rng = rng_from_seed(seed ^ 0x5A5A);
    for _ in 0..blocks {
        let block = ChannelBlock::draw(&s, &stats, &mut ch_rng, &mut noise_rng);
        for (p, &(k, l)) in s.pairs.iter().enumerate() {
            let h_hat = block.estimate(&s, k, l).unwrap();
            let err = block.channel(k, l) - &h_hat;
            est_cov[p] += &h_hat * h_hat.adjoint();
            cross[p] += &h_hat * err.adjoint();
        }
    }
    let n = blocks as f64;
    let mut worst_cov: f64 = 0.0;
    let mut worst_cross: f64 = 0.0;
    for (p, &(k, l)) in s.pairs.iter().enumerate() {
        let r = s.corr(k, l);
        let resid = est_cov[p].unscale(n) + &stats.error_cov[p] - r;
        worst_cov = worst_cov.max(resid.norm() / r.norm());
        let beta = s.beta[(k, l)];
        for z in cross[p].unscale(n).iter() {
            worst_cross = worst_cross.max(z.norm() / beta);
        }
    }
    (worst_cov, worst_cross)
}
