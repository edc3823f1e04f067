//! Small-scale fading realizations and pilot-based MMSE channel estimation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_inverse, hermitian_sqrt, CMat, CVec, C64};
use crate::scenario::NetworkScenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkConfig {
    /// Pilot (and uplink data) power of every UE, in W.
    pub pilot_power_w: f64,
    /// Uplink receiver noise power, in W.
    pub noise_w: f64,
    pub tau_p: usize,
}

/// Draws a `CN(0, 1)` sample.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Per-scenario quantities of the estimator that do not depend on the
/// fading realization: correlation square roots, inverted pilot-observation
/// covariances, estimation filters and error covariances.
#[derive(Debug, Clone)]
pub struct EstimationStats {
    /// `R^{1/2}` per `(k, l)`, row-major `K x L`.
    pub r_sqrt: Vec<CMat>,
    /// `Psi^{-1}` per `(pilot, AP)`, indexed `l * tau_p + t`.
    pub psi_inv: Vec<CMat>,
    /// `sqrt(p tau_p) R Psi^{-1}` per served pair.
    pub filter: Vec<CMat>,
    /// Error covariance `C = R - p tau_p R Psi^{-1} R` per served pair.
    pub error_cov: Vec<CMat>,
    pub uplink: UplinkConfig,
}

impl EstimationStats {
    pub fn new(scenario: &NetworkScenario, uplink: &UplinkConfig) -> Self {
        let k_n = scenario.num_ues();
        let l_n = scenario.num_aps();
        let m = scenario.antennas();
        let tau_p = scenario.tau_p;
        assert!(uplink.noise_w > 0.0, "uplink noise must be positive");
        let p_tau = uplink.pilot_power_w * tau_p as f64;

        let r_sqrt = scenario.corr.iter().map(hermitian_sqrt).collect();

        let mut psi_inv = Vec::with_capacity(l_n * tau_p);
        for l in 0..l_n {
            for t in 0..tau_p {
                let mut psi = CMat::identity(m, m).scale(uplink.noise_w);
                for i in (0..k_n).filter(|&i| scenario.assoc.pilot[i] == t) {
                    psi += scenario.corr(i, l).scale(p_tau);
                }
                psi_inv.push(hermitian_inverse(&psi));
            }
        }

        let mut filter = Vec::with_capacity(scenario.pairs.len());
        let mut error_cov = Vec::with_capacity(scenario.pairs.len());
        for &(k, l) in &scenario.pairs {
            let r = scenario.corr(k, l);
            let pinv = &psi_inv[l * tau_p + scenario.assoc.pilot[k]];
            let r_pinv = r * pinv;
            let c = r - (&r_pinv * r).scale(p_tau);
            filter.push(r_pinv.scale(p_tau.sqrt()));
            error_cov.push((&c + c.adjoint()).scale(0.5));
        }

        EstimationStats {
            r_sqrt,
            psi_inv,
            filter,
            error_cov,
            uplink: *uplink,
        }
    }
}

/// One coherence block: true channels and the estimates held by the APs.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    /// Per AP, an `M x K` matrix whose column `k` is `h_kl`.
    pub h: Vec<CMat>,
    /// Per AP, an `M x |U_l|` matrix with the estimates of the served UEs,
    /// columns in the order of `scenario.pairs_of_ap[l]`.
    pub h_hat: Vec<CMat>,
}

impl ChannelBlock {
    pub fn draw<R: Rng + ?Sized>(
        scenario: &NetworkScenario,
        stats: &EstimationStats,
        channel_rng: &mut R,
        noise_rng: &mut R,
    ) -> Self {
        let h = realize_channels(scenario, stats, channel_rng);
        let h_hat = mmse_estimate(&h, scenario, stats, noise_rng);
        ChannelBlock { h, h_hat }
    }

    /// True channel `h_kl`.
    pub fn channel(&self, k: usize, l: usize) -> CVec {
        self.h[l].column(k).into_owned()
    }

    /// Estimate `h_hat_kl` if AP `l` serves UE `k`.
    pub fn estimate(&self, scenario: &NetworkScenario, k: usize, l: usize) -> Option<CVec> {
        let p = scenario.pair_index(k, l)?;
        let col = p - scenario.pairs_of_ap[l].start;
        Some(self.h_hat[l].column(col).into_owned())
    }
}

/// Draws `h_kl = R_kl^{1/2} e` with `e ~ CN(0, I_M)` for every `(k, l)`.
pub fn realize_channels<R: Rng + ?Sized>(
    scenario: &NetworkScenario,
    stats: &EstimationStats,
    rng: &mut R,
) -> Vec<CMat> {
    let k_n = scenario.num_ues();
    let l_n = scenario.num_aps();
    let m = scenario.antennas();
    let mut h = vec![CMat::zeros(m, k_n); l_n];
    let mut e = CVec::zeros(m);
    for k in 0..k_n {
        for (l, hl) in h.iter_mut().enumerate() {
            for z in e.iter_mut() {
                *z = complex_normal(rng);
            }
            let s = &stats.r_sqrt[k * l_n + l];
            let mut col = hl.column_mut(k);
            col.gemv(C64::new(1.0, 0.0), s, &e, C64::new(0.0, 0.0));
        }
    }
    h
}

/// MMSE estimates of the served channels from the shared pilot
/// observations `y_tl = sum_{i in P_t} sqrt(p tau_p) h_il + n`, with
/// `n ~ CN(0, sigma^2 I_M)`.
pub fn mmse_estimate<R: Rng + ?Sized>(
    h: &[CMat],
    scenario: &NetworkScenario,
    stats: &EstimationStats,
    rng: &mut R,
) -> Vec<CMat> {
    let k_n = scenario.num_ues();
    let m = scenario.antennas();
    let tau_p = scenario.tau_p;
    let ul = &stats.uplink;
    let amp = (ul.pilot_power_w * tau_p as f64).sqrt();
    let noise_amp = ul.noise_w.sqrt();
    let mut out = Vec::with_capacity(h.len());
    for (l, hl) in h.iter().enumerate() {
        let mut y = vec![CVec::zeros(m); tau_p];
        for yt in y.iter_mut() {
            for z in yt.iter_mut() {
                *z = complex_normal(rng) * noise_amp;
            }
        }
        for i in 0..k_n {
            y[scenario.assoc.pilot[i]].axpy(C64::new(amp, 0.0), &hl.column(i), C64::new(1.0, 0.0));
        }
        let range = scenario.pairs_of_ap[l].clone();
        let mut est = CMat::zeros(m, range.len());
        for (col, p) in range.enumerate() {
            let k = scenario.pairs[p].0;
            let v = &stats.filter[p] * &y[scenario.assoc.pilot[k]];
            est.set_column(col, &v);
        }
        out.push(est);
    }
    out
}
