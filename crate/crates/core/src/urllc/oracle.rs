use rand::Rng;

use super::gid::{gid, UrllcLink};
use crate::channel::complex_normal;
use crate::stats::wilson_interval;

/// Monte-Carlo estimate of the RCUs tail probability with a Wilson 95%
/// interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub trials: u64,
}

/// Directly simulates `P[sum_n i_s(q_n, g q_n + z_n) <= ln((2^b - 1) / r)]`
/// with `q ~ CN(0,1)`, `z ~ CN(0, sigma^2)` and `r ~ U(0,1)`.
pub fn rcus_mc_oracle<R: Rng + ?Sized>(link: &UrllcLink, s: f64, n_trials: u64, rng: &mut R) -> OracleEstimate {
    let mut hits = 0u64;
    if link.b > 0 {
        let ln_m1 = link.rate_nats() * link.n_d as f64;
        let sigma = link.sigma2_eff.sqrt();
        let g = link.g_eff / sigma;
        let g_hat = link.g_hat / sigma;
        let sn = s * link.sigma2_eff;
        for _ in 0..n_trials {
            let mut total = 0.0;
            for _ in 0..link.n_d {
                let q = complex_normal(rng);
                let y = g * q + complex_normal(rng);
                total += gid(q, y, g_hat, sn);
            }
            let r: f64 = rng.random();
            if total <= ln_m1 - r.ln() {
                hits += 1;
            }
        }
    }
    let (lower, upper) = wilson_interval(hits, n_trials, 1.959_963_984_540_054);
    OracleEstimate {
        estimate: hits as f64 / n_trials.max(1) as f64,
        lower,
        upper,
        trials: n_trials,
    }
}
