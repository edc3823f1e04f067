use crate::linalg::C64;

/// One URLLC slot as seen by the decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrllcLink {
    /// Realized effective channel, power included.
    pub g_eff: C64,
    /// Mean effective channel assumed by the decoder.
    pub g_hat: C64,
    /// Interference plus noise variance (W).
    pub sigma2_eff: f64,
    /// Channel uses in the slot.
    pub n_d: usize,
    /// Payload in bits.
    pub b: u32,
}

impl UrllcLink {
    pub fn rate_nats(&self) -> f64 {
        rate_nats(self.b, self.n_d)
    }

    /// `1 / (sigma^2 + |g_hat|^2)`, the reference decoder parameter.
    pub fn s0(&self) -> f64 {
        1.0 / (self.sigma2_eff + self.g_hat.norm_sqr())
    }
}

/// Generalized information density in nats:
/// `-s|y - g_hat q|^2 + s|y|^2 / (1 + s|g_hat|^2) + ln(1 + s|g_hat|^2)`.
pub fn gid(q: C64, y: C64, g_hat: C64, s: f64) -> f64 {
    let sg = s * g_hat.norm_sqr();
    -s * (y - g_hat * q).norm_sqr() + s * y.norm_sqr() / (1.0 + sg) + sg.ln_1p()
}

/// `ln(2^b - 1) / n_d`; `-inf` for `b = 0`.
pub fn rate_nats(b: u32, n_d: usize) -> f64 {
    if b == 0 {
        return f64::NEG_INFINITY;
    }
    let ln2 = std::f64::consts::LN_2;
    (b as f64 * ln2 + (-(-(b as f64) * ln2).exp()).ln_1p()) / n_d as f64
}
