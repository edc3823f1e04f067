//! Maximum-ratio and local partial MMSE precoding.

use serde::{Deserialize, Serialize};

use crate::channel::EstimationStats;
use crate::linalg::{CMat, C64};
use crate::scenario::NetworkScenario;
use crate::stats::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrecoderScheme {
    #[serde(rename = "mr")]
    Mr,
    #[serde(rename = "lp-mmse")]
    LpMmse,
}

impl PrecoderScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrecoderScheme::Mr => "mr",
            PrecoderScheme::LpMmse => "lp-mmse",
        }
    }
}

impl std::str::FromStr for PrecoderScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mr" => Ok(PrecoderScheme::Mr),
            "lp-mmse" => Ok(PrecoderScheme::LpMmse),
            other => Err(format!("unknown precoder `{other}`")),
        }
    }
}

/// Precoding vectors of one coherence block, laid out like
/// [`ChannelBlock::h_hat`](crate::channel::ChannelBlock): per AP an
/// `M x |U_l|` matrix with one column per served UE.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub scheme: PrecoderScheme,
    pub w: Vec<CMat>,
}

impl PrecoderSet {
    pub fn vector(&self, scenario: &NetworkScenario, k: usize, l: usize) -> Option<Vec<C64>> {
        let p = scenario.pair_index(k, l)?;
        let col = p - scenario.pairs_of_ap[l].start;
        Some(self.w[l].column(col).iter().copied().collect())
    }
}

/// `w = h_hat / |h_hat|`; zero-norm estimates give a null precoder.
pub fn mr_precoder(h_hat: &[CMat]) -> PrecoderSet {
    let w = h_hat
        .iter()
        .map(|est| {
            let mut w = est.clone();
            for mut col in w.column_iter_mut() {
                let n = col.norm();
                if n > 0.0 {
                    col.unscale_mut(n);
                } else {
                    log::debug!("zero-norm channel estimate, MR precoder left null");
                    col.fill(C64::new(0.0, 0.0));
                }
            }
            w
        })
        .collect();
    PrecoderSet {
        scheme: PrecoderScheme::Mr,
        w,
    }
}

/// Deterministic part of the LP-MMSE design at each AP:
/// `p * sum_{i in U_l} C_il + sigma_ul^2 I`.
#[derive(Debug, Clone)]
pub struct LpMmseDesign {
    base: Vec<CMat>,
    power: f64,
}

impl LpMmseDesign {
    pub fn new(scenario: &NetworkScenario, stats: &EstimationStats) -> Self {
        let m = scenario.antennas();
        let p = stats.uplink.pilot_power_w;
        let base = scenario
            .pairs_of_ap
            .iter()
            .map(|range| {
                let mut b = CMat::identity(m, m).scale(stats.uplink.noise_w);
                for pi in range.clone() {
                    b += stats.error_cov[pi].scale(p);
                }
                b
            })
            .collect();
        LpMmseDesign { base, power: p }
    }

    /// Unnormalized vectors
    /// `w_bar_kl = p (sum_{i in U_l} p (h_hat h_hat^H + C_il) + sigma^2 I)^{-1} h_hat_kl`.
    pub fn unnormalized(&self, h_hat: &[CMat]) -> Vec<CMat> {
        h_hat
            .iter()
            .zip(&self.base)
            .map(|(est, base)| {
                if est.ncols() == 0 {
                    return est.clone();
                }
                let a = base + (est * est.adjoint()).scale(self.power);
                let rhs = est.scale(self.power);
                match a.clone().cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => a.lu().solve(&rhs).expect("regularized matrix is invertible"),
                }
            })
            .collect()
    }
}

/// Per-pair `E[|w_bar|^2]` estimated over a dedicated ensemble of blocks.
#[derive(Debug, Clone)]
pub struct LpMmseNormalization {
    sums: Vec<KahanSum>,
    blocks: usize,
}

impl LpMmseNormalization {
    pub fn new(num_pairs: usize) -> Self {
        LpMmseNormalization {
            sums: vec![KahanSum::default(); num_pairs],
            blocks: 0,
        }
    }

    pub fn add_block(&mut self, scenario: &NetworkScenario, w_bar: &[CMat]) {
        for (l, w) in w_bar.iter().enumerate() {
            let start = scenario.pairs_of_ap[l].start;
            for (col, c) in w.column_iter().enumerate() {
                self.sums[start + col].add(c.norm_squared());
            }
        }
        self.blocks += 1;
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Mean squared norm of pair `p`.
    pub fn mean_sq_norm(&self, p: usize) -> f64 {
        self.sums[p].value() / self.blocks.max(1) as f64
    }

    /// Scales `w_bar` to unit average power.
    pub fn apply(&self, scenario: &NetworkScenario, mut w_bar: Vec<CMat>) -> PrecoderSet {
        for (l, w) in w_bar.iter_mut().enumerate() {
            let start = scenario.pairs_of_ap[l].start;
            for (col, mut c) in w.column_iter_mut().enumerate() {
                let e = self.mean_sq_norm(start + col);
                if e > 0.0 {
                    c.unscale_mut(e.sqrt());
                }
            }
        }
        PrecoderSet {
            scheme: PrecoderScheme::LpMmse,
            w: w_bar,
        }
    }
}

/// LP-MMSE precoders for one block, normalized with `norm`.
pub fn lpmmse_precoder(
    scenario: &NetworkScenario,
    design: &LpMmseDesign,
    h_hat: &[CMat],
    norm: &LpMmseNormalization,
) -> PrecoderSet {
    norm.apply(scenario, design.unnormalized(h_hat))
}
