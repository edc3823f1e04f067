//! eMBB hardening-bound SINR and spectral efficiency.
//!
//! The effective gain `g_kip = h_{k,l}^H w_p` of receiver `k` through the
//! precoder of pair `p = (i, l)` is averaged over the evaluation blocks of a
//! drop. Gains through different APs are independent (channels, estimates
//! and precoders of distinct APs share no randomness), so
//!
//! `E|sum_j rho_ij g_kij|^2 = |sum_j rho_ij E g_kij|^2 + sum_j rho_ij^2 Var g_kij`,
//!
//! and storing one mean and one second moment per (receiver, pair) is enough
//! to evaluate the SINR of every slot power pattern.

use crate::channel::ChannelBlock;
use crate::coexistence::SlotPowers;
use crate::linalg::{CMat, C64};
use crate::precoder::PrecoderSet;
use crate::scenario::NetworkScenario;
use crate::stats::{ComplexSum, KahanSum};

/// `H_l^H W_l` per AP: row `k`, column = position of the pair in
/// `scenario.pairs_of_ap[l]`.
#[derive(Debug, Clone)]
pub struct BlockGains {
    pub per_ap: Vec<CMat>,
}

impl BlockGains {
    pub fn compute(block: &ChannelBlock, precoders: &PrecoderSet) -> Self {
        let per_ap = block.h.iter().zip(&precoders.w).map(|(h, w)| h.ad_mul(w)).collect();
        BlockGains { per_ap }
    }

    /// `g` of receiver `k` through pair `p`.
    #[inline]
    pub fn gain(&self, scenario: &NetworkScenario, k: usize, p: usize) -> C64 {
        let l = scenario.pairs[p].1;
        self.per_ap[l][(k, p - scenario.pairs_of_ap[l].start)]
    }
}

/// Running first and second moments of `g_kip` for every receiver and pair.
#[derive(Debug, Clone)]
pub struct GainStats {
    num_pairs: usize,
    mean: Vec<ComplexSum>,
    second: Vec<KahanSum>,
    samples: usize,
}

impl GainStats {
    pub fn new(num_ues: usize, num_pairs: usize) -> Self {
        GainStats {
            num_pairs,
            mean: vec![ComplexSum::default(); num_ues * num_pairs],
            second: vec![KahanSum::default(); num_ues * num_pairs],
            samples: 0,
        }
    }

    pub fn add_block(&mut self, scenario: &NetworkScenario, gains: &BlockGains) {
        for (l, g) in gains.per_ap.iter().enumerate() {
            let start = scenario.pairs_of_ap[l].start;
            for col in 0..g.ncols() {
                let p = start + col;
                for k in 0..g.nrows() {
                    let z = g[(k, col)];
                    let idx = k * self.num_pairs + p;
                    self.mean[idx].add(z);
                    self.second[idx].add(z.norm_sqr());
                }
            }
        }
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &GainStats) {
        assert_eq!(self.mean.len(), other.mean.len());
        for (a, b) in self.mean.iter_mut().zip(&other.mean) {
            a.merge(b);
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            a.merge(b);
        }
        self.samples += other.samples;
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn mean(&self, k: usize, p: usize) -> C64 {
        self.mean[k * self.num_pairs + p].value() / self.samples.max(1) as f64
    }

    pub fn second_moment(&self, k: usize, p: usize) -> f64 {
        self.second[k * self.num_pairs + p].value() / self.samples.max(1) as f64
    }

    /// Sample variance of `g_kp`, floored at zero against rounding.
    pub fn variance(&self, k: usize, p: usize) -> f64 {
        (self.second_moment(k, p) - self.mean(k, p).norm_sqr()).max(0.0)
    }
}

/// Effective SINR of each eMBB UE in `embb` for one slot power pattern.
///
/// A nonpositive denominator can only come from Monte-Carlo undersampling;
/// the SINR is then clamped to zero with a warning.
pub fn sinr_embb(
    stats: &GainStats,
    scenario: &NetworkScenario,
    embb: &[usize],
    powers: &SlotPowers,
    noise_w: f64,
) -> Vec<f64> {
    let k_n = scenario.num_ues();
    embb.iter()
        .map(|&k| {
            let mut desired = 0.0;
            let mut total = 0.0;
            for i in 0..k_n {
                let mut coherent = C64::new(0.0, 0.0);
                let mut spread = 0.0;
                for &p in &scenario.pairs_of_ue[i] {
                    let rho = powers.rho[p];
                    if rho == 0.0 {
                        continue;
                    }
                    coherent += stats.mean(k, p) * rho.sqrt();
                    spread += rho * stats.variance(k, p);
                }
                let c2 = coherent.norm_sqr();
                total += c2 + spread;
                if i == k {
                    desired = c2;
                }
            }
            let den = total - desired + noise_w;
            if den <= 0.0 {
                log::warn!("nonpositive eMBB SINR denominator for UE {k}; too few Monte-Carlo blocks");
                return 0.0;
            }
            desired / den
        })
        .collect()
}

/// Spectral efficiency of one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct SEReport {
    /// Per eMBB UE (bits/s/Hz).
    pub se: Vec<f64>,
    pub sum_se: f64,
    /// `T x K_e`.
    pub per_slot_sinr: Vec<Vec<f64>>,
    pub outage_flag: bool,
}

/// `SE_k = (tau_d / tau_c) (1/T) sum_t log2(1 + gamma_k^t)`.
pub fn se_embb(per_slot_sinr: Vec<Vec<f64>>, tau_d: usize, tau_c: usize) -> SEReport {
    let t_n = per_slot_sinr.len();
    assert!(t_n >= 1, "at least one slot is required");
    let k_e = per_slot_sinr[0].len();
    let prelog = tau_d as f64 / tau_c as f64;
    let se: Vec<f64> = (0..k_e)
        .map(|k| {
            let rate: f64 = per_slot_sinr.iter().map(|slot| (1.0 + slot[k]).log2()).sum();
            prelog * rate / t_n as f64
        })
        .collect();
    let sum_se: f64 = se.iter().sum();
    SEReport {
        se,
        sum_se,
        per_slot_sinr,
        outage_flag: sum_se == 0.0,
    }
}
