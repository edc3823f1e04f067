//! Experiment orchestration: drops, blocks, slots and every combination of
//! precoder, coexistence strategy and power policy.
//!
//! Per drop the pipeline is: scenario, normalization ensemble (LP-MMSE
//! scaling and the decoder-side mean channel of URLLC users), evaluation
//! blocks (effective gains, activations, URLLC slots), then eMBB SINRs per
//! activation pattern. All combinations share the same channel and
//! activation draws, so comparisons between them are paired.

use rayon::prelude::*;
use std::collections::HashMap;
use std::path::Path;

use crate::channel::{ChannelBlock, EstimationStats, UplinkConfig};
use crate::coexistence::{
    fpa_slot_powers, sample_scenario_activation, slot_coefficients, Activation, PowerPolicy, PuncturingTopology,
    SlotPowers, Strategy,
};
use crate::config::{CgfMethod, SimConfig};
use crate::embb::{se_embb, sinr_embb, BlockGains, GainStats};
use crate::error::{Result, SimError};
use crate::linalg::{CMat, C64};
use crate::output::{self, Metric, ResultRow};
use crate::precoder::{mr_precoder, LpMmseDesign, LpMmseNormalization, PrecoderScheme, PrecoderSet};
use crate::rng::{Purpose, SeedLineage};
use crate::scenario::{NetworkScenario, ServiceClass};
use crate::stats::{ComplexSum, KahanSum};
use crate::urllc::{evaluate_eps, CgfBackend, UrllcLink};

/// Output of one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub drop: u64,
    pub rows: Vec<ResultRow>,
    /// URLLC users never active in any block, per combination.
    pub never_active: usize,
    /// URLLC slots whose quadrature CGF fell back to the Monte-Carlo oracle.
    pub oracle_fallbacks: usize,
}

/// Everything a run produces, in drop order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub drops: Vec<DropResult>,
}

impl RunResult {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.drops.iter().flat_map(|d| d.rows.iter())
    }

    pub fn all_rows(&self) -> Vec<ResultRow> {
        self.rows().cloned().collect()
    }

    /// Values of a network-wide or per-UE metric for one combination, in
    /// drop order.
    pub fn values(&self, metric: Metric, strategy: Strategy, precoder: PrecoderScheme, policy: &str) -> Vec<f64> {
        self.rows()
            .filter(|r| r.metric == metric && r.strategy == strategy && r.precoder == precoder && r.policy == policy)
            .map(|r| r.value)
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Combo {
    strategy: usize,
    policy: usize,
}

/// Runs every drop on a pool of `workers` threads. Output does not depend
/// on the worker count.
pub fn run_experiment(cfg: &SimConfig, workers: usize) -> Result<RunResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::config("workers", e.to_string()))?;
    let lineage = SeedLineage::new(cfg.master_seed);
    let drops = pool.install(|| {
        (0..cfg.n_drops as u64)
            .into_par_iter()
            .map(|d| {
                log::info!("drop {d} started");
                run_drop(cfg, &lineage, d).map_err(|e| SimError::Drop {
                    drop: d,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(RunResult { drops })
}

/// Runs the experiment and writes `results.csv`, `summary.csv`,
/// `ecdf.csv` and the resolved `config.json` into `out`.
pub fn run_to_dir(cfg: &SimConfig, workers: usize, out: &Path) -> Result<RunResult> {
    std::fs::create_dir_all(out)?;
    let result = run_experiment(cfg, workers)?;
    let rows = result.all_rows();
    let results_path = out.join(output::RESULTS_FILE);
    output::write_results(&results_path, &rows)?;
    // Summarize what was written so `summarize` on the directory reproduces it.
    let written = output::read_results(&results_path)?;
    output::write_summary(out, &output::summarize(&written, cfg.eps_target))?;
    std::fs::write(
        out.join(output::CONFIG_FILE),
        serde_json::to_string_pretty(cfg)? + "\n",
    )?;
    let skipped: usize = result.drops.iter().map(|d| d.never_active).sum();
    if skipped > 0 {
        log::info!("{skipped} (URLLC user, drop, combination) entries had no active slot and were excluded");
    }
    Ok(result)
}

/// Mean of `h_kj^H w_kj` over the normalization ensemble for every URLLC
/// user at its master AP, per precoder, with unit-power precoders.
struct NormalizationOutcome {
    lpmmse: Option<(LpMmseDesign, LpMmseNormalization)>,
    urllc_mean: Vec<Vec<C64>>,
}

fn normalization_ensemble(
    cfg: &SimConfig,
    scenario: &NetworkScenario,
    stats: &EstimationStats,
    lineage: &SeedLineage,
    drop: u64,
    urllc_pairs: &[(usize, usize, usize)],
) -> NormalizationOutcome {
    let want_lp = cfg.precoders.contains(&PrecoderScheme::LpMmse);
    let design = want_lp.then(|| LpMmseDesign::new(scenario, stats));
    let mut norm = LpMmseNormalization::new(scenario.pairs.len());
    let mut sums = vec![vec![ComplexSum::default(); urllc_pairs.len()]; cfg.precoders.len()];
    for b in 0..cfg.n_norm_blocks as u64 {
        let mut crng = lineage.stream(Purpose::NormChannel, drop, b);
        let mut nrng = lineage.stream(Purpose::NormPilotNoise, drop, b);
        let block = ChannelBlock::draw(scenario, stats, &mut crng, &mut nrng);
        for (pi, scheme) in cfg.precoders.iter().enumerate() {
            let w: Vec<CMat> = match scheme {
                PrecoderScheme::Mr => mr_precoder(&block.h_hat).w,
                PrecoderScheme::LpMmse => {
                    let wb = design.as_ref().expect("design built").unnormalized(&block.h_hat);
                    norm.add_block(scenario, &wb);
                    wb
                }
            };
            for (u, &(k, j, p)) in urllc_pairs.iter().enumerate() {
                let col = p - scenario.pairs_of_ap[j].start;
                sums[pi][u].add(block.h[j].column(k).dotc(&w[j].column(col)));
            }
        }
    }
    let n = cfg.n_norm_blocks as f64;
    let urllc_mean = cfg
        .precoders
        .iter()
        .zip(&sums)
        .map(|(scheme, s)| {
            s.iter()
                .zip(urllc_pairs)
                .map(|(acc, &(_, _, p))| {
                    let mean = acc.value() / n;
                    match scheme {
                        PrecoderScheme::Mr => mean,
                        PrecoderScheme::LpMmse => {
                            let e = norm.mean_sq_norm(p);
                            if e > 0.0 {
                                mean / e.sqrt()
                            } else {
                                mean
                            }
                        }
                    }
                })
                .collect()
        })
        .collect();
    NormalizationOutcome {
        lpmmse: design.map(|d| (d, norm)),
        urllc_mean,
    }
}

/// Powers of each (strategy, policy) per slot activation pattern.
struct PowerCache<'a> {
    cfg: &'a SimConfig,
    scenario: &'a NetworkScenario,
    topology: &'a PuncturingTopology,
    urllc: &'a [usize],
    master: &'a [usize],
    map: HashMap<(Combo, Vec<bool>), SlotPowers>,
}

impl<'a> PowerCache<'a> {
    fn get(&mut self, combo: Combo, pattern: &[bool]) -> &SlotPowers {
        let key = (combo, pattern.to_vec());
        let (cfg, scenario, topology, urllc, master) = (self.cfg, self.scenario, self.topology, self.urllc, self.master);
        self.map.entry(key).or_insert_with(|| {
            let strategy = cfg.strategies[combo.strategy];
            let policy: &PowerPolicy = &cfg.power_policies[combo.policy];
            let a_tilde = slot_coefficients(pattern, master, strategy, topology);
            fpa_slot_powers(scenario, urllc, pattern, &a_tilde, policy, cfg.rho_max_w)
        })
    }
}

/// Link of URLLC user `k` in one slot. Every other user's coherent
/// downlink signal counts as interference on top of the receiver noise.
pub fn urllc_link(
    cfg: &SimConfig,
    scenario: &NetworkScenario,
    gains: &BlockGains,
    powers: &SlotPowers,
    k: usize,
    own_pair: usize,
    g_hat_unit: C64,
) -> UrllcLink {
    let amp = powers.amplitude(own_pair);
    let mut sigma2 = cfg.noise_w;
    for i in 0..scenario.num_ues() {
        if i == k {
            continue;
        }
        let mut coherent = C64::new(0.0, 0.0);
        for &p in &scenario.pairs_of_ue[i] {
            let rho = powers.rho[p];
            if rho > 0.0 {
                coherent += gains.gain(scenario, k, p) * rho.sqrt();
            }
        }
        sigma2 += coherent.norm_sqr();
    }
    UrllcLink {
        g_eff: gains.gain(scenario, k, own_pair) * amp,
        g_hat: g_hat_unit * amp,
        sigma2_eff: sigma2,
        n_d: cfg.n_d,
        b: cfg.payload_bits,
    }
}

/// Simulates one drop.
pub fn run_drop(cfg: &SimConfig, lineage: &SeedLineage, drop: u64) -> Result<DropResult> {
    let scenario = NetworkScenario::generate(&cfg.geometry, cfg.tau_p, lineage, drop);
    let uplink = UplinkConfig {
        pilot_power_w: cfg.p_ul_w,
        noise_w: cfg.noise_w,
        tau_p: cfg.tau_p,
    };
    let est = EstimationStats::new(&scenario, &uplink);
    let topology = PuncturingTopology::new(&scenario);
    let embb = scenario.embb_ues();
    let urllc = scenario.urllc_ues();
    let master: Vec<usize> = urllc.iter().map(|&k| scenario.assoc.master_ap[k]).collect();
    let urllc_pairs: Vec<(usize, usize, usize)> = urllc
        .iter()
        .zip(&master)
        .map(|(&k, &j)| (k, j, scenario.pair_index(k, j).expect("master AP serves its user")))
        .collect();

    let norm = normalization_ensemble(cfg, &scenario, &est, lineage, drop, &urllc_pairs);

    let combos: Vec<Combo> = (0..cfg.strategies.len())
        .flat_map(|s| (0..cfg.power_policies.len()).map(move |p| Combo { strategy: s, policy: p }))
        .collect();
    let n_pre = cfg.precoders.len();
    let mut powers = PowerCache {
        cfg,
        scenario: &scenario,
        topology: &topology,
        urllc: &urllc,
        master: &master,
        map: HashMap::new(),
    };
    let mut gain_stats = vec![GainStats::new(scenario.num_ues(), scenario.pairs.len()); n_pre];
    // [precoder][combo][urllc user] -> (sum of eps, active slots)
    let mut eps_acc = vec![vec![vec![(KahanSum::default(), 0usize); urllc.len()]; combos.len()]; n_pre];
    let mut activations: Vec<Activation> = Vec::with_capacity(cfg.n_blocks);
    let mut fallbacks = 0usize;

    for b in 0..cfg.n_blocks as u64 {
        let mut crng = lineage.stream(Purpose::EvalChannel, drop, b);
        let mut nrng = lineage.stream(Purpose::EvalPilotNoise, drop, b);
        let block = ChannelBlock::draw(&scenario, &est, &mut crng, &mut nrng);
        let mut arng = lineage.stream(Purpose::Activation, drop, b);
        let act = sample_scenario_activation(&scenario, cfg.slots, cfg.activation_prob, &mut arng);

        for (pi, scheme) in cfg.precoders.iter().enumerate() {
            let w: PrecoderSet = match scheme {
                PrecoderScheme::Mr => mr_precoder(&block.h_hat),
                PrecoderScheme::LpMmse => {
                    let (design, n) = norm.lpmmse.as_ref().expect("LP-MMSE normalized");
                    crate::precoder::lpmmse_precoder(&scenario, design, &block.h_hat, n)
                }
            };
            let gains = BlockGains::compute(&block, &w);
            gain_stats[pi].add_block(&scenario, &gains);

            let mut link_index = 0u64;
            for t in 0..cfg.slots {
                let pattern = act.slot(t);
                for (ci, &combo) in combos.iter().enumerate() {
                    for (u, &(k, _, p)) in urllc_pairs.iter().enumerate() {
                        if !pattern[u] {
                            continue;
                        }
                        let pw = powers.get(combo, pattern);
                        let link = urllc_link(cfg, &scenario, &gains, pw, k, p, norm.urllc_mean[pi][u]);
                        let backend = match cfg.cgf_method {
                            CgfMethod::ClosedForm => CgfBackend::ClosedForm,
                            CgfMethod::Quadrature => CgfBackend::Quadrature {
                                nodes: cfg.quadrature_nodes,
                                fallback_trials: cfg.n_mc_trials,
                                seed: lineage
                                    .seed(Purpose::Oracle, drop, b)
                                    .wrapping_add(link_index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
                                    .wrapping_add(pi as u64),
                            },
                        };
                        link_index += 1;
                        let ev = evaluate_eps(&link, backend);
                        if ev.fallback {
                            fallbacks += 1;
                        }
                        let slot = &mut eps_acc[pi][ci][u];
                        slot.0.add(ev.eps);
                        slot.1 += 1;
                    }
                }
            }
        }
        activations.push(act);
    }

    let seed = format!("{}:{}", lineage.master(), drop);
    let mut rows = Vec::new();
    let mut never_active = 0usize;
    for (pi, &scheme) in cfg.precoders.iter().enumerate() {
        for (ci, &combo) in combos.iter().enumerate() {
            let strategy = cfg.strategies[combo.strategy];
            let policy = cfg.power_policies[combo.policy].name.clone();
            let row = |ue: Option<usize>, class: ServiceClass, metric: Metric, value: f64| ResultRow {
                drop,
                ue,
                class,
                strategy,
                precoder: scheme,
                policy: policy.clone(),
                metric,
                value,
                seed: seed.clone(),
            };

            let mut sinr_memo: HashMap<Vec<bool>, Vec<f64>> = HashMap::new();
            let mut se_sum = vec![KahanSum::default(); embb.len()];
            let mut sum_se = KahanSum::default();
            let mut outages = 0usize;
            for act in &activations {
                let per_slot: Vec<Vec<f64>> = (0..cfg.slots)
                    .map(|t| {
                        let pattern = act.slot(t);
                        if let Some(v) = sinr_memo.get(pattern) {
                            return v.clone();
                        }
                        let pw = powers.get(combo, pattern);
                        let v = sinr_embb(&gain_stats[pi], &scenario, &embb, pw, cfg.noise_w);
                        sinr_memo.insert(pattern.to_vec(), v.clone());
                        v
                    })
                    .collect();
                let report = se_embb(per_slot, cfg.tau_d, cfg.tau_c);
                for (acc, se) in se_sum.iter_mut().zip(&report.se) {
                    acc.add(*se);
                }
                sum_se.add(report.sum_se);
                outages += report.outage_flag as usize;
            }
            let nb = cfg.n_blocks as f64;
            for (&k, acc) in embb.iter().zip(&se_sum) {
                rows.push(row(Some(k), ServiceClass::Embb, Metric::Se, acc.value() / nb));
            }
            rows.push(row(None, ServiceClass::Embb, Metric::SumSe, sum_se.value() / nb));
            rows.push(row(None, ServiceClass::Embb, Metric::Outage, outages as f64 / nb));
            for (u, &k) in urllc.iter().enumerate() {
                let (acc, count) = &eps_acc[pi][ci][u];
                if *count == 0 {
                    never_active += 1;
                    continue;
                }
                rows.push(row(Some(k), ServiceClass::Urllc, Metric::Eps, acc.value() / *count as f64));
            }
        }
    }
    Ok(DropResult {
        drop,
        rows,
        never_active,
        oracle_fallbacks: fallbacks,
    })
}
