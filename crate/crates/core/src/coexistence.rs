//! URLLC activation, puncturing coefficients and weighted fractional power
//! allocation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::{NetworkScenario, ServiceClass};

/// How an AP combines eMBB and URLLC traffic in a slot with URLLC activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Superposition coding: eMBB is never dropped.
    Spc,
    /// Local puncturing: the critical AP drops its eMBB transmissions.
    Lpu,
    /// Cluster puncturing: every AP in `L_{U_j}` of an active critical AP drops eMBB.
    Cpu,
    /// Network-wide puncturing.
    Npu,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Spc, Strategy::Lpu, Strategy::Cpu, Strategy::Npu];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Spc => "spc",
            Strategy::Lpu => "lpu",
            Strategy::Cpu => "cpu",
            Strategy::Npu => "npu",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// Weighted fractional power allocation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPolicy {
    pub name: String,
    /// Share of power steered to URLLC, in (0, 1).
    pub omega: f64,
    /// Exponent on the large-scale gain; 0 with `omega = 0.5` is equal power.
    pub nu: f64,
}

impl PowerPolicy {
    pub fn fpa(omega: f64, nu: f64) -> Self {
        PowerPolicy { name: "fpa".into(), omega, nu }
    }

    pub fn epa() -> Self {
        PowerPolicy { name: "epa".into(), omega: 0.5, nu: 0.0 }
    }
}

/// URLLC activation pattern over `T` slots. A URLLC UE can only be active
/// at its master AP, so only one bit per (slot, URLLC UE) is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activation {
    pub slots: usize,
    /// URLLC UE indices, in increasing order.
    pub urllc: Vec<usize>,
    /// Master AP of each URLLC UE.
    pub master: Vec<usize>,
    /// Row-major `T x K_u`.
    pub active: Vec<bool>,
}

impl Activation {
    pub fn num_urllc(&self) -> usize {
        self.urllc.len()
    }

    /// Activity of every URLLC UE in slot `t`.
    pub fn slot(&self, t: usize) -> &[bool] {
        let ku = self.urllc.len();
        &self.active[t * ku..(t + 1) * ku]
    }

    /// `A^t_{kj}` for URLLC UE index `u` (position in `urllc`).
    pub fn coefficient(&self, t: usize, u: usize, ap: usize) -> u8 {
        (self.slot(t)[u] && self.master[u] == ap) as u8
    }

    pub fn any_active(&self, t: usize) -> bool {
        self.slot(t).iter().any(|&a| a)
    }
}

/// Independent Bernoulli(`a_u`) activity per slot and URLLC UE.
pub fn sample_activation<R: Rng + ?Sized>(
    urllc: &[usize],
    master: &[usize],
    slots: usize,
    a_u: f64,
    rng: &mut R,
) -> Activation {
    assert!((0.0..=1.0).contains(&a_u), "activation probability must lie in [0, 1]");
    assert_eq!(urllc.len(), master.len());
    let active = (0..slots * urllc.len()).map(|_| rng.random::<f64>() < a_u).collect();
    Activation {
        slots,
        urllc: urllc.to_vec(),
        master: master.to_vec(),
        active,
    }
}

/// Activation of the URLLC users of a scenario.
pub fn sample_scenario_activation<R: Rng + ?Sized>(
    scenario: &NetworkScenario,
    slots: usize,
    a_u: f64,
    rng: &mut R,
) -> Activation {
    let urllc = scenario.urllc_ues();
    let master: Vec<usize> = urllc.iter().map(|&k| scenario.assoc.master_ap[k]).collect();
    sample_activation(&urllc, &master, slots, a_u, rng)
}

/// For each AP `j`, the set `L_{U_j}`: every AP serving some UE served by
/// `j`, including `j` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturingTopology {
    pub cluster_sets: Vec<Vec<usize>>,
}

impl PuncturingTopology {
    pub fn new(scenario: &NetworkScenario) -> Self {
        let l_n = scenario.num_aps();
        let cluster_sets = (0..l_n)
            .map(|j| {
                let mut mark = vec![false; l_n];
                mark[j] = true;
                for k in scenario.served_by(j) {
                    for l in scenario.cluster(k) {
                        mark[l] = true;
                    }
                }
                (0..l_n).filter(|&l| mark[l]).collect()
            })
            .collect();
        PuncturingTopology { cluster_sets }
    }
}

/// `A~_j` of one slot given which URLLC UEs are active.
pub fn slot_coefficients(
    active: &[bool],
    master: &[usize],
    strategy: Strategy,
    topology: &PuncturingTopology,
) -> Vec<f64> {
    let l_n = topology.cluster_sets.len();
    if strategy == Strategy::Spc {
        return vec![1.0; l_n];
    }
    let mut count = vec![0usize; l_n];
    for (u, &a) in active.iter().enumerate() {
        if a {
            count[master[u]] += 1;
        }
    }
    let total: usize = count.iter().sum();
    (0..l_n)
        .map(|j| {
            let hits = match strategy {
                Strategy::Lpu => count[j],
                Strategy::Cpu => topology.cluster_sets[j].iter().map(|&l| count[l]).sum(),
                Strategy::Npu => total,
                Strategy::Spc => unreachable!(),
            };
            (1.0 - hits as f64).max(0.0)
        })
        .collect()
}

/// `A~` for every slot, row `t` of length `L`.
pub fn coexistence_coefficients(
    activation: &Activation,
    strategy: Strategy,
    topology: &PuncturingTopology,
) -> Vec<Vec<f64>> {
    (0..activation.slots)
        .map(|t| slot_coefficients(activation.slot(t), &activation.master, strategy, topology))
        .collect()
}

/// Transmit powers of one slot, one entry per served pair (W). eMBB pairs
/// carry `rho^e` (already zero where punctured) and URLLC pairs `rho^u`
/// (zero when inactive), so the precoder amplitude is `sqrt(rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotPowers {
    pub rho: Vec<f64>,
}

impl SlotPowers {
    pub fn amplitude(&self, p: usize) -> f64 {
        self.rho[p].sqrt()
    }

    /// Sum of powers allocated by AP `l`.
    pub fn ap_total(&self, scenario: &NetworkScenario, l: usize) -> f64 {
        scenario.pairs_of_ap[l].clone().map(|p| self.rho[p]).sum()
    }
}

/// Weighted FPA for one slot. At AP `j`, with `w_k = beta_kj^nu`,
///
/// `rho^e_kj = (1 - omega) rho_max A~_j w_k / D_j`, `rho^u_ij = omega rho_max A_ij w_i / D_j`,
/// `D_j = (1 - omega) A~_j sum_{K^e_j} w + omega sum_{K^u_j} A w`.
///
/// `active` is indexed like `urllc`; `a_tilde` has one entry per AP. An AP
/// with nothing to transmit (empty denominator) gets all-zero powers.
pub fn fpa_slot_powers(
    scenario: &NetworkScenario,
    urllc: &[usize],
    active: &[bool],
    a_tilde: &[f64],
    policy: &PowerPolicy,
    rho_max: f64,
) -> SlotPowers {
    let k_n = scenario.num_ues();
    let mut ue_active = vec![false; k_n];
    for (u, &k) in urllc.iter().enumerate() {
        ue_active[k] = active[u];
    }
    // Dividing through by (1 - omega) or omega keeps each share monotone in
    // omega under rounding as well.
    let to_urllc = policy.omega / (1.0 - policy.omega);
    let to_embb = (1.0 - policy.omega) / policy.omega;
    let mut rho = vec![0.0; scenario.pairs.len()];
    for (j, range) in scenario.pairs_of_ap.iter().enumerate() {
        let mut sum_e = 0.0;
        let mut sum_u = 0.0;
        for p in range.clone() {
            let (k, _) = scenario.pairs[p];
            let w = scenario.beta[(k, j)].powf(policy.nu);
            match scenario.service(k) {
                ServiceClass::Embb => sum_e += w,
                ServiceClass::Urllc if ue_active[k] => sum_u += w,
                ServiceClass::Urllc => {}
            }
        }
        let sum_e = a_tilde[j] * sum_e;
        if sum_e + sum_u <= 0.0 {
            continue;
        }
        for p in range.clone() {
            let (k, _) = scenario.pairs[p];
            let w = scenario.beta[(k, j)].powf(policy.nu);
            rho[p] = match scenario.service(k) {
                ServiceClass::Embb if a_tilde[j] > 0.0 => rho_max * a_tilde[j] * w / (sum_e + to_urllc * sum_u),
                ServiceClass::Urllc if ue_active[k] => rho_max * w / (to_embb * sum_e + sum_u),
                _ => 0.0,
            };
        }
    }
    SlotPowers { rho }
}

/// Per-slot FPA powers over a whole activation pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub policy: PowerPolicy,
    pub rho_max: f64,
    pub slots: Vec<SlotPowers>,
}

pub fn fpa_powers(
    scenario: &NetworkScenario,
    activation: &Activation,
    a_tilde: &[Vec<f64>],
    policy: &PowerPolicy,
    rho_max: f64,
) -> PowerAllocation {
    let slots = (0..activation.slots)
        .map(|t| fpa_slot_powers(scenario, &activation.urllc, activation.slot(t), &a_tilde[t], policy, rho_max))
        .collect();
    PowerAllocation {
        policy: policy.clone(),
        rho_max,
        slots,
    }
}
