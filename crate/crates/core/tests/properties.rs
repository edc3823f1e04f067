//! Randomized invariants of the coexistence, eMBB and URLLC layers.

mod common;

use cellfree_coexist::coexistence::{fpa_slot_powers, slot_coefficients, PowerPolicy, PuncturingTopology, Strategy};
use cellfree_coexist::embb::{se_embb, BlockGains};
use cellfree_coexist::experiment::urllc_link;
use cellfree_coexist::linalg::{c64, CMat};
use cellfree_coexist::rng::rng_from_seed;
use cellfree_coexist::scenario::ServiceClass;
use cellfree_coexist::urllc::{optimize_s, saddlepoint_eps, ClosedFormCgf, Cgf, UrllcLink};
use proptest::prelude::*;
use rand::Rng;

fn urllc_setup(seed: u64, l_n: usize, k_n: usize, tau_p: usize, k_u: usize) -> (cellfree_coexist::scenario::NetworkScenario, Vec<usize>, Vec<usize>) {
    let mut rng = rng_from_seed(seed);
    let s = common::random_beta_scenario(&mut rng, l_n, k_n, tau_p, k_u);
    let urllc = s.urllc_ues();
    let master = urllc.iter().map(|&k| s.assoc.master_ap[k]).collect();
    (s, urllc, master)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coefficient_ordering(seed in any::<u64>(), l_n in 1usize..10, k_n in 1usize..12, p_act in 0.0f64..1.0) {
        let tau_p = 1 + (seed % k_n as u64) as usize;
        let k_u = (seed / 7 % (k_n as u64 + 1)) as usize;
        let (s, urllc, master) = urllc_setup(seed, l_n, k_n, tau_p, k_u);
        let topo = PuncturingTopology::new(&s);
        let mut rng = rng_from_seed(seed ^ 1);
        let active: Vec<bool> = urllc.iter().map(|_| rng.random::<f64>() < p_act).collect();
        let c = |st| slot_coefficients(&active, &master, st, &topo);
        let (spc, lpu, cpu, npu) = (c(Strategy::Spc), c(Strategy::Lpu), c(Strategy::Cpu), c(Strategy::Npu));
        for j in 0..l_n {
            prop_assert!(npu[j] <= cpu[j] && cpu[j] <= lpu[j] && lpu[j] <= spc[j] && spc[j] == 1.0);
            for v in [lpu[j], cpu[j], npu[j]] {
                prop_assert!(v == 0.0 || v == 1.0);
            }
        }
        if !active.iter().any(|&a| a) {
            prop_assert!(npu.iter().all(|&a| a == 1.0));
        }
    }

    #[test]
    fn fpa_budget_and_masks(
        seed in any::<u64>(),
        l_n in 1usize..8,
        k_n in 1usize..10,
        omega in 0.01f64..0.99,
        nu in 0.0f64..1.0,
        strategy in 0usize..4,
    ) {
        let (s, urllc, master) = urllc_setup(seed, l_n, k_n, 1 + (seed % 3) as usize, (seed % 4) as usize);
        let topo = PuncturingTopology::new(&s);
        let mut rng = rng_from_seed(seed ^ 2);
        let active: Vec<bool> = urllc.iter().map(|_| rng.random::<f64>() < 0.5).collect();
        let at = slot_coefficients(&active, &master, Strategy::ALL[strategy], &topo);
        let pw = fpa_slot_powers(&s, &urllc, &active, &at, &PowerPolicy::fpa(omega, nu), 0.2);
        for (j, range) in s.pairs_of_ap.iter().enumerate() {
            let mut scheduled = false;
            for p in range.clone() {
                let (k, _) = s.pairs[p];
                prop_assert!(pw.rho[p] >= 0.0);
                let on = match s.service(k) {
                    ServiceClass::Embb => at[j] > 0.0,
                    ServiceClass::Urllc => active[urllc.iter().position(|&u| u == k).unwrap()],
                };
                if !on {
                    prop_assert_eq!(pw.rho[p], 0.0);
                }
                scheduled |= on;
            }
            let total = pw.ap_total(&s, j);
            if scheduled {
                prop_assert!((total - 0.2).abs() <= 1e-12 * 0.2, "ap {} total {}", j, total);
            } else {
                prop_assert_eq!(total, 0.0);
            }
        }
    }

    #[test]
    fn se_slot_additivity(sinr in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 3), 1..6)) {
        let t_n = sinr.len();
        let r = se_embb(sinr.clone(), 570, 580);
        for k in 0..3 {
            let mut acc = 0.0;
            for slot in &sinr {
                acc += (1.0 + slot[k]).log2();
            }
            prop_assert_eq!(r.se[k], 570.0 / 580.0 * acc / t_n as f64);
            prop_assert!(r.se[k] >= 0.0);
        }
        prop_assert_eq!(r.outage_flag, r.sum_se == 0.0);
    }

    #[test]
    fn saddlepoint_is_a_probability(
        snr_db in -10.0f64..30.0,
        mis in 0.0f64..0.5,
        phase in 0.0f64..6.28,
        s_scale in -2.0f64..2.0,
        n_d in 20usize..300,
    ) {
        let a = 10f64.powf(snr_db / 20.0);
        let g_hat = c64(a, 0.0);
        let link = UrllcLink {
            g_eff: g_hat + c64(a * mis * phase.cos(), a * mis * phase.sin()),
            g_hat,
            sigma2_eff: 1.0,
            n_d,
            b: 160,
        };
        let e = saddlepoint_eps(&link, link.s0() * 10f64.powf(s_scale));
        prop_assert!((0.0..=1.0).contains(&e));
        let opt = saddlepoint_eps(&link, optimize_s(&link));
        prop_assert!(opt <= saddlepoint_eps(&link, link.s0()));
    }

    #[test]
    fn cgf_calibration(gr in -3.0f64..3.0, gi in -3.0f64..3.0, hr in -3.0f64..3.0, sigma2 in 0.05f64..5.0, s in 0.01f64..5.0) {
        let link = UrllcLink { g_eff: c64(gr, gi), g_hat: c64(hr, 0.0), sigma2_eff: sigma2, n_d: 100, b: 160 };
        let cgf = ClosedFormCgf::new(&link, s);
        let v = cgf.eval(0.0);
        prop_assert_eq!(v.k, 0.0);
        prop_assert!((v.k1 - cgf.mean()).abs() <= 1e-9 * cgf.mean().abs().max(1.0));
        prop_assert!(v.k2 >= 0.0);
    }

    #[test]
    fn lone_urllc_user_sees_only_noise_under_null_puncturing(
        seed in any::<u64>(),
        l_n in 1usize..8,
        k_n in 2usize..10,
        omega in 0.01f64..0.99,
    ) {
        let (s, urllc, master) = urllc_setup(seed, l_n, k_n, 2, 1 + (seed % 2) as usize);
        let cfg = common::small_config();
        let topo = PuncturingTopology::new(&s);
        let mut rng = rng_from_seed(seed ^ 3);
        let gains = BlockGains {
            per_ap: s
                .pairs_of_ap
                .iter()
                .map(|r| CMat::from_fn(k_n, r.len(), |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
                .collect(),
        };
        let mut active = vec![false; urllc.len()];
        active[0] = true;
        let k = urllc[0];
        let own = s.pair_index(k, master[0]).unwrap();
        let policy = PowerPolicy::fpa(omega, 0.5);
        let sigma2 = |st| {
            let at = slot_coefficients(&active, &master, st, &topo);
            let pw = fpa_slot_powers(&s, &urllc, &active, &at, &policy, 0.2);
            urllc_link(&cfg, &s, &gains, &pw, k, own, c64(1.0, 0.0)).sigma2_eff
        };
        prop_assert_eq!(sigma2(Strategy::Npu), cfg.noise_w);
        for st in Strategy::ALL {
            prop_assert!(sigma2(st) >= cfg.noise_w);
        }
    }
}
