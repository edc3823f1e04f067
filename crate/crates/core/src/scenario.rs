//! Network drops: geometry, large-scale fading, local-scattering spatial
//! correlation, pilot assignment and user-centric clustering.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::linalg::{c64, CMat, C64};
use crate::rng::{rng_from_seed, Purpose, SeedLineage};

/// Intercept of the urban-microcell path-loss fit (dB at 1 m).
pub const PATHLOSS_INTERCEPT_DB: f64 = -30.5;
/// Distance slope of the path-loss fit (dB per decade).
pub const PATHLOSS_SLOPE_DB: f64 = 36.7;
pub const SHADOWING_STD_DB: f64 = 4.0;
/// Angle draws averaged per correlation matrix.
pub const SCATTERING_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum ServiceClass {
    Embb,
    Urllc,
}

impl ServiceClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ServiceClass::Embb => "embb",
            ServiceClass::Urllc => "urllc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub num_aps: usize,
    pub antennas: usize,
    pub num_ues: usize,
    /// Fraction of users that are URLLC users.
    pub urllc_fraction: f64,
    pub side_km: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
    pub asd_deg: f64,
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_aps == 0 {
            return Err(SimError::config("num_aps", "must be at least 1"));
        }
        if self.antennas == 0 {
            return Err(SimError::config("antennas_per_ap", "must be at least 1"));
        }
        if self.num_ues == 0 {
            return Err(SimError::config("num_ues", "must be at least 1"));
        }
        if self.num_aps * self.antennas <= self.num_ues {
            return Err(SimError::config(
                "antennas_per_ap",
                "total antenna count L*M must exceed the number of users K",
            ));
        }
        if !(0.0..=1.0).contains(&self.urllc_fraction) {
            return Err(SimError::config("urllc_fraction", "must lie in [0, 1]"));
        }
        if !(self.side_km > 0.0) {
            return Err(SimError::config("side_km", "must be positive"));
        }
        if !(self.asd_deg >= 0.0) {
            return Err(SimError::config("asd_deg", "must be nonnegative"));
        }
        if !(self.ap_height_m.is_finite() && self.ue_height_m.is_finite()) {
            return Err(SimError::config("ap_height_m", "heights must be finite"));
        }
        Ok(())
    }

    /// `round(alpha * K)`.
    pub fn num_urllc(&self) -> usize {
        (self.urllc_fraction * self.num_ues as f64).round() as usize
    }
}

/// Positions and service classes of a drop.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub ap_pos: Vec<[f64; 2]>,
    pub ue_pos: Vec<[f64; 2]>,
    pub service: Vec<ServiceClass>,
    /// Set when a positive URLLC fraction rounds to zero users.
    pub degenerate_urllc: bool,
}

/// Uniform AP/UE placement and URLLC tagging.
pub fn drop_network(cfg: &GeometryConfig, seed: u64) -> Placement {
    let mut rng = rng_from_seed(seed);
    let side = 1000.0 * cfg.side_km;
    let point = |rng: &mut rand_chacha::ChaCha8Rng| [rng.random::<f64>() * side, rng.random::<f64>() * side];
    let ap_pos: Vec<[f64; 2]> = (0..cfg.num_aps).map(|_| point(&mut rng)).collect();
    let ue_pos: Vec<[f64; 2]> = (0..cfg.num_ues).map(|_| point(&mut rng)).collect();

    let n_urllc = cfg.num_urllc();
    let mut order: Vec<usize> = (0..cfg.num_ues).collect();
    order.shuffle(&mut rng);
    let mut service = vec![ServiceClass::Embb; cfg.num_ues];
    for &k in &order[..n_urllc] {
        service[k] = ServiceClass::Urllc;
    }
    let degenerate_urllc = cfg.urllc_fraction > 0.0 && n_urllc == 0;
    if degenerate_urllc {
        log::warn!("URLLC fraction {} rounds to zero URLLC users", cfg.urllc_fraction);
    }
    Placement {
        ap_pos,
        ue_pos,
        service,
        degenerate_urllc,
    }
}

/// 3-D AP-UE distance in meters.
pub fn distance_3d(ap: [f64; 2], ue: [f64; 2], height_diff: f64) -> f64 {
    let dx = ap[0] - ue[0];
    let dy = ap[1] - ue[1];
    (dx * dx + dy * dy + height_diff * height_diff).sqrt()
}

/// Path loss in dB (negative) for a 3-D distance, without shadowing.
pub fn pathloss_db(distance_m: f64) -> f64 {
    PATHLOSS_INTERCEPT_DB - PATHLOSS_SLOPE_DB * distance_m.log10()
}

/// Linear large-scale gains `beta[(k, l)]` with i.i.d. log-normal shadowing.
pub fn large_scale_gains(placement: &Placement, cfg: &GeometryConfig, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let shadow = Normal::new(0.0, SHADOWING_STD_DB).expect("valid std");
    let dh = cfg.ap_height_m - cfg.ue_height_m;
    let k = placement.ue_pos.len();
    let l = placement.ap_pos.len();
    let mut beta = DMatrix::zeros(k, l);
    for ue in 0..k {
        for ap in 0..l {
            let d = distance_3d(placement.ap_pos[ap], placement.ue_pos[ue], dh);
            let db = pathloss_db(d) + shadow.sample(&mut rng);
            beta[(ue, ap)] = 10f64.powf(db / 10.0);
        }
    }
    beta
}

/// Shared angular perturbations `(cos d, sin d, cos e, sin e)` used by the
/// sample average of [`local_scattering`].
#[derive(Debug, Clone)]
pub struct AngleDeviates {
    trig: Vec<[f64; 4]>,
}

impl AngleDeviates {
    pub fn sample(asd_rad: f64, draws: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let trig = (0..draws)
            .map(|_| {
                let d: f64 = asd_rad * rng.sample::<f64, _>(StandardNormal);
                let e: f64 = asd_rad * rng.sample::<f64, _>(StandardNormal);
                [d.cos(), d.sin(), e.cos(), e.sin()]
            })
            .collect();
        AngleDeviates { trig }
    }

    pub fn len(&self) -> usize {
        self.trig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trig.is_empty()
    }
}

/// Unit-gain local-scattering correlation of a half-wavelength ULA,
/// `E[a a^H]` with `a_m = exp(j pi m sin(az) cos(el))`, averaged over the
/// perturbed angles.
///
/// The matrix is Toeplitz, so only the `M` lag averages are accumulated;
/// the result is exactly the sample mean of the rank-one outer products.
pub fn local_scattering(m: usize, azimuth: f64, elevation: f64, deviates: &AngleDeviates) -> CMat {
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    let mut lags = vec![C64::new(0.0, 0.0); m];
    let mut powers = vec![C64::new(0.0, 0.0); m];
    for t in &deviates.trig {
        let [cd, sd, cep, sep] = *t;
        let sin_az = sa * cd + ca * sd;
        let cos_el = ce * cep - se * sep;
        let (s, c) = (PI * sin_az * cos_el).sin_cos();
        let step = c64(c, s);
        powers[0] = c64(1.0, 0.0);
        for d in 1..m {
            powers[d] = powers[d - 1] * step;
        }
        for d in 0..m {
            lags[d] += powers[d];
        }
    }
    let n = deviates.len() as f64;
    for z in lags.iter_mut() {
        *z /= n;
    }
    lags[0] = c64(1.0, 0.0);
    CMat::from_fn(m, m, |i, j| if i >= j { lags[i - j] } else { lags[j - i].conj() })
}

/// Nominal azimuth and elevation of the UE as seen from the AP.
pub fn nominal_angles(ap: [f64; 2], ue: [f64; 2], height_diff: f64) -> (f64, f64) {
    let dx = ue[0] - ap[0];
    let dy = ue[1] - ap[1];
    let d2 = (dx * dx + dy * dy).sqrt();
    (dy.atan2(dx), (-height_diff).atan2(d2))
}

/// Spatial correlation matrices `R[k*L + l] = beta[k,l] * E[a a^H]`.
pub fn spatial_correlation(
    placement: &Placement,
    beta: &DMatrix<f64>,
    cfg: &GeometryConfig,
    seed: u64,
) -> Vec<CMat> {
    let deviates = AngleDeviates::sample(cfg.asd_deg.to_radians(), SCATTERING_DRAWS, seed);
    let dh = cfg.ap_height_m - cfg.ue_height_m;
    let (k_n, l_n) = beta.shape();
    let mut out = Vec::with_capacity(k_n * l_n);
    for k in 0..k_n {
        for l in 0..l_n {
            let (az, el) = nominal_angles(placement.ap_pos[l], placement.ue_pos[k], dh);
            out.push(local_scattering(cfg.antennas, az, el, &deviates).scale(beta[(k, l)]));
        }
    }
    out
}

/// Pilot indices (0-based), master APs and the service-association mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub pilot: Vec<usize>,
    pub master_ap: Vec<usize>,
    /// Row-major `K x L` mask: `serves[k * L + l]` iff AP `l` serves UE `k`.
    pub serves: Vec<bool>,
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Joint pilot assignment and user-centric clustering.
///
/// Every UE is served by its master AP (largest `beta`). The first `tau_p`
/// UEs get distinct pilots; each later UE takes the pilot with the least
/// accumulated gain at its master AP. Then, for every AP and every pilot on
/// which the AP is not already master of an eMBB UE, the AP additionally
/// serves the eMBB UE with the strongest gain among those on that pilot.
/// URLLC UEs are served by their master AP only. Ties go to the lowest
/// index.
pub fn assign_pilots_and_clusters(beta: &DMatrix<f64>, service: &[ServiceClass], tau_p: usize) -> Association {
    assert!(tau_p >= 1, "need at least one pilot");
    let (k_n, l_n) = beta.shape();
    let master_ap: Vec<usize> = (0..k_n).map(|k| argmax_first(beta.row(k).iter().copied())).collect();

    let mut pilot = vec![0usize; k_n];
    for k in 0..k_n {
        if k < tau_p {
            pilot[k] = k;
            continue;
        }
        let m = master_ap[k];
        let mut load = vec![0.0f64; tau_p];
        for i in 0..k {
            load[pilot[i]] += beta[(i, m)];
        }
        pilot[k] = argmax_first(load.iter().map(|v| -v));
    }

    let mut serves = vec![false; k_n * l_n];
    for k in 0..k_n {
        serves[k * l_n + master_ap[k]] = true;
    }
    for l in 0..l_n {
        for t in 0..tau_p {
            let candidates: Vec<usize> =
                (0..k_n).filter(|&k| pilot[k] == t && service[k] == ServiceClass::Embb).collect();
            if candidates.is_empty() || candidates.iter().any(|&k| master_ap[k] == l) {
                continue;
            }
            let best = candidates[argmax_first(candidates.iter().map(|&k| beta[(k, l)]))];
            serves[best * l_n + l] = true;
        }
    }
    Association {
        pilot,
        master_ap,
        serves,
    }
}

/// A complete, immutable network drop.
#[derive(Debug, Clone)]
pub struct NetworkScenario {
    pub geometry: GeometryConfig,
    pub tau_p: usize,
    pub placement: Placement,
    /// `K x L` linear large-scale gains.
    pub beta: DMatrix<f64>,
    /// `R[k * L + l]`, each `M x M`.
    pub corr: Vec<CMat>,
    pub assoc: Association,
    /// Served (UE, AP) pairs ordered by AP, then by UE index.
    pub pairs: Vec<(usize, usize)>,
    /// Pair indices of each AP, contiguous in `pairs`.
    pub pairs_of_ap: Vec<std::ops::Range<usize>>,
    /// Pair indices of each UE.
    pub pairs_of_ue: Vec<Vec<usize>>,
    pair_lookup: Vec<Option<usize>>,
}

impl NetworkScenario {
    /// Draws a full scenario for `drop` from the run's seed lineage.
    pub fn generate(geometry: &GeometryConfig, tau_p: usize, lineage: &SeedLineage, drop: u64) -> Self {
        let placement = drop_network(geometry, lineage.seed(Purpose::Placement, drop, 0));
        let beta = large_scale_gains(&placement, geometry, lineage.seed(Purpose::Shadowing, drop, 0));
        let corr = spatial_correlation(
            &placement,
            &beta,
            geometry,
            lineage.seed(Purpose::ScatteringAngles, drop, 0),
        );
        Self::from_parts(geometry.clone(), tau_p, placement, beta, corr)
    }

    /// Builds a scenario from explicit gains and correlation matrices.
    /// Pilot assignment and clustering are derived from `beta`.
    pub fn from_parts(
        geometry: GeometryConfig,
        tau_p: usize,
        placement: Placement,
        beta: DMatrix<f64>,
        corr: Vec<CMat>,
    ) -> Self {
        let assoc = assign_pilots_and_clusters(&beta, &placement.service, tau_p);
        Self::with_association(geometry, tau_p, placement, beta, corr, assoc)
    }

    pub fn with_association(
        geometry: GeometryConfig,
        tau_p: usize,
        placement: Placement,
        beta: DMatrix<f64>,
        corr: Vec<CMat>,
        assoc: Association,
    ) -> Self {
        let (k_n, l_n) = beta.shape();
        assert_eq!(corr.len(), k_n * l_n);
        let mut pairs = Vec::new();
        let mut pairs_of_ap = Vec::with_capacity(l_n);
        let mut pairs_of_ue = vec![Vec::new(); k_n];
        let mut pair_lookup = vec![None; k_n * l_n];
        for l in 0..l_n {
            let start = pairs.len();
            for k in 0..k_n {
                if assoc.serves[k * l_n + l] {
                    pair_lookup[k * l_n + l] = Some(pairs.len());
                    pairs_of_ue[k].push(pairs.len());
                    pairs.push((k, l));
                }
            }
            pairs_of_ap.push(start..pairs.len());
        }
        NetworkScenario {
            geometry,
            tau_p,
            placement,
            beta,
            corr,
            assoc,
            pairs,
            pairs_of_ap,
            pairs_of_ue,
            pair_lookup,
        }
    }

    pub fn num_ues(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_aps(&self) -> usize {
        self.beta.ncols()
    }

    pub fn antennas(&self) -> usize {
        self.geometry.antennas
    }

    pub fn service(&self, k: usize) -> ServiceClass {
        self.placement.service[k]
    }

    pub fn corr(&self, k: usize, l: usize) -> &CMat {
        &self.corr[k * self.num_aps() + l]
    }

    pub fn serves(&self, k: usize, l: usize) -> bool {
        self.assoc.serves[k * self.num_aps() + l]
    }

    pub fn pair_index(&self, k: usize, l: usize) -> Option<usize> {
        self.pair_lookup[k * self.num_aps() + l]
    }

    pub fn embb_ues(&self) -> Vec<usize> {
        (0..self.num_ues()).filter(|&k| self.service(k) == ServiceClass::Embb).collect()
    }

    pub fn urllc_ues(&self) -> Vec<usize> {
        (0..self.num_ues()).filter(|&k| self.service(k) == ServiceClass::Urllc).collect()
    }

    /// APs serving UE `k` (its cluster).
    pub fn cluster(&self, k: usize) -> Vec<usize> {
        self.pairs_of_ue[k].iter().map(|&p| self.pairs[p].1).collect()
    }

    /// UEs served by AP `l`.
    pub fn served_by(&self, l: usize) -> Vec<usize> {
        self.pairs_of_ap[l].clone().map(|p| self.pairs[p].0).collect()
    }
}
