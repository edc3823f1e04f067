//! Run configuration: JSON parsing, presets and validation.

use serde::{Deserialize, Serialize};
use std::path::Path;

pub use crate::coexistence::PowerPolicy;
use crate::coexistence::Strategy;
use crate::error::{Result, SimError};
use crate::precoder::PrecoderScheme;
use crate::scenario::GeometryConfig;

/// How URLLC error probabilities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgfMethod {
    ClosedForm,
    Quadrature,
}

/// Config document as written by the user. Every field is optional; missing
/// fields come from `preset` (default `fig1`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    pub num_aps: Option<usize>,
    pub antennas_per_ap: Option<usize>,
    pub num_ues: Option<usize>,
    pub urllc_fraction: Option<f64>,
    pub side_km: Option<f64>,
    pub ap_height_m: Option<f64>,
    pub ue_height_m: Option<f64>,
    pub asd_deg: Option<f64>,
    pub tau_c: Option<usize>,
    pub tau_p: Option<usize>,
    pub slots: Option<usize>,
    pub bandwidth_hz: Option<f64>,
    pub noise_w: Option<f64>,
    pub rho_max_w: Option<f64>,
    pub p_ul_w: Option<f64>,
    pub activation_prob: Option<f64>,
    /// Shorthand for a single FPA policy; exclusive with `power_policies`.
    pub omega: Option<f64>,
    pub nu: Option<f64>,
    pub power_policies: Option<Vec<PowerPolicy>>,
    pub payload_bits: Option<u32>,
    pub eps_target: Option<f64>,
    pub strategies: Option<Vec<Strategy>>,
    pub precoders: Option<Vec<PrecoderScheme>>,
    pub n_drops: Option<usize>,
    pub n_blocks: Option<usize>,
    pub n_norm_blocks: Option<usize>,
    pub n_mc_trials: Option<u64>,
    pub cgf_method: Option<CgfMethod>,
    pub quadrature_nodes: Option<usize>,
    pub master_seed: Option<u64>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Validated configuration with derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub geometry: GeometryConfig,
    pub tau_c: usize,
    pub tau_p: usize,
    /// Slots per coherence block `T`.
    pub slots: usize,
    /// `tau_c - tau_p`.
    pub tau_d: usize,
    /// Channel uses per slot, `floor(tau_d / T)`.
    pub n_d: usize,
    pub num_urllc: usize,
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub rho_max_w: f64,
    pub p_ul_w: f64,
    pub activation_prob: f64,
    pub power_policies: Vec<PowerPolicy>,
    pub payload_bits: u32,
    pub eps_target: f64,
    pub strategies: Vec<Strategy>,
    pub precoders: Vec<PrecoderScheme>,
    pub n_drops: usize,
    pub n_blocks: usize,
    pub n_norm_blocks: usize,
    pub n_mc_trials: u64,
    pub cgf_method: CgfMethod,
    pub quadrature_nodes: usize,
    pub master_seed: u64,
}

/// Named presets reproducing the three evaluation setups.
pub fn preset(name: &str) -> Result<RawConfig> {
    let base = RawConfig {
        preset: None,
        num_aps: Some(100),
        antennas_per_ap: Some(4),
        num_ues: Some(40),
        urllc_fraction: Some(0.2),
        side_km: Some(1.0),
        ap_height_m: Some(10.0),
        ue_height_m: Some(1.5),
        asd_deg: Some(15.0),
        tau_c: Some(580),
        tau_p: Some(10),
        slots: Some(5),
        bandwidth_hz: Some(20e6),
        noise_w: Some(10f64.powf(-12.4)),
        rho_max_w: Some(0.2),
        p_ul_w: Some(0.1),
        activation_prob: Some(10f64.powf(-0.5)),
        omega: None,
        nu: None,
        power_policies: Some(vec![PowerPolicy::fpa(0.2, 0.5), PowerPolicy::epa()]),
        payload_bits: Some(160),
        eps_target: Some(1e-5),
        strategies: Some(Strategy::ALL.to_vec()),
        precoders: Some(vec![PrecoderScheme::Mr, PrecoderScheme::LpMmse]),
        n_drops: Some(100),
        n_blocks: Some(500),
        n_norm_blocks: Some(200),
        n_mc_trials: Some(100_000),
        cgf_method: Some(CgfMethod::ClosedForm),
        quadrature_nodes: Some(32),
        master_seed: Some(1),
    };
    match name {
        "fig1" => Ok(base),
        "fig2" => Ok(RawConfig {
            precoders: Some(vec![PrecoderScheme::LpMmse]),
            ..base
        }),
        "fig3" => Ok(RawConfig {
            antennas_per_ap: Some(16),
            slots: Some(2),
            power_policies: Some(vec![PowerPolicy::fpa(0.8, 0.5)]),
            ..base
        }),
        other => Err(SimError::config("preset", format!("unknown preset `{other}`"))),
    }
}

macro_rules! fill {
    ($raw:ident, $base:ident, $($f:ident),*) => {
        $( let $f = $raw.$f.clone().or($base.$f.clone()).expect("preset defines every field"); )*
    };
}

/// Fills missing fields from the preset and enforces every constraint.
pub fn validate_config(raw: &RawConfig) -> Result<SimConfig> {
    let base = preset(raw.preset.as_deref().unwrap_or("fig1"))?;
    fill!(
        raw, base, num_aps, antennas_per_ap, num_ues, urllc_fraction, side_km, ap_height_m, ue_height_m, asd_deg,
        tau_c, tau_p, slots, bandwidth_hz, noise_w, rho_max_w, p_ul_w, activation_prob, payload_bits, eps_target,
        strategies, precoders, n_drops, n_blocks, n_norm_blocks, n_mc_trials, cgf_method, quadrature_nodes,
        master_seed
    );
    let geometry = GeometryConfig {
        num_aps,
        antennas: antennas_per_ap,
        num_ues,
        urllc_fraction,
        side_km,
        ap_height_m,
        ue_height_m,
        asd_deg,
    };
    geometry.validate()?;

    let power_policies = match (&raw.power_policies, raw.omega, raw.nu) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(SimError::config("omega", "give either omega/nu or power_policies, not both"))
        }
        (Some(list), None, None) => list.clone(),
        (None, None, None) => base.power_policies.clone().expect("preset defines policies"),
        (None, omega, nu) => vec![PowerPolicy::fpa(omega.unwrap_or(0.2), nu.unwrap_or(0.5))],
    };

    if tau_p == 0 {
        return Err(SimError::config("tau_p", "must be at least 1"));
    }
    if tau_p >= tau_c {
        return Err(SimError::config("tau_p", format!("must be below tau_c = {tau_c} so that tau_d > 0")));
    }
    if slots == 0 {
        return Err(SimError::config("slots", "must be at least 1"));
    }
    let tau_d = tau_c - tau_p;
    let n_d = tau_d / slots;
    if n_d == 0 {
        return Err(SimError::config("slots", format!("floor(tau_d / T) must be at least 1 (tau_d = {tau_d})")));
    }
    for (field, v) in [
        ("bandwidth_hz", bandwidth_hz),
        ("noise_w", noise_w),
        ("rho_max_w", rho_max_w),
        ("p_ul_w", p_ul_w),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(SimError::config(field, "must be positive and finite"));
        }
    }
    if !(0.0..=1.0).contains(&activation_prob) {
        return Err(SimError::config("activation_prob", "must lie in [0, 1]"));
    }
    if !(eps_target > 0.0 && eps_target <= 1.0) {
        return Err(SimError::config("eps_target", "must lie in (0, 1]"));
    }
    if power_policies.is_empty() {
        return Err(SimError::config("power_policies", "must not be empty"));
    }
    for (i, p) in power_policies.iter().enumerate() {
        if !(p.omega > 0.0 && p.omega < 1.0) {
            return Err(SimError::config("power_policies.omega", "must lie in (0, 1)"));
        }
        if !p.nu.is_finite() {
            return Err(SimError::config("power_policies.nu", "must be finite"));
        }
        if p.name.is_empty() || p.name.contains([',', '"', '\n']) {
            return Err(SimError::config("power_policies.name", "must be a nonempty plain label"));
        }
        if power_policies[..i].iter().any(|q| q.name == p.name) {
            return Err(SimError::config("power_policies.name", format!("duplicate policy `{}`", p.name)));
        }
    }
    if strategies.is_empty() {
        return Err(SimError::config("strategies", "must not be empty"));
    }
    if precoders.is_empty() {
        return Err(SimError::config("precoders", "must not be empty"));
    }
    let mut strategies = strategies;
    strategies.sort();
    strategies.dedup();
    let mut precoders = precoders;
    precoders.sort();
    precoders.dedup();
    if n_drops == 0 {
        return Err(SimError::config("n_drops", "must be at least 1"));
    }
    if n_blocks < 2 {
        return Err(SimError::config("n_blocks", "must be at least 2"));
    }
    if n_norm_blocks == 0 {
        return Err(SimError::config("n_norm_blocks", "must be at least 1"));
    }
    if n_mc_trials < 1000 {
        return Err(SimError::config("n_mc_trials", "must be at least 1000"));
    }
    if quadrature_nodes < 4 {
        return Err(SimError::config("quadrature_nodes", "must be at least 4"));
    }
    let num_urllc = geometry.num_urllc();
    Ok(SimConfig {
        geometry,
        tau_c,
        tau_p,
        slots,
        tau_d,
        n_d,
        num_urllc,
        bandwidth_hz,
        noise_w,
        rho_max_w,
        p_ul_w,
        activation_prob,
        power_policies,
        payload_bits,
        eps_target,
        strategies,
        precoders,
        n_drops,
        n_blocks,
        n_norm_blocks,
        n_mc_trials,
        cgf_method,
        quadrature_nodes,
        master_seed,
    })
}

impl SimConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        validate_config(raw)
    }

    pub fn from_preset(name: &str) -> Result<Self> {
        validate_config(&RawConfig {
            preset: Some(name.into()),
            ..RawConfig::default()
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        validate_config(&RawConfig::from_path(path)?)
    }
}
