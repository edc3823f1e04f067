//! URLLC finite-blocklength error probability.
//!
//! A URLLC user decodes with a scaled nearest-neighbour rule that only knows
//! the mean effective channel `g_hat`. The error probability of a slot is
//! bounded by the RCUs bound, whose tail probability is evaluated with a
//! saddlepoint expansion of the cumulant generating function of the
//! generalized information density.

mod cgf;
mod gid;
mod oracle;
mod saddlepoint;

pub use cgf::{Cgf, CgfValue, ClosedFormCgf, QuadratureCgf, DEFAULT_QUADRATURE_NODES};
pub use gid::{gid, rate_nats, UrllcLink};
pub use oracle::{rcus_mc_oracle, OracleEstimate};
pub use saddlepoint::{
    evaluate_eps, optimize_s, saddlepoint_eps, saddlepoint_log_eps, CgfBackend, EpsEvaluation,
};

/// Fraction of per-UE error probabilities at or below `eps_target`.
/// Returns `None` for an empty input.
pub fn availability(eps: &[f64], eps_target: f64) -> Option<f64> {
    if eps.is_empty() {
        return None;
    }
    Some(eps.iter().filter(|&&e| e <= eps_target).count() as f64 / eps.len() as f64)
}
