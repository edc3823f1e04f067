//! Downlink simulator for eMBB/URLLC coexistence in cell-free massive MIMO.
//!
//! A network drop places access points and single-antenna users over a
//! square area, draws large-scale fading and local-scattering correlation,
//! and assigns pilots and user-centric clusters. Each coherence block then
//! realizes small-scale fading, pilot-based MMSE estimates, MR or local
//! partial MMSE precoders and a random URLLC activation pattern over `T`
//! slots. eMBB users are evaluated through the hardening-bound spectral
//! efficiency; URLLC users through the RCUs bound of a mismatched
//! scaled nearest-neighbour decoder, evaluated with a saddlepoint
//! expansion and cross-checked against a direct Monte-Carlo estimate.
//!
//! The [`experiment`] module ties everything together and writes CSV
//! results; the `cellfree` binary is its command-line front end.

pub mod channel;
pub mod coexistence;
pub mod config;
pub mod embb;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod output;
pub mod precoder;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod special;
pub mod stats;
#[cfg(test)]
mod testutil;
pub mod urllc;

pub use config::{PowerPolicy, SimConfig};
pub use error::{Result, SimError};
pub use linalg::{CMat, CVec, C64};
