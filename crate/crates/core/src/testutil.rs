//! Hand-built scenarios for unit tests.

use nalgebra::DMatrix;

use crate::linalg::CMat;
use crate::scenario::{Association, GeometryConfig, NetworkScenario, Placement, ServiceClass};

fn geometry(l: usize, m: usize, k: usize) -> GeometryConfig {
    GeometryConfig {
        num_aps: l,
        antennas: m,
        num_ues: k,
        urllc_fraction: 0.0,
        side_km: 1.0,
        ap_height_m: 10.0,
        ue_height_m: 1.5,
        asd_deg: 15.0,
    }
}

/// All-eMBB scenario where every AP serves every UE, with hand-picked
/// correlation matrices (`corr[k * L + l]`) and pilots.
pub(crate) fn custom_scenario(m: usize, corr: Vec<CMat>, l_n: usize, pilot: Vec<usize>, tau_p: usize) -> NetworkScenario {
    let k_n = pilot.len();
    let serves = vec![true; k_n * l_n];
    custom_scenario_with(m, corr, l_n, pilot, tau_p, vec![ServiceClass::Embb; k_n], vec![0; k_n], serves)
}

/// Like [`custom_scenario`] with explicit classes, masters and service mask.
#[allow(clippy::too_many_arguments)]
pub(crate) fn custom_scenario_with(
    m: usize,
    corr: Vec<CMat>,
    l_n: usize,
    pilot: Vec<usize>,
    tau_p: usize,
    service: Vec<ServiceClass>,
    master_ap: Vec<usize>,
    serves: Vec<bool>,
) -> NetworkScenario {
    let k_n = pilot.len();
    let beta = DMatrix::from_fn(k_n, l_n, |k, l| corr[k * l_n + l].trace().re / m as f64);
    let placement = Placement {
        ap_pos: vec![[0.0, 0.0]; l_n],
        ue_pos: vec![[0.0, 0.0]; k_n],
        service,
        degenerate_urllc: false,
    };
    let assoc = Association { pilot, master_ap, serves };
    NetworkScenario::with_association(geometry(l_n, m, k_n), tau_p, placement, beta, corr, assoc)
}
