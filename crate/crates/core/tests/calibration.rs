//! MMSE estimator calibration against the model covariances.

mod common;

#[test]
fn estimate_and_error_covariances_match_the_model() {
    let cfg = common::small_config();
    let (cov, cross) = common::calibration_errors(&cfg, 10_000, 21);
    eprintln!("covariance error {cov:.4}, cross {cross:.4}");
    assert!(cov <= 0.05, "covariance error {cov}");
    assert!(cross <= 0.03, "cross-covariance {cross}");
}
