//! Gaussian tail functions that stay accurate deep in the tail.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Gaussian tail `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        (x * x).exp() * erfc(x)
    } else {
        // asymptotic series; the truncation error is below 1e-13 here
        let inv2 = 1.0 / (2.0 * x * x);
        let series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2.powi(3) + 105.0 * inv2.powi(4);
        series / (x * PI.sqrt())
    }
}

/// `exp(u^2 / 2) Q(u)`, finite for any `u >= 0`.
pub fn scaled_q(u: f64) -> f64 {
    0.5 * erfcx(u * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_reference_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-14);
        assert!((q_function(-1.0) - 0.841_344_746_068_543).abs() < 1e-14);
        let q6 = 9.865_876_450_376_946e-10;
        assert!((q_function(6.0) / q6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erfcx_is_continuous_at_branch_switch() {
        let below = erfcx(26.0 - 1e-9);
        let above = erfcx(26.0);
        assert!((below / above - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_q_matches_direct_product() {
        for &u in &[0.0, 0.3, 1.0, 3.0, 8.0] {
            let direct = (u * u / 2.0_f64).exp() * q_function(u);
            assert!((scaled_q(u) / direct - 1.0).abs() < 1e-12, "u = {u}");
        }
        // large arguments behave like 1 / (u sqrt(2 pi))
        let u = 1e3;
        assert!((scaled_q(u) * u * (2.0 * PI).sqrt() - 1.0).abs() < 1e-6);
    }
}
