//! Saddlepoint approximation of the RCUs tail probability and the choice of
//! the decoder parameter `s`.

use super::cgf::{Cgf, ClosedFormCgf, QuadratureCgf};
use super::gid::UrllcLink;
use super::oracle::rcus_mc_oracle;
use crate::special::{q_function, scaled_q};

/// Natural log of the saddlepoint estimate of
/// `P[sum_n i_s <= ln((2^b - 1) / r)]` for `n` i.i.d. densities.
/// Clipped at zero (probability one).
pub fn saddlepoint_log_eps<C: Cgf>(cgf: &C, rate: f64, n: usize) -> f64 {
    saddlepoint_detail(cgf, rate, n).0
}

/// Log-probability and the saddlepoint used, when one was solved for.
fn saddlepoint_detail<C: Cgf>(cgf: &C, rate: f64, n: usize) -> (f64, Option<f64>) {
    if rate == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, None);
    }
    if rate >= cgf.mean() {
        return (0.0, Some(0.0));
    }
    let nf = n as f64;
    let dmin = cgf.domain_min();
    if dmin < -1.0 {
        let at1 = cgf.eval(-1.0);
        if rate < at1.k1 {
            // below the critical rate the tilt saturates at -1
            let a = (nf * at1.k2).sqrt();
            let base = nf * (at1.k + rate);
            if a == 0.0 {
                return (base.min(0.0), Some(-1.0));
            }
            let b = nf * (at1.k1 - rate) / a;
            let corr = scaled_q(a + b) * (-0.5 * b * b).exp() + q_function(-b);
            return ((base + corr.ln()).min(0.0), Some(-1.0));
        }
    }
    let z = solve_tilt(cgf, rate, dmin.max(-1.0));
    let v = cgf.eval(z);
    let theta = -z;
    let u = (nf * v.k2).sqrt();
    let corr = scaled_q(theta * u) + scaled_q((1.0 - theta) * u);
    ((nf * (v.k - z * rate) + corr.ln()).min(0.0), Some(z))
}

/// Root of `kappa'(z) = rate` on `(lo, 0)` by Newton steps safeguarded with
/// bisection. `kappa'` is increasing, `kappa'(0) > rate` and
/// `kappa'(lo+) <= rate`.
fn solve_tilt<C: Cgf>(cgf: &C, rate: f64, lo: f64) -> f64 {
    let (mut a, mut b) = (lo, 0.0);
    let mut z = 0.5 * (a + b);
    for _ in 0..200 {
        let v = cgf.eval(z);
        let f = v.k1 - rate;
        if f.abs() <= 1e-13 * rate.abs().max(1.0) {
            break;
        }
        if f > 0.0 {
            b = z;
        } else {
            a = z;
        }
        let newton = z - f / v.k2;
        z = if v.k2 > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if b - a <= 1e-15 {
            break;
        }
    }
    z
}

/// Saddlepoint error probability with the closed-form CGF at fixed `s`.
pub fn saddlepoint_eps(link: &UrllcLink, s: f64) -> f64 {
    closed_form_log_eps(link, s).exp()
}

fn closed_form_log_eps(link: &UrllcLink, s: f64) -> f64 {
    saddlepoint_log_eps(&ClosedFormCgf::new(link, s), link.rate_nats(), link.n_d)
}

/// Minimizes the saddlepoint log error probability over
/// `s in [1e-3 s0, 1e3 s0]`: a log-spaced grid locates the basin, golden
/// section refines it. A flat objective returns `s0`, and `s0` is kept
/// whenever the search does not beat it.
pub fn optimize_s(link: &UrllcLink) -> f64 {
    let s0 = link.s0();
    if !s0.is_finite() || s0 <= 0.0 {
        return s0;
    }
    let x0 = s0.ln();
    let f = |x: f64| closed_form_log_eps(link, x.exp());
    let step = std::f64::consts::LN_10 / 4.0;
    let grid: Vec<(f64, f64)> = (-12..=12).map(|i| x0 + i as f64 * step).map(|x| (x, f(x))).collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| grid[i].1.total_cmp(&grid[j].1))
        .unwrap();
    let worst = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    if !(grid[best].1 < worst) {
        return s0;
    }
    let mut a = grid[best.saturating_sub(1)].0;
    let mut b = grid[(best + 1).min(grid.len() - 1)].0;
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-4 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let (mut x, mut fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    if grid[best].1 < fx {
        (x, fx) = grid[best];
    }
    if f(x0) <= fx {
        return s0;
    }
    x.exp()
}

/// How the CGF is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CgfBackend {
    ClosedForm,
    /// Tensor Gauss-Hermite; falls back to the Monte-Carlo oracle with
    /// `fallback_trials` draws when the rule has not converged.
    Quadrature {
        nodes: usize,
        fallback_trials: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsEvaluation {
    pub eps: f64,
    pub s: f64,
    /// Set when the Monte-Carlo oracle replaced the saddlepoint value.
    pub fallback: bool,
}

/// Error probability of one slot with an optimized decoder parameter.
/// The parameter search always uses the closed-form CGF.
pub fn evaluate_eps(link: &UrllcLink, backend: CgfBackend) -> EpsEvaluation {
    let s = optimize_s(link);
    match backend {
        CgfBackend::ClosedForm => EpsEvaluation {
            eps: saddlepoint_eps(link, s),
            s,
            fallback: false,
        },
        CgfBackend::Quadrature {
            nodes,
            fallback_trials,
            seed,
        } => {
            let cgf = QuadratureCgf::new(link, s, nodes);
            let (log_eps, z) = saddlepoint_detail(&cgf, link.rate_nats(), link.n_d);
            if z.is_none_or(|z| cgf.converged(z)) {
                return EpsEvaluation {
                    eps: log_eps.exp(),
                    s,
                    fallback: false,
                };
            }
            log::warn!("quadrature CGF did not converge; using the Monte-Carlo oracle");
            let mut rng = crate::rng::rng_from_seed(seed);
            let est = rcus_mc_oracle(link, s, fallback_trials, &mut rng);
            EpsEvaluation {
                eps: est.estimate,
                s,
                fallback: true,
            }
        }
    }
}
