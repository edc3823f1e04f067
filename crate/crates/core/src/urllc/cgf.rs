//! Cumulant generating function `kappa(z) = ln E[exp(z i_s)]` of the
//! information density for `q ~ CN(0,1)` and `y = g q + n`, `n ~ CN(0, sigma^2)`.
//!
//! Writing `q` and `n / sigma` as a standard complex Gaussian vector `u`,
//! `i_s = c - u^H Q u` with `c = ln(1 + s|g_hat|^2)` and the rank-two
//! Hermitian form `Q = s a1 a1^H - s2 a2 a2^H`, where `a1 = (g - g_hat, sigma)`,
//! `a2 = (g, sigma)` and `s2 = s / (1 + s|g_hat|^2)`. With the eigenvalues
//! `l1 >= 0 >= l2` of `Q`, `u^H Q u = l1 X1 + l2 X2` for independent unit
//! exponentials, which gives `kappa` in closed form on `1 + z l > 0`.

use super::gid::{gid, UrllcLink};
use crate::linalg::C64;
use crate::quadrature::GaussHermite;

/// Default Gauss-Hermite nodes per real dimension for [`QuadratureCgf`].
pub const DEFAULT_QUADRATURE_NODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfValue {
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
}

pub trait Cgf {
    fn eval(&self, z: f64) -> CgfValue;
    /// Infimum of the open domain of `kappa` (may be `-inf`).
    fn domain_min(&self) -> f64;
    fn mean(&self) -> f64 {
        self.eval(0.0).k1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCgf {
    pub c: f64,
    pub l1: f64,
    pub l2: f64,
}

impl ClosedFormCgf {
    pub fn new(link: &UrllcLink, s: f64) -> Self {
        let sigma2 = link.sigma2_eff;
        let sn = s * sigma2;
        let gh2 = link.g_hat.norm_sqr() / sigma2;
        let mis2 = (link.g_eff - link.g_hat).norm_sqr() / sigma2;
        let g2 = link.g_eff.norm_sqr() / sigma2;
        let sg = sn * gh2;
        let s2 = sn / (1.0 + sg);
        let tr = sn * (mis2 + 1.0) - s2 * (g2 + 1.0);
        let det = -sn * s2 * gh2;
        let root = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let (l1, l2) = if tr >= 0.0 {
            let l1 = 0.5 * (tr + root);
            (l1, if l1 > 0.0 { det / l1 } else { 0.0 })
        } else {
            let l2 = 0.5 * (tr - root);
            (det / l2, l2)
        };
        ClosedFormCgf {
            c: sg.ln_1p(),
            l1,
            l2,
        }
    }
}

impl Cgf for ClosedFormCgf {
    fn eval(&self, z: f64) -> CgfValue {
        let mut v = CgfValue { k: z * self.c, k1: self.c, k2: 0.0 };
        for l in [self.l1, self.l2] {
            let d = 1.0 + z * l;
            v.k -= (z * l).ln_1p();
            v.k1 -= l / d;
            v.k2 += (l / d) * (l / d);
        }
        v
    }

    fn domain_min(&self) -> f64 {
        if self.l1 > 0.0 {
            -1.0 / self.l1
        } else {
            f64::NEG_INFINITY
        }
    }

    fn mean(&self) -> f64 {
        self.c - self.l1 - self.l2
    }
}

/// Tensor Gauss-Hermite evaluation over the four real dimensions of
/// `(q, n)`. A half-size rule is kept to check convergence.
#[derive(Debug, Clone)]
pub struct QuadratureCgf {
    fine: NodeSet,
    coarse: NodeSet,
}

#[derive(Debug, Clone)]
struct NodeSet {
    value: Vec<f64>,
    ln_weight: Vec<f64>,
}

impl NodeSet {
    fn new(link: &UrllcLink, s: f64, nodes: usize) -> Self {
        let gh = GaussHermite::new(nodes);
        let sigma = link.sigma2_eff.sqrt();
        let g = link.g_eff / sigma;
        let g_hat = link.g_hat / sigma;
        let sn = s * link.sigma2_eff;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let n = gh.nodes.len();
        let mut value = Vec::with_capacity(n.pow(4));
        let mut ln_weight = Vec::with_capacity(n.pow(4));
        for (&x1, &w1) in gh.nodes.iter().zip(&gh.weights) {
            for (&x2, &w2) in gh.nodes.iter().zip(&gh.weights) {
                let q = C64::new(x1 * h, x2 * h);
                for (&x3, &w3) in gh.nodes.iter().zip(&gh.weights) {
                    for (&x4, &w4) in gh.nodes.iter().zip(&gh.weights) {
                        let y = g * q + C64::new(x3 * h, x4 * h);
                        value.push(gid(q, y, g_hat, sn));
                        ln_weight.push((w1 * w2 * w3 * w4).ln());
                    }
                }
            }
        }
        NodeSet { value, ln_weight }
    }

    fn eval(&self, z: f64) -> CgfValue {
        let peak = self
            .value
            .iter()
            .zip(&self.ln_weight)
            .map(|(v, w)| w + z * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (v, w) in self.value.iter().zip(&self.ln_weight) {
            let e = (w + z * v - peak).exp();
            m0 += e;
            m1 += e * v;
            m2 += e * v * v;
        }
        let k1 = m1 / m0;
        CgfValue {
            k: peak + m0.ln(),
            k1,
            k2: (m2 / m0 - k1 * k1).max(0.0),
        }
    }
}

impl QuadratureCgf {
    pub fn new(link: &UrllcLink, s: f64, nodes: usize) -> Self {
        assert!(nodes >= 4, "need at least four nodes per dimension");
        QuadratureCgf {
            fine: NodeSet::new(link, s, nodes),
            coarse: NodeSet::new(link, s, nodes / 2),
        }
    }

    /// Whether the fine and half-size rules agree at `z`.
    pub fn converged(&self, z: f64) -> bool {
        let a = self.fine.eval(z);
        let b = self.coarse.eval(z);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-3 * x.abs().max(1.0);
        close(a.k, b.k) && close(a.k1, b.k1) && close(a.k2, b.k2)
    }
}

impl Cgf for QuadratureCgf {
    fn eval(&self, z: f64) -> CgfValue {
        self.fine.eval(z)
    }

    fn domain_min(&self) -> f64 {
        f64::NEG_INFINITY
    }
}
