//! Complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Returns `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// A factor `S` with `S S^H = A` for a Hermitian PSD matrix.
///
/// Negative eigenvalues produced by rounding are clamped to zero, so
/// rank-deficient inputs are accepted.
pub fn hermitian_sqrt(a: &CMat) -> CMat {
    let n = a.nrows();
    if a.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return CMat::zeros(n, n);
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut s = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let r = lam.max(0.0).sqrt();
        for i in 0..n {
            s[(i, j)] *= r;
        }
    }
    s
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
///
/// Falls back to LU when the Cholesky factorization fails, which can
/// only happen for matrices that are numerically indefinite.
pub fn hermitian_inverse(a: &CMat) -> CMat {
    match a.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => a
            .clone()
            .try_inverse()
            .expect("regularized Hermitian matrix must be invertible"),
    }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `a^H b` for two complex slices of equal length.
#[inline]
pub fn dotc(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}
