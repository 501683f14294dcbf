//! Small dense helpers over `nalgebra` matrices, real/complex tangent-vector
//! conversions and the finite-difference stencils shared by the numeric
//! fallbacks and the independent oracles.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

/// Converts a real tangent vector `(x1, y1, …, xn, yn)` to its
/// (1,0)-components `dz^a(X) = X^{x_a} + i X^{y_a}`.
pub fn real_to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

pub fn complex_to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Complex structure `J` on `R^{2n}` in the `(x1, y1, …)` ordering.
pub fn complex_structure(n: usize) -> RMatrix {
    let mut j = RMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        j[(2 * a + 1, 2 * a)] = 1.0;
        j[(2 * a, 2 * a + 1)] = -1.0;
    }
    j
}

/// `ζ^T M conj(η)`.
pub fn sesquilinear(m: &CMatrix, zeta: &[C64], eta: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..zeta.len() {
        for b in 0..eta.len() {
            acc += zeta[a] * m[(a, b)] * eta[b].conj();
        }
    }
    acc
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.abs()))
}

/// Deviation from Hermitian symmetry, `max |M − M^H|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Inverse of a Hermitian positive-definite matrix; fails if the Cholesky
/// factorization does not exist.
pub fn hpd_inverse(m: &CMatrix) -> Result<CMatrix> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.inverse())
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().try_inverse().ok_or(Error::SingularMetric)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

pub fn real_singular_values(m: &RMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Real matrix `A` with `A e_i = Re/Im` parts of a complex-linear map `M`.
pub fn realify(m: &CMatrix) -> RMatrix {
    let (r, c) = m.shape();
    let mut out = RMatrix::zeros(2 * r, 2 * c);
    for a in 0..r {
        for b in 0..c {
            let z = m[(a, b)];
            out[(2 * a, 2 * b)] = z.re;
            out[(2 * a, 2 * b + 1)] = -z.im;
            out[(2 * a + 1, 2 * b)] = z.im;
            out[(2 * a + 1, 2 * b + 1)] = z.re;
        }
    }
    out
}

/// Central difference with one Richardson step, `(4 D(h/2) − D(h)) / 3`.
pub fn richardson<T, F>(h: f64, mut eval: F) -> T
where
    T: core::ops::Sub<Output = T> + core::ops::Mul<f64, Output = T> + Copy,
    F: FnMut(f64) -> T,
{
    let d = |e: &mut F, s: f64| (e(s) - e(-s)) * (0.5 / s);
    let coarse = d(&mut eval, h);
    let fine = d(&mut eval, 0.5 * h);
    (fine * 4.0 - coarse) * (1.0 / 3.0)
}

/// Estimates `|∂f/∂z̄|` at `z0` from the `e^{-iα}` Fourier mode of `f` on a
/// circle of radius `r`. Holomorphic functions have no negative modes, so the
/// estimate is free of the `1/h` roundoff of difference quotients.
pub fn circle_antiholomorphic<F>(r: f64, samples: usize, mut f: F) -> C64
where
    F: FnMut(C64) -> C64,
{
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..samples {
        let alpha = 2.0 * PI * j as f64 / samples as f64;
        let e = C64::from_polar(1.0, alpha);
        acc += f(e * r) * e;
    }
    acc / (samples as f64 * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_estimator_separates_z_and_zbar() {
        let z0 = C64::new(0.3, -0.2);
        let hol = circle_antiholomorphic(0.05, 16, |d| (z0 + d) * (z0 + d) * (z0 + d));
        let anti = circle_antiholomorphic(0.05, 16, |d| (z0 + d).conj());
        assert!(hol.norm() < 1e-14);
        assert!((anti - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn richardson_is_exact_on_quartics() {
        let d = richardson(0.1, |s| {
            let x = 0.7 + s;
            x * x * x * x
        });
        assert!((d - 4.0 * 0.7f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn realify_commutes_with_complex_structure() {
        let m = CMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 2.0), C64::new(0.5, -1.0),
            C64::new(-0.3, 0.0), C64::new(0.0, 0.7),
        ]);
        let r = realify(&m);
        let j = complex_structure(2);
        assert!(max_abs_real(&(&r * &j - &j * &r)) < 1e-15);
    }
}
