//! Uniform grids on the flat torus `(R/2πZ)^d`, FFTs, spectral derivatives
//! and periodic trapezoidal quadrature.
//!
//! Grid data is stored with axis 0 varying fastest: the sample at multi-index
//! `(i_0, …, i_{d-1})` lives at `Σ i_k N^k`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::{Error, Result, C64};

/// In-place radix-2 Cooley–Tukey transform. `inverse` flips the sign of the
/// exponent; no normalization is applied in either direction.
///
/// Panics if the length is not a power of two.
pub fn fft(buf: &mut [C64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // twiddles evaluated directly rather than by recurrence
                let w = C64::from_polar(1.0, ang * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Signed wavenumber of FFT bin `m` on an `n`-point axis. The Nyquist bin
/// maps to `n/2`.
#[inline]
pub fn wavenumber(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// A uniform `N^d` grid on the flat torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TorusGrid {
    pub dim: usize,
    pub n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::BadResolution(n));
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(Self { dim, n })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight of a single grid cell.
    pub fn cell_weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            out.push(idx % self.n);
            idx /= self.n;
        }
        out
    }

    pub fn angles(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(idx).into_iter().map(|i| i as f64 * h).collect()
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::ResolutionMismatch { expected: self.len(), got });
        }
        Ok(())
    }

    /// Applies a 1-D FFT along every axis.
    pub fn fftn(&self, data: &mut [C64], inverse: bool) {
        let mut line = vec![C64::new(0.0, 0.0); self.n];
        for axis in 0..self.dim {
            self.for_each_line(axis, |starts, stride| {
                for &s in starts {
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[s + k * stride];
                    }
                    fft(&mut line, inverse);
                    for (k, v) in line.iter().enumerate() {
                        data[s + k * stride] = *v;
                    }
                }
            });
        }
    }

    fn for_each_line(&self, axis: usize, mut f: impl FnMut(&[usize], usize)) {
        let stride = self.stride(axis);
        let starts: Vec<usize> = (0..self.len())
            .filter(|&i| (i / stride).is_multiple_of(self.n))
            .collect();
        f(&starts, stride);
    }

    /// Normalized Fourier coefficients `c_k` with `f(θ) = Σ c_k e^{i k·θ}`,
    /// in FFT bin order.
    pub fn coefficients(&self, samples: &[C64]) -> Result<Vec<C64>> {
        self.check_len(samples.len())?;
        let mut data = samples.to_vec();
        self.fftn(&mut data, false);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(data)
    }

    /// Spectral partial derivative `∂^order / ∂θ_axis^order`. The Nyquist
    /// mode is dropped for odd orders.
    pub fn derivative(&self, samples: &[C64], axis: usize, order: u32) -> Result<Vec<C64>> {
        self.check_len(samples.len())?;
        if axis >= self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: axis + 1 });
        }
        let mut data = samples.to_vec();
        self.fftn(&mut data, false);
        let stride = self.stride(axis);
        let scale = 1.0 / self.len() as f64;
        for (i, c) in data.iter_mut().enumerate() {
            let m = (i / stride) % self.n;
            let k = wavenumber(m, self.n);
            let factor = if order % 2 == 1 && 2 * m == self.n {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, k as f64).powu(order)
            };
            *c *= factor * scale;
        }
        self.fftn(&mut data, true);
        Ok(data)
    }

    /// Mixed second derivative `∂²/∂θ_a∂θ_b`.
    pub fn mixed_derivative(&self, samples: &[C64], a: usize, b: usize) -> Result<Vec<C64>> {
        if a == b {
            return self.derivative(samples, a, 2);
        }
        let first = self.derivative(samples, a, 1)?;
        self.derivative(&first, b, 1)
    }

    /// Fraction of coefficient mass (ℓ1) carried by modes with some
    /// `|k_i| > cutoff`.
    pub fn tail_fraction(&self, samples: &[C64], cutoff: usize) -> Result<f64> {
        let coeffs = self.coefficients(samples)?;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (i, c) in coeffs.iter().enumerate() {
            let m = c.norm();
            total += m;
            let outside = self
                .multi_index(i)
                .into_iter()
                .any(|j| wavenumber(j, self.n).unsigned_abs() as usize > cutoff);
            if outside {
                tail += m;
            }
        }
        Ok(if total > 0.0 { tail / total } else { 0.0 })
    }

    /// Periodic trapezoidal rule `Σ f_i w_i · (2π/N)^d` with optional
    /// per-point weights.
    pub fn quadrature(&self, samples: &[C64], weights: Option<&[f64]>) -> Result<C64> {
        self.check_len(samples.len())?;
        let mut acc = C64::new(0.0, 0.0);
        match weights {
            Some(w) => {
                self.check_len(w.len())?;
                for (f, w) in samples.iter().zip(w) {
                    acc += *f * *w;
                }
            }
            None => {
                for f in samples {
                    acc += *f;
                }
            }
        }
        Ok(acc * self.cell_weight())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn naive_dft(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| x[j] * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn fft_matches_naive_dft() {
        let x: Vec<C64> = (0..16)
            .map(|j| C64::new((j as f64 * 0.37).sin(), (j as f64).cos() * 0.5))
            .collect();
        let mut y = x.clone();
        fft(&mut y, false);
        for (a, b) in y.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
        fft(&mut y, true);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / 16.0 - b).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_trig_polynomial_is_exact() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f: Vec<C64> = (0..grid.len())
            .map(|i| {
                let t = grid.angles(i);
                C64::new((3.0 * t[0]).sin() * (2.0 * t[1]).cos(), t[1].sin())
            })
            .collect();
        let d1 = grid.derivative(&f, 1, 1).unwrap();
        let d00 = grid.derivative(&f, 0, 2).unwrap();
        let d01 = grid.mixed_derivative(&f, 0, 1).unwrap();
        for i in 0..grid.len() {
            let t = grid.angles(i);
            let e1 = C64::new(-2.0 * (3.0 * t[0]).sin() * (2.0 * t[1]).sin(), t[1].cos());
            let e00 = C64::new(-9.0 * (3.0 * t[0]).sin() * (2.0 * t[1]).cos(), 0.0);
            let e01 = C64::new(-6.0 * (3.0 * t[0]).cos() * (2.0 * t[1]).sin(), 0.0);
            assert!((d1[i] - e1).norm() < 1e-12);
            assert!((d00[i] - e00).norm() < 1e-11);
            assert!((d01[i] - e01).norm() < 1e-11);
        }
    }

    #[test]
    fn quadrature_of_odd_function_vanishes() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let f: Vec<C64> = (0..32)
            .map(|i| C64::new(grid.angles(i)[0].sin().powi(3), 0.0))
            .collect();
        assert!(grid.quadrature(&f, None).unwrap().norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_resolution() {
        assert_eq!(TorusGrid::new(1, 12), Err(Error::BadResolution(12)));
        assert_eq!(TorusGrid::new(1, 2), Err(Error::BadResolution(2)));
    }
}
