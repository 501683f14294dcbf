//! Fourier continuation of torus data into a complex tube, complexified
//! immersions and the pushforward of tangential fields.
//!
//! A real-analytic function on the torus extends holomorphically by
//! substituting complex angles `w = θ + iφ` into its Fourier series. The
//! extension is unique, so no chart-by-chart recentering is needed.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::fields::{divergence_from_jets, FieldJet};
use crate::kahler::MetricJet;
use crate::linalg::{self, CMatrix};
use crate::spectral::{wavenumber, TorusGrid};
use crate::submanifold::TorusImmersion;
use crate::{Error, Result, C64, I};

/// Outer-shell mass allowed relative to the weighted coefficient sum.
pub const DECAY_HEADROOM: f64 = 1e6 * f64::EPSILON;
/// Upper bound for automatically chosen tube half-widths.
pub const MAX_HALF_WIDTH: f64 = 1.0;
/// Condition-number cutoff (as `σ_min / σ_max`) for complexified Jacobians.
pub const JACOBIAN_CUTOFF: f64 = 1e-10;

/// Whether coefficients are exact or come from sampled data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SeriesSource {
    Exact,
    Sampled,
}

/// `f(θ) = Σ_{|k|∞ ≤ K} c_k e^{i k·θ}` on the `d`-torus.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    dim: usize,
    bandwidth: usize,
    coeffs: Vec<C64>,
    source: SeriesSource,
}

impl FourierSeries {
    fn side(bandwidth: usize) -> usize {
        2 * bandwidth + 1
    }

    fn len_for(dim: usize, bandwidth: usize) -> usize {
        Self::side(bandwidth).pow(dim as u32)
    }

    fn index(&self, k: &[i64]) -> Option<usize> {
        let side = Self::side(self.bandwidth);
        let mut idx = 0;
        let mut stride = 1;
        for &ki in k {
            if ki.unsigned_abs() as usize > self.bandwidth {
                return None;
            }
            idx += (ki + self.bandwidth as i64) as usize * stride;
            stride *= side;
        }
        Some(idx)
    }

    fn wavevector(&self, mut idx: usize) -> Vec<i64> {
        let side = Self::side(self.bandwidth);
        (0..self.dim)
            .map(|_| {
                let k = (idx % side) as i64 - self.bandwidth as i64;
                idx /= side;
                k
            })
            .collect()
    }

    pub fn zero(dim: usize, bandwidth: usize) -> Self {
        Self {
            dim,
            bandwidth,
            coeffs: vec![C64::new(0.0, 0.0); Self::len_for(dim, bandwidth)],
            source: SeriesSource::Exact,
        }
    }

    /// Series with explicitly given coefficients; bandwidth is the largest
    /// `|k_i|` present.
    pub fn from_coefficients(dim: usize, terms: &[(Vec<i64>, C64)]) -> Result<Self> {
        let bandwidth = terms
            .iter()
            .flat_map(|(k, _)| k.iter().map(|x| x.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        let mut s = Self::zero(dim, bandwidth);
        for (k, c) in terms {
            if k.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.len() });
            }
            let i = s.index(k).expect("bandwidth covers all terms");
            s.coeffs[i] += c;
        }
        Ok(s)
    }

    /// Coefficients of grid samples truncated to `|k_i| ≤ bandwidth`, which
    /// must stay below the Nyquist mode.
    pub fn from_samples(grid: &TorusGrid, samples: &[C64], bandwidth: usize) -> Result<Self> {
        if 2 * bandwidth >= grid.n {
            return Err(Error::BadResolution(grid.n));
        }
        let raw = grid.coefficients(samples)?;
        let mut s = Self::zero(grid.dim, bandwidth);
        s.source = SeriesSource::Sampled;
        for (i, c) in raw.iter().enumerate() {
            let k: Vec<i64> = grid.multi_index(i).into_iter().map(|m| wavenumber(m, grid.n)).collect();
            if let Some(j) = s.index(&k) {
                s.coeffs[j] = *c;
            }
        }
        Ok(s)
    }

    /// Largest bandwidth a grid can resolve.
    pub fn full_bandwidth(grid: &TorusGrid) -> usize {
        grid.n / 2 - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn source(&self) -> SeriesSource {
        self.source
    }

    pub fn coefficient(&self, k: &[i64]) -> C64 {
        self.index(k).map(|i| self.coeffs[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    /// Iterates `(k, c_k)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<i64>, C64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, c)| (self.wavevector(i), *c))
    }

    pub fn truncated(&self, bandwidth: usize) -> Self {
        let mut s = Self::zero(self.dim, bandwidth.min(self.bandwidth));
        s.source = self.source;
        for (k, c) in self.terms() {
            if let Some(j) = s.index(&k) {
                s.coeffs[j] = c;
            }
        }
        s
    }

    /// `∂/∂θ_axis`, termwise.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut s = self.clone();
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            let k = self.wavevector(i)[axis];
            *c *= I * k as f64;
        }
        s
    }

    /// `max |c_{−k} − conj(c_k)|`; zero for real-valued series.
    pub fn reality_defect(&self) -> f64 {
        self.terms()
            .map(|(k, c)| {
                let neg: Vec<i64> = k.iter().map(|x| -x).collect();
                (self.coefficient(&neg) - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    fn weighted(&self, eta: f64, keep: impl Fn(&[i64]) -> bool) -> f64 {
        self.terms()
            .filter(|(k, _)| keep(k))
            .map(|(k, c)| c.norm() * (k.iter().map(|x| x.abs()).sum::<i64>() as f64 * eta).exp())
            .sum()
    }

    /// `Σ |c_k| e^{|k|₁ η}`.
    pub fn weighted_sum(&self, eta: f64) -> f64 {
        self.weighted(eta, |_| true)
    }

    /// Weighted mass of the outermost shell `|k|∞ = K`.
    pub fn shell_mass(&self, eta: f64) -> f64 {
        let b = self.bandwidth as i64;
        self.weighted(eta, |k| k.iter().any(|x| x.abs() == b))
    }

    /// `Σ_{|k|∞ > K} |c_k| e^{|k|₁ η}`.
    pub fn tail_bound(&self, bandwidth: usize, eta: f64) -> f64 {
        let b = bandwidth as i64;
        self.weighted(eta, |k| k.iter().any(|x| x.abs() > b))
    }

    fn powers(&self, w: &[C64]) -> Vec<Vec<C64>> {
        let b = self.bandwidth as i64;
        w.iter().map(|wj| (-b..=b).map(|k| (I * wj * k as f64).exp()).collect()).collect()
    }

    /// `Σ c_k e^{i k·w}` at complex angles; no tube check.
    pub fn eval(&self, w: &[C64]) -> C64 {
        let pw = self.powers(w);
        let b = self.bandwidth as i64;
        self.terms().fold(C64::new(0.0, 0.0), |acc, (k, c)| {
            acc + k.iter().enumerate().fold(c, |m, (j, kj)| m * pw[j][(kj + b) as usize])
        })
    }

    /// Holomorphic gradient `∂/∂w_j`.
    pub fn gradient(&self, w: &[C64]) -> Vec<C64> {
        (0..self.dim).map(|j| self.derivative(j).eval(w)).collect()
    }

    /// Values on a grid fine enough to hold the series, by inverse FFT.
    pub fn to_grid(&self, grid: &TorusGrid) -> Result<Vec<C64>> {
        if grid.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: grid.dim });
        }
        if 2 * self.bandwidth >= grid.n {
            return Err(Error::BadResolution(grid.n));
        }
        let mut data = vec![C64::new(0.0, 0.0); grid.len()];
        for (k, c) in self.terms() {
            let mut idx = 0;
            let mut stride = 1;
            for kj in k {
                idx += kj.rem_euclid(grid.n as i64) as usize * stride;
                stride *= grid.n;
            }
            data[idx] = c;
        }
        grid.fftn(&mut data, true);
        Ok(data)
    }
}

/// The strip `|Im w_k| ≤ η`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ComplexTube {
    pub half_width: f64,
}

impl ComplexTube {
    pub fn contains(&self, w: &[C64]) -> bool {
        w.iter().all(|x| x.im.abs() <= self.half_width * (1.0 + 1e-12))
    }
}

fn decay_ok(f: &FourierSeries, eta: f64) -> bool {
    let total = f.weighted_sum(eta);
    if !total.is_finite() {
        return false;
    }
    match f.source {
        SeriesSource::Exact => true,
        SeriesSource::Sampled => f.shell_mass(eta) <= DECAY_HEADROOM * total,
    }
}

/// Largest `η ≤ 1` whose outer-shell mass stays within the headroom,
/// halved for margin.
pub fn auto_tube(f: &FourierSeries) -> Result<ComplexTube> {
    if !decay_ok(f, 0.0) {
        return Err(Error::InsufficientDecay { shell_mass: f.shell_mass(0.0) });
    }
    let (mut lo, mut hi) = (0.0, MAX_HALF_WIDTH);
    if decay_ok(f, hi) {
        lo = hi;
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if decay_ok(f, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(ComplexTube { half_width: 0.5 * lo })
}

/// A holomorphic function on a tube, given by its Fourier series.
#[derive(Debug, Clone)]
pub struct HolomorphicExtension {
    pub series: FourierSeries,
    pub tube: ComplexTube,
}

/// Extends `f` to the tube; fails if the coefficient sum is not under
/// control at the requested half-width.
pub fn extend_fourier(f: &FourierSeries, tube: ComplexTube) -> Result<HolomorphicExtension> {
    if !(tube.half_width >= 0.0) || !decay_ok(f, tube.half_width) {
        return Err(Error::DivergentAtWidth { half_width: tube.half_width });
    }
    Ok(HolomorphicExtension { series: f.clone(), tube })
}

impl HolomorphicExtension {
    pub fn eval(&self, w: &[C64]) -> Result<C64> {
        if !self.tube.contains(w) {
            return Err(Error::OutsideTube { half_width: self.tube.half_width });
        }
        Ok(self.series.eval(w))
    }

    pub fn gradient(&self, w: &[C64]) -> Result<Vec<C64>> {
        if !self.tube.contains(w) {
            return Err(Error::OutsideTube { half_width: self.tube.half_width });
        }
        Ok(self.series.gradient(w))
    }

    /// Largest circle-estimated `|∂f/∂w̄_j|` over the points.
    pub fn cr_residual(&self, points: &[Vec<C64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for w in points {
            for j in 0..w.len() {
                let r = linalg::circle_antiholomorphic(1e-2, 16, |d| {
                    let mut u = w.clone();
                    u[j] += d;
                    self.series.eval(&u)
                });
                worst = worst.max(r.norm());
            }
        }
        worst
    }
}

/// Holomorphic extension `F̃(w)` of an immersion's chart components.
#[derive(Debug, Clone)]
pub struct ComplexifiedImmersion {
    pub chart: usize,
    pub components: Vec<HolomorphicExtension>,
    pub tube: ComplexTube,
    /// `∂F̃/∂w` at the grid points of `L`.
    pub jacobians: Vec<CMatrix>,
    pub inverse_jacobians: Vec<CMatrix>,
    /// Largest `σ_max / σ_min` over the grid.
    pub max_condition: f64,
    /// `max |F̃(θ) − F(θ)|` over the grid.
    pub restriction_defect: f64,
}

/// Componentwise Fourier continuation of `L` with the Jacobian checked for
/// invertibility on `L`.
pub fn complexify_immersion(l: &TorusImmersion) -> Result<ComplexifiedImmersion> {
    let n = l.dim();
    let bandwidth = FourierSeries::full_bandwidth(&l.grid);
    let series = (0..n)
        .map(|a| FourierSeries::from_samples(&l.grid, &l.component(a), bandwidth))
        .collect::<Result<Vec<_>>>()?;
    let mut half_width = MAX_HALF_WIDTH;
    for s in &series {
        half_width = half_width.min(auto_tube(s)?.half_width);
    }
    let tube = ComplexTube { half_width };
    let components = series.iter().map(|s| extend_fourier(s, tube)).collect::<Result<Vec<_>>>()?;
    let mut jacobians = Vec::with_capacity(l.len());
    let mut inverses = Vec::with_capacity(l.len());
    let mut max_condition: f64 = 0.0;
    for i in 0..l.len() {
        let j = CMatrix::from_fn(n, n, |a, k| l.tangent(i, k)[a]);
        let s = linalg::singular_values(&j);
        let ratio = s[n - 1] / s[0];
        if !(ratio > JACOBIAN_CUTOFF) {
            return Err(Error::JacobianSingular { index: i, condition: 1.0 / ratio });
        }
        max_condition = max_condition.max(1.0 / ratio);
        inverses.push(linalg::inverse(&j)?);
        jacobians.push(j);
    }
    let mut defect: f64 = 0.0;
    for (a, s) in series.iter().enumerate() {
        let back = s.to_grid(&l.grid)?;
        for (i, v) in back.iter().enumerate() {
            defect = defect.max((v - l.samples()[i][a]).norm());
        }
    }
    Ok(ComplexifiedImmersion {
        chart: l.chart,
        components,
        tube,
        jacobians,
        inverse_jacobians: inverses,
        max_condition,
        restriction_defect: defect,
    })
}

impl ComplexifiedImmersion {
    pub fn eval(&self, w: &[C64]) -> Result<Vec<C64>> {
        self.components.iter().map(|c| c.eval(w)).collect()
    }

    /// `∂F̃^a/∂w_k` at a tube point.
    pub fn jacobian_at(&self, w: &[C64]) -> Result<CMatrix> {
        let n = self.components.len();
        let rows = self.components.iter().map(|c| c.gradient(w)).collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_fn(n, n, |a, k| rows[a][k]))
    }
}

/// An ambient holomorphic field near `L`, known through its jets on `L`.
#[derive(Debug, Clone)]
pub struct PushforwardField {
    pub jets: Vec<FieldJet>,
}

/// `Ṽ = Σ_k ã_k ∂F̃/∂w_k`, with ambient Jacobian `DṼ = D · (∂F̃/∂w)^{-1}` on
/// `L`, where `D_{·m} = Σ_k (∂_m a_k ∂_kF + a_k ∂_m∂_kF)`.
pub fn pushforward_field(
    l: &TorusImmersion,
    lt: &ComplexifiedImmersion,
    a: &[FourierSeries],
) -> Result<PushforwardField> {
    let n = l.dim();
    if a.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.len() });
    }
    let values = a.iter().map(|s| s.to_grid(&l.grid)).collect::<Result<Vec<_>>>()?;
    let derivs = a
        .iter()
        .map(|s| (0..n).map(|m| s.derivative(m).to_grid(&l.grid)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let jets = (0..l.len())
        .map(|i| {
            let value: Vec<C64> =
                (0..n).map(|c| (0..n).map(|k| values[k][i] * l.tangent(i, k)[c]).sum()).collect();
            let d = CMatrix::from_fn(n, n, |c, m| {
                (0..n)
                    .map(|k| derivs[k][m][i] * l.tangent(i, k)[c] + values[k][i] * l.second_derivative(i, m, k)[c])
                    .sum()
            });
            FieldJet { value, jacobian: d * &lt.inverse_jacobians[i] }
        })
        .collect();
    Ok(PushforwardField { jets })
}

impl PushforwardField {
    /// `div Ṽ` at every grid point of `L`.
    pub fn divergence(&self, metric: &[MetricJet]) -> Vec<C64> {
        self.jets.iter().zip(metric).map(|(f, g)| divergence_from_jets(g, f)).collect()
    }
}
