//! Chart-based Kähler manifold models.
//!
//! A model is an atlas of affine charts, each carrying a Kähler potential.
//! Built-in potentials (flat space and the Fubini–Study family) have exact
//! derivative rules; user potentials fall back to Richardson-extrapolated
//! central differences of `K`.
//!
//! Curvature is never taken from a closed form: the Ricci coefficients are
//! differentiated numerically from the exact `∂ log det g`, so the Einstein
//! fit is a genuine measurement.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::linalg::{self, CMatrix, RMatrix};
use crate::sampling;
use crate::{Error, Result, C64, I};

/// Step used by the numeric second derivatives of user potentials.
const POTENTIAL_STEP: f64 = 1e-2;
/// Step used when differentiating exact first-order data (∂ log det g).
const JET_STEP: f64 = 1e-3;

/// A point of the model given in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChartPoint {
    pub chart: usize,
    pub coords: Vec<C64>,
}

impl ChartPoint {
    pub fn new(chart: usize, coords: Vec<C64>) -> Self {
        Self { chart, coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Moves along a real chart direction `(x1, y1, …)`.
    pub fn shifted_real(&self, dir: usize, step: f64) -> Self {
        let mut coords = self.coords.clone();
        let delta = if dir.is_multiple_of(2) { C64::new(step, 0.0) } else { C64::new(0.0, step) };
        coords[dir / 2] += delta;
        Self { chart: self.chart, coords }
    }

    pub fn shifted(&self, axis: usize, delta: C64) -> Self {
        let mut coords = self.coords.clone();
        coords[axis] += delta;
        Self { chart: self.chart, coords }
    }
}

/// A Kähler potential on a single chart.
pub trait KahlerPotential: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &[C64]) -> f64;

    fn in_domain(&self, z: &[C64]) -> bool {
        z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Exact `(g, ∂g)` if the potential has closed-form derivatives;
    /// `dg[c][(a, b)] = ∂_c g_{ab̄}`.
    fn exact_jet(&self, _z: &[C64]) -> Option<(CMatrix, Vec<CMatrix>)> {
        None
    }
}

/// Which built-in geometry a model realizes.
#[derive(Clone)]
pub enum ModelKind {
    /// `C^n` with `K = |z|²`.
    Flat,
    /// `CP^n` with `K = scale · log(1 + |w|²)` in each affine chart.
    Projective { scale: f64 },
    /// A single chart with a user potential.
    Custom(Arc<dyn KahlerPotential>),
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Flat => write!(f, "Flat"),
            ModelKind::Projective { scale } => write!(f, "Projective {{ scale: {scale} }}"),
            ModelKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManifoldModel {
    name: String,
    dim: usize,
    kind: ModelKind,
    einstein_candidate: bool,
}

/// Metric data at a point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub point: ChartPoint,
    /// `g[(a, b)] = g_{ab̄}`.
    pub g: CMatrix,
    pub g_inv: CMatrix,
    /// `dg[c][(a, b)] = ∂_c g_{ab̄}`.
    pub dg: Vec<CMatrix>,
    /// `∂_c log det g`.
    pub log_det_grad: Vec<C64>,
}

impl MetricJet {
    /// Hermitian product `h(ζ, η) = ζ^T g conj(η)`.
    pub fn hermitian(&self, zeta: &[C64], eta: &[C64]) -> C64 {
        linalg::sesquilinear(&self.g, zeta, eta)
    }

    /// Riemannian product of two real tangent vectors given by their
    /// (1,0)-components.
    pub fn riemannian(&self, zeta: &[C64], eta: &[C64]) -> f64 {
        2.0 * self.hermitian(zeta, eta).re
    }

    /// `ω(X, Y) = g(X, JY)`.
    pub fn omega(&self, zeta: &[C64], eta: &[C64]) -> f64 {
        2.0 * self.hermitian(zeta, eta).im
    }

    pub fn norm(&self, zeta: &[C64]) -> f64 {
        self.riemannian(zeta, zeta).max(0.0).sqrt()
    }

    /// Connection coefficient of the canonical frame `dz¹∧…∧dzⁿ` along `u`:
    /// `∇_u frame = coeff · frame`.
    pub fn canonical_coeff(&self, u: &[C64]) -> C64 {
        -self
            .log_det_grad
            .iter()
            .zip(u)
            .fold(C64::new(0.0, 0.0), |acc, (l, x)| acc + l * x)
    }

    /// `Γ^a_{bc} = Σ_d g^{ad̄} ∂_b g_{cd̄}`, returned as `gamma[a][(b, c)]`.
    pub fn christoffel(&self) -> Vec<CMatrix> {
        let n = self.g.nrows();
        (0..n)
            .map(|a| {
                CMatrix::from_fn(n, n, |b, c| {
                    (0..n).fold(C64::new(0.0, 0.0), |acc, d| {
                        acc + self.g_inv[(d, a)] * self.dg[b][(c, d)]
                    })
                })
            })
            .collect()
    }

    /// `Γ(X, Y)^a = Γ^a_{bc} X^b Y^c`.
    pub fn christoffel_contract(gamma: &[CMatrix], x: &[C64], y: &[C64]) -> Vec<C64> {
        gamma
            .iter()
            .map(|ga| {
                let mut acc = C64::new(0.0, 0.0);
                for (b, xb) in x.iter().enumerate() {
                    for (c, yc) in y.iter().enumerate() {
                        acc += ga[(b, c)] * xb * yc;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Least-squares Einstein constant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EinsteinFit {
    pub t: f64,
    /// `max |Ric − t ω|` over the real form matrices at the sample points.
    pub residual: f64,
    pub samples: usize,
    /// False when `t = 0`: the moment-map construction needs `t ≠ 0`.
    pub moment_map_applicable: bool,
}

impl EinsteinFit {
    pub const RESIDUAL_TOLERANCE: f64 = 1e-7;
    pub const MIN_SAMPLES: usize = 32;
}

impl ManifoldModel {
    pub fn flat(n: usize) -> Self {
        Self { name: format!("flat-C{n}"), dim: n, kind: ModelKind::Flat, einstein_candidate: true }
    }

    /// `CP^n` normalized so that `Ric = ω` (`t = 1`).
    pub fn projective_t1(n: usize) -> Self {
        Self {
            name: format!("CP{n}-t1"),
            dim: n,
            kind: ModelKind::Projective { scale: (n + 1) as f64 },
            einstein_candidate: true,
        }
    }

    /// `CP^n` with potential `log(1 + |w|²)` (`t = n + 1`).
    pub fn projective_unit(n: usize) -> Self {
        Self {
            name: format!("CP{n}-unit"),
            dim: n,
            kind: ModelKind::Projective { scale: 1.0 },
            einstein_candidate: true,
        }
    }

    pub fn custom(name: impl Into<String>, potential: Arc<dyn KahlerPotential>, einstein_candidate: bool) -> Self {
        Self { name: name.into(), dim: potential.dim(), kind: ModelKind::Custom(potential), einstein_candidate }
    }

    /// Built-in catalog names: `flat-Cn`, `CPn-t1`, `CPn-unit`.
    pub fn builtin(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        match name {
            "flat-Cn" => Ok(Self::flat(dim)),
            "CPn-t1" => Ok(Self::projective_t1(dim)),
            "CPn-unit" => Ok(Self::projective_unit(dim)),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn is_projective(&self) -> bool {
        matches!(self.kind, ModelKind::Projective { .. })
    }

    pub fn chart_count(&self) -> usize {
        match self.kind {
            ModelKind::Projective { .. } => self.dim + 1,
            _ => 1,
        }
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.chart >= self.chart_count() {
            return Err(Error::UnknownChart { chart: p.chart });
        }
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        let ok = match &self.kind {
            ModelKind::Custom(k) => k.in_domain(&p.coords),
            _ => p.coords.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
        };
        if !ok {
            return Err(Error::OutsideDomain { chart: p.chart });
        }
        Ok(())
    }

    /// Potential value at `p` in its chart.
    pub fn potential(&self, p: &ChartPoint) -> Result<f64> {
        self.check_point(p)?;
        Ok(match &self.kind {
            ModelKind::Flat => p.coords.iter().map(|c| c.norm_sqr()).sum(),
            ModelKind::Projective { scale } => {
                scale * (1.0 + p.coords.iter().map(|c| c.norm_sqr()).sum::<f64>()).ln()
            }
            ModelKind::Custom(k) => k.value(&p.coords),
        })
    }

    fn metric_and_derivative(&self, p: &ChartPoint) -> (CMatrix, Vec<CMatrix>) {
        let n = self.dim;
        match &self.kind {
            ModelKind::Flat => (CMatrix::identity(n, n), vec![CMatrix::zeros(n, n); n]),
            ModelKind::Projective { scale } => fubini_study_jet(*scale, &p.coords),
            ModelKind::Custom(k) => match k.exact_jet(&p.coords) {
                Some(jet) => jet,
                None => numeric_jet(k.as_ref(), &p.coords),
            },
        }
    }

    /// Metric `g_{ab̄} = ∂²K/∂z^a∂z̄^b` with first derivatives.
    pub fn metric_at(&self, p: &ChartPoint) -> Result<MetricJet> {
        self.check_point(p)?;
        let (g, dg) = self.metric_and_derivative(p);
        let g_inv = linalg::hpd_inverse(&g)?;
        let log_det_grad = (0..self.dim)
            .map(|c| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..self.dim {
                    for b in 0..self.dim {
                        acc += g_inv[(b, a)] * dg[c][(a, b)];
                    }
                }
                acc
            })
            .collect();
        Ok(MetricJet { point: p.clone(), g, g_inv, dg, log_det_grad })
    }

    /// Metric matrix only; skips the inverse and derivatives.
    pub fn metric_matrix(&self, p: &ChartPoint) -> Result<CMatrix> {
        self.check_point(p)?;
        match &self.kind {
            ModelKind::Flat => Ok(CMatrix::identity(self.dim, self.dim)),
            ModelKind::Projective { scale } => Ok(fubini_study_metric(*scale, &p.coords)),
            ModelKind::Custom(k) => Ok(match k.exact_jet(&p.coords) {
                Some((g, _)) => g,
                None => numeric_metric(k.as_ref(), &p.coords),
            }),
        }
    }

    /// Real `2n × 2n` Gram matrix of the Riemannian metric in the
    /// `(x1, y1, …)` basis.
    pub fn real_metric(&self, p: &ChartPoint) -> Result<RMatrix> {
        let g = self.metric_matrix(p)?;
        Ok(real_form(&g, |h| 2.0 * h.re))
    }

    /// `ω(X, Y)` for real chart vectors `X, Y ∈ R^{2n}`.
    pub fn kahler_form_eval(&self, p: &ChartPoint, x: &[f64], y: &[f64]) -> Result<f64> {
        let n2 = 2 * self.dim;
        for v in [x, y] {
            if v.len() != n2 {
                return Err(Error::DimensionMismatch { expected: n2, got: v.len() });
            }
        }
        let g = self.metric_matrix(p)?;
        let zeta = linalg::real_to_complex(x);
        let eta = linalg::real_to_complex(y);
        Ok(2.0 * linalg::sesquilinear(&g, &zeta, &eta).im)
    }

    /// Real matrix of `ω` in the `(x1, y1, …)` basis.
    pub fn kahler_form_matrix(&self, p: &ChartPoint) -> Result<RMatrix> {
        let g = self.metric_matrix(p)?;
        Ok(real_form(&g, |h| 2.0 * h.im))
    }

    pub fn christoffel_at(&self, p: &ChartPoint) -> Result<Vec<CMatrix>> {
        Ok(self.metric_at(p)?.christoffel())
    }

    /// Ricci coefficients `Ric_{ab̄} = −∂_b̄ ∂_a log det g`, differentiating the
    /// exact `∂_a log det g` numerically.
    pub fn ricci_tensor_at(&self, p: &ChartPoint) -> Result<CMatrix> {
        let n = self.dim;
        let mut ric = CMatrix::zeros(n, n);
        for b in 0..n {
            let dx = self.log_det_grad_derivative(p, 2 * b)?;
            let dy = self.log_det_grad_derivative(p, 2 * b + 1)?;
            for a in 0..n {
                // ∂_b̄ = (∂_x + i ∂_y) / 2
                ric[(a, b)] = -(dx[a] + I * dy[a]) * 0.5;
            }
        }
        Ok(ric)
    }

    fn log_det_grad_derivative(&self, p: &ChartPoint, dir: usize) -> Result<Vec<C64>> {
        let mut failure = None;
        let d = richardson_vec(self.dim, JET_STEP, |s| match self.metric_at(&p.shifted_real(dir, s)) {
            Ok(j) => j.log_det_grad,
            Err(e) => {
                failure = Some(e);
                vec![C64::new(0.0, 0.0); self.dim]
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(d),
        }
    }

    /// Real matrix of the Ricci form, same normalization as `ω`.
    pub fn ricci_form_at(&self, p: &ChartPoint) -> Result<RMatrix> {
        let ric = self.ricci_tensor_at(p)?;
        Ok(real_form(&ric, |h| 2.0 * h.im))
    }

    /// Fits `Ric = t ω` over deterministic sample points.
    pub fn einstein_constant(&self) -> Result<EinsteinFit> {
        self.einstein_constant_with(EinsteinFit::MIN_SAMPLES, 0x005e_ede1)
    }

    pub fn einstein_constant_with(&self, samples: usize, seed: u64) -> Result<EinsteinFit> {
        if !self.einstein_candidate {
            return Err(Error::NotEinsteinCandidate(self.name.clone()));
        }
        let samples = samples.max(EinsteinFit::MIN_SAMPLES);
        let points = sampling::random_points(self, samples, seed);
        let mut pairs = Vec::with_capacity(points.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for p in &points {
            let ric = self.ricci_form_at(p)?;
            let om = self.kahler_form_matrix(p)?;
            num += ric.dot(&om);
            den += om.dot(&om);
            pairs.push((ric, om));
        }
        let t = if den > 0.0 { num / den } else { 0.0 };
        let residual = pairs
            .iter()
            .map(|(r, o)| linalg::max_abs_real(&(r - o * t)))
            .fold(0.0, f64::max);
        if residual > EinsteinFit::RESIDUAL_TOLERANCE {
            return Err(Error::NotKahlerEinstein { t, residual });
        }
        let t = if t.abs() < 1e-9 { 0.0 } else { t };
        Ok(EinsteinFit { t, residual, samples: points.len(), moment_map_applicable: t != 0.0 })
    }

    /// Connection coefficient of the canonical frame along a real vector.
    pub fn canonical_conn_coeff(&self, p: &ChartPoint, u: &[f64]) -> Result<C64> {
        if u.len() != 2 * self.dim {
            return Err(Error::DimensionMismatch { expected: 2 * self.dim, got: u.len() });
        }
        let jet = self.metric_at(p)?;
        Ok(jet.canonical_coeff(&linalg::real_to_complex(u)))
    }

    /// Homogeneous coordinates of a projective chart point (chart
    /// coordinate inserted as 1).
    pub fn to_homogeneous(&self, p: &ChartPoint) -> Result<Vec<C64>> {
        if !self.is_projective() {
            return Err(Error::NotProjective(self.name.clone()));
        }
        self.check_point(p)?;
        let mut z = p.coords.clone();
        z.insert(p.chart, C64::new(1.0, 0.0));
        Ok(z)
    }

    /// Chart point for homogeneous coordinates, choosing the chart with the
    /// dominant coordinate modulus (lowest index on ties).
    pub fn from_homogeneous(&self, z: &[C64]) -> Result<ChartPoint> {
        if !self.is_projective() {
            return Err(Error::NotProjective(self.name.clone()));
        }
        if z.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, got: z.len() });
        }
        let mut best = 0;
        for (i, c) in z.iter().enumerate() {
            if c.norm() > z[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        self.homogeneous_in_chart(z, best)
    }

    pub fn homogeneous_in_chart(&self, z: &[C64], chart: usize) -> Result<ChartPoint> {
        let pivot = z[chart];
        if pivot.norm() == 0.0 {
            return Err(Error::OutsideDomain { chart });
        }
        let coords = z
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != chart)
            .map(|(_, c)| c / pivot)
            .collect();
        Ok(ChartPoint::new(chart, coords))
    }

    /// Re-expresses `p` in another chart.
    pub fn transition(&self, p: &ChartPoint, chart: usize) -> Result<ChartPoint> {
        if chart == p.chart {
            return Ok(p.clone());
        }
        let z = self.to_homogeneous(p)?;
        if chart > self.dim {
            return Err(Error::UnknownChart { chart });
        }
        self.homogeneous_in_chart(&z, chart)
    }

    /// Holomorphic Jacobian `∂w'/∂w` of the chart transition at `p`.
    pub fn transition_jacobian(&self, p: &ChartPoint, chart: usize) -> Result<CMatrix> {
        let n = self.dim;
        if chart == p.chart {
            return Ok(CMatrix::identity(n, n));
        }
        let z = self.to_homogeneous(p)?;
        let zd = z[chart];
        if zd.norm() == 0.0 {
            return Err(Error::OutsideDomain { chart });
        }
        let hom_index = |i: usize, skip: usize| if i < skip { i } else { i + 1 };
        Ok(CMatrix::from_fn(n, n, |m, q| {
            let hm = hom_index(m, chart);
            let hq = hom_index(q, p.chart);
            let mut v = C64::new(0.0, 0.0);
            if hm == hq {
                v += C64::new(1.0, 0.0) / zd;
            }
            if hq == chart {
                v -= z[hm] / (zd * zd);
            }
            v
        }))
    }
}

fn real_form(m: &CMatrix, part: impl Fn(C64) -> f64) -> RMatrix {
    let n = m.nrows();
    let basis = |i: usize| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[i / 2] = if i.is_multiple_of(2) { C64::new(1.0, 0.0) } else { I };
        v
    };
    RMatrix::from_fn(2 * n, 2 * n, |i, j| part(linalg::sesquilinear(m, &basis(i), &basis(j))))
}

fn fubini_study_metric(scale: f64, w: &[C64]) -> CMatrix {
    let n = w.len();
    let s = 1.0 + w.iter().map(|c| c.norm_sqr()).sum::<f64>();
    CMatrix::from_fn(n, n, |a, b| {
        let delta = if a == b { 1.0 / s } else { 0.0 };
        (C64::new(delta, 0.0) - w[a].conj() * w[b] / (s * s)) * scale
    })
}

fn fubini_study_jet(scale: f64, w: &[C64]) -> (CMatrix, Vec<CMatrix>) {
    let n = w.len();
    let s = 1.0 + w.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let g = fubini_study_metric(scale, w);
    let dg = (0..n)
        .map(|c| {
            CMatrix::from_fn(n, n, |a, b| {
                let mut v = w[a].conj() * w[b] * w[c].conj() * (2.0 / (s * s * s));
                if a == b {
                    v -= w[c].conj() / (s * s);
                }
                if b == c {
                    v -= w[a].conj() / (s * s);
                }
                v * scale
            })
        })
        .collect();
    (g, dg)
}

/// Central-difference Wirtinger Hessian of a real potential.
fn numeric_metric(k: &dyn KahlerPotential, z: &[C64]) -> CMatrix {
    let n = z.len();
    let shifted = |dirs: &[(usize, f64)]| {
        let mut w = z.to_vec();
        for &(d, s) in dirs {
            w[d / 2] += if d % 2 == 0 { C64::new(s, 0.0) } else { C64::new(0.0, s) };
        }
        k.value(&w)
    };
    let second = |u: usize, v: usize| {
        let stencil = |h: f64| {
            (shifted(&[(u, h), (v, h)]) - shifted(&[(u, h), (v, -h)]) - shifted(&[(u, -h), (v, h)])
                + shifted(&[(u, -h), (v, -h)]))
                / (4.0 * h * h)
        };
        // two Richardson levels: O(h⁶) truncation
        let h = POTENTIAL_STEP;
        let (d1, d2, d4) = (stencil(h), stencil(0.5 * h), stencil(0.25 * h));
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d4 - d2) / 3.0;
        (16.0 * r2 - r1) / 15.0
    };
    let mut real_hessian = RMatrix::zeros(2 * n, 2 * n);
    for u in 0..2 * n {
        for v in u..2 * n {
            let val = second(u, v);
            real_hessian[(u, v)] = val;
            real_hessian[(v, u)] = val;
        }
    }
    CMatrix::from_fn(n, n, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        C64::new(
            real_hessian[(xa, xb)] + real_hessian[(ya, yb)],
            real_hessian[(xa, yb)] - real_hessian[(ya, xb)],
        ) * 0.25
    })
}

fn numeric_jet(k: &dyn KahlerPotential, z: &[C64]) -> (CMatrix, Vec<CMatrix>) {
    let n = z.len();
    let g = numeric_metric(k, z);
    let dg = (0..n)
        .map(|c| {
            let along = |dir: usize| {
                richardson_mat(POTENTIAL_STEP, |s| {
                    let mut w = z.to_vec();
                    w[c] += if dir == 0 { C64::new(s, 0.0) } else { C64::new(0.0, s) };
                    numeric_metric(k, &w)
                })
            };
            // ∂_c = (∂_x − i ∂_y) / 2
            (along(0) - along(1) * I) * C64::new(0.5, 0.0)
        })
        .collect();
    (g, dg)
}

fn richardson_vec(n: usize, h: f64, mut f: impl FnMut(f64) -> Vec<C64>) -> Vec<C64> {
    let mut d = |s: f64| -> Vec<C64> {
        let p = f(s);
        let m = f(-s);
        p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * s)).collect()
    };
    let coarse = d(h);
    let fine = d(0.5 * h);
    (0..n).map(|i| (fine[i] * 4.0 - coarse[i]) / 3.0).collect()
}

fn richardson_mat(h: f64, mut f: impl FnMut(f64) -> CMatrix) -> CMatrix {
    let mut d = |s: f64| (f(s) - f(-s)) / C64::new(2.0 * s, 0.0);
    let coarse = d(h);
    let fine = d(0.5 * h);
    (fine * C64::new(4.0, 0.0) - coarse) / C64::new(3.0, 0.0)
}
