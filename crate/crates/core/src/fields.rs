//! Holomorphic vector fields on chart models.
//!
//! A field is stored through its (1,0)-components `V^a` in one chart and
//! carried to other charts with the exact transition Jacobian and Hessian.
//! Built-in fields (projective-linear, affine, polynomial) have exact
//! derivative rules; [`FieldKind::Custom`] closures are differentiated
//! numerically and may fail the holomorphy check.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::kahler::{ChartPoint, ManifoldModel, MetricJet};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::poly::Polynomial;
use crate::{Error, Result, C64, I};

/// Radius and sample count of the circle estimator for `∂V/∂z̄`.
pub const HOLOMORPHY_RADIUS: f64 = 1e-2;
pub const HOLOMORPHY_SAMPLES: usize = 16;
/// Residual above which a numerically represented field is rejected.
pub const HOLOMORPHY_TOLERANCE: f64 = 1e-8;
pub const KILLING_TOLERANCE: f64 = 1e-8;
pub const MOMENT_TOLERANCE: f64 = 1e-6;
/// Central-difference step for `dμ`.
pub const MOMENT_STEP: f64 = 1e-5;
const NUMERIC_STEP: f64 = 1e-4;
const ORACLE_STEP: f64 = 1e-3;

/// Value and holomorphic Jacobian of a field at a point:
/// `jacobian[(a, b)] = ∂_b V^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub value: Vec<C64>,
    pub jacobian: CMatrix,
}

impl FieldJet {
    pub fn zero(n: usize) -> Self {
        Self { value: vec![C64::new(0.0, 0.0); n], jacobian: CMatrix::zeros(n, n) }
    }

    fn scaled(mut self, c: C64) -> Self {
        self.value.iter_mut().for_each(|v| *v *= c);
        self.jacobian *= c;
        self
    }

    fn accumulate(&mut self, other: &FieldJet) {
        for (a, b) in self.value.iter_mut().zip(&other.value) {
            *a += b;
        }
        self.jacobian += &other.jacobian;
    }
}

type ScalarFn = Arc<dyn Fn(&[C64]) -> C64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;

/// A scalar function in the coordinates of one chart.
#[derive(Clone)]
pub enum ChartFunction {
    Polynomial { chart: usize, poly: Polynomial },
    /// Differentiated numerically; holomorphy is checked, not assumed.
    Custom { chart: usize, func: ScalarFn },
}

impl fmt::Debug for ChartFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartFunction::Polynomial { chart, poly } => {
                f.debug_struct("Polynomial").field("chart", chart).field("poly", poly).finish()
            }
            ChartFunction::Custom { chart, .. } => write!(f, "Custom {{ chart: {chart} }}"),
        }
    }
}

impl ChartFunction {
    pub fn polynomial(chart: usize, poly: Polynomial) -> Self {
        ChartFunction::Polynomial { chart, poly }
    }

    pub fn custom(chart: usize, func: impl Fn(&[C64]) -> C64 + Send + Sync + 'static) -> Self {
        ChartFunction::Custom { chart, func: Arc::new(func) }
    }

    pub fn chart(&self) -> usize {
        match self {
            ChartFunction::Polynomial { chart, .. } | ChartFunction::Custom { chart, .. } => *chart,
        }
    }

    fn local(&self, z: &[C64]) -> (C64, Vec<C64>) {
        match self {
            ChartFunction::Polynomial { poly, .. } => (poly.eval(z), poly.gradient(z)),
            ChartFunction::Custom { func, .. } => {
                let grad = (0..z.len())
                    .map(|b| wirtinger(NUMERIC_STEP, z, b, |w| vec![func(w)])[0])
                    .collect();
                (func(z), grad)
            }
        }
    }

    /// Value and holomorphic gradient at `p`, in the chart of `p`.
    pub fn jet(&self, model: &ManifoldModel, p: &ChartPoint) -> Result<(C64, Vec<C64>)> {
        let chart = self.chart();
        if chart == p.chart {
            return Ok(self.local(&p.coords));
        }
        let q = model.transition(p, chart)?;
        let (v, grad) = self.local(&q.coords);
        let jac = model.transition_jacobian(p, chart)?;
        let n = p.dim();
        let grad = (0..n)
            .map(|b| (0..n).fold(C64::new(0.0, 0.0), |acc, m| acc + grad[m] * jac[(m, b)]))
            .collect();
        Ok((v, grad))
    }

    /// Largest circle-estimated `|∂f/∂z̄|` over `points`.
    pub fn holomorphy_residual(&self, points: &[Vec<C64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for z in points {
            for b in 0..z.len() {
                let r = linalg::circle_antiholomorphic(HOLOMORPHY_RADIUS, HOLOMORPHY_SAMPLES, |d| {
                    let mut w = z.clone();
                    w[b] += d;
                    self.local(&w).0
                });
                worst = worst.max(r.norm());
            }
        }
        worst
    }
}

#[derive(Clone)]
pub enum FieldKind {
    /// `CP^n` field induced by a linear map `A` of `C^{n+1}`:
    /// `V^m = (AZ)_m − w_m (AZ)_c` in chart `c`.
    Projective(CMatrix),
    /// `V = M z + b` in the coordinates of `chart`.
    Affine { chart: usize, matrix: CMatrix, offset: Vec<C64> },
    Polynomial { chart: usize, components: Vec<Polynomial> },
    /// `f V`.
    Scaled { f: ChartFunction, inner: Box<HolomorphicField> },
    /// `Σ c_i V_i` with complex coefficients acting through `J`.
    Combination(Vec<(C64, HolomorphicField)>),
    /// Arbitrary component functions; need not be holomorphic.
    Custom { chart: usize, func: VectorFn },
}

impl fmt::Debug for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Projective(a) => f.debug_tuple("Projective").field(a).finish(),
            FieldKind::Affine { chart, matrix, offset } => f
                .debug_struct("Affine")
                .field("chart", chart)
                .field("matrix", matrix)
                .field("offset", offset)
                .finish(),
            FieldKind::Polynomial { chart, components } => f
                .debug_struct("Polynomial")
                .field("chart", chart)
                .field("components", components)
                .finish(),
            FieldKind::Scaled { f: g, inner } => {
                f.debug_struct("Scaled").field("f", g).field("inner", inner).finish()
            }
            FieldKind::Combination(terms) => f.debug_tuple("Combination").field(terms).finish(),
            FieldKind::Custom { chart, .. } => write!(f, "Custom {{ chart: {chart} }}"),
        }
    }
}

/// A (1,0) vector field given per chart.
#[derive(Debug, Clone)]
pub struct HolomorphicField {
    label: String,
    dim: usize,
    kind: FieldKind,
}

impl HolomorphicField {
    pub fn new(label: impl Into<String>, dim: usize, kind: FieldKind) -> Self {
        Self { label: label.into(), dim, kind }
    }

    pub fn projective(label: impl Into<String>, matrix: CMatrix) -> Self {
        let dim = matrix.nrows().saturating_sub(1);
        Self::new(label, dim, FieldKind::Projective(matrix))
    }

    pub fn affine(label: impl Into<String>, matrix: CMatrix, offset: Vec<C64>) -> Self {
        let dim = offset.len();
        Self::new(label, dim, FieldKind::Affine { chart: 0, matrix, offset })
    }

    pub fn polynomial(label: impl Into<String>, chart: usize, components: Vec<Polynomial>) -> Self {
        let dim = components.len();
        Self::new(label, dim, FieldKind::Polynomial { chart, components })
    }

    pub fn custom(
        label: impl Into<String>,
        dim: usize,
        chart: usize,
        func: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, dim, FieldKind::Custom { chart, func: Arc::new(func) })
    }

    pub fn combination(label: impl Into<String>, terms: Vec<(C64, HolomorphicField)>) -> Result<Self> {
        let dim = terms.first().map(|(_, f)| f.dim).unwrap_or(0);
        if let Some((_, bad)) = terms.iter().find(|(_, f)| f.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim });
        }
        Ok(Self::new(label, dim, FieldKind::Combination(terms)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// True when derivatives come from exact rules, so holomorphy holds by
    /// construction.
    pub fn is_exact(&self) -> bool {
        match &self.kind {
            FieldKind::Projective(_) | FieldKind::Affine { .. } | FieldKind::Polynomial { .. } => true,
            FieldKind::Scaled { f, inner } => {
                matches!(f, ChartFunction::Polynomial { .. }) && inner.is_exact()
            }
            FieldKind::Combination(terms) => terms.iter().all(|(_, f)| f.is_exact()),
            FieldKind::Custom { .. } => false,
        }
    }

    fn check(&self, model: &ManifoldModel, p: &ChartPoint) -> Result<()> {
        if self.dim != model.dim() || p.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), got: self.dim });
        }
        Ok(())
    }

    pub fn value(&self, model: &ManifoldModel, p: &ChartPoint) -> Result<Vec<C64>> {
        Ok(self.jet(model, p)?.value)
    }

    /// Components and holomorphic Jacobian in the chart of `p`.
    pub fn jet(&self, model: &ManifoldModel, p: &ChartPoint) -> Result<FieldJet> {
        self.check(model, p)?;
        match &self.kind {
            FieldKind::Projective(a) => projective_jet(model, a, p),
            FieldKind::Affine { chart, .. }
            | FieldKind::Polynomial { chart, .. }
            | FieldKind::Custom { chart, .. } => {
                if *chart == p.chart {
                    return Ok(self.local_jet(&p.coords));
                }
                if !model.is_projective() {
                    return Err(Error::FieldUndefined { label: self.label.clone(), chart: p.chart });
                }
                let q = model.transition(p, *chart).map_err(|_| Error::FieldUndefined {
                    label: self.label.clone(),
                    chart: p.chart,
                })?;
                let local = self.local_jet(&q.coords);
                transport_jet(model, &q, p, &local)
            }
            FieldKind::Scaled { f, inner } => {
                let jet = inner.jet(model, p)?;
                let (fv, grad) = f.jet(model, p)?;
                let n = self.dim;
                let value = jet.value.iter().map(|v| v * fv).collect();
                let jacobian =
                    CMatrix::from_fn(n, n, |a, b| jet.jacobian[(a, b)] * fv + jet.value[a] * grad[b]);
                Ok(FieldJet { value, jacobian })
            }
            FieldKind::Combination(terms) => {
                let mut acc = FieldJet::zero(self.dim);
                for (c, f) in terms {
                    acc.accumulate(&f.jet(model, p)?.scaled(*c));
                }
                Ok(acc)
            }
        }
    }

    fn local_value(&self, z: &[C64]) -> Vec<C64> {
        match &self.kind {
            FieldKind::Affine { matrix, offset, .. } => {
                (0..z.len()).map(|a| offset[a] + (0..z.len()).map(|b| matrix[(a, b)] * z[b]).sum::<C64>()).collect()
            }
            FieldKind::Polynomial { components, .. } => components.iter().map(|c| c.eval(z)).collect(),
            FieldKind::Custom { func, .. } => func(z),
            _ => unreachable!("chart-local evaluation of a global field"),
        }
    }

    fn local_jet(&self, z: &[C64]) -> FieldJet {
        let n = z.len();
        let value = self.local_value(z);
        let jacobian = match &self.kind {
            FieldKind::Affine { matrix, .. } => matrix.clone(),
            FieldKind::Polynomial { components, .. } => {
                CMatrix::from_fn(n, n, |a, b| components[a].derivative(b).eval(z))
            }
            FieldKind::Custom { .. } => {
                let mut j = CMatrix::zeros(n, n);
                for b in 0..n {
                    let col = wirtinger(NUMERIC_STEP, z, b, |w| self.local_value(w));
                    for a in 0..n {
                        j[(a, b)] = col[a];
                    }
                }
                j
            }
            _ => unreachable!("chart-local evaluation of a global field"),
        };
        FieldJet { value, jacobian }
    }

    /// `V(f) = Σ V^a ∂_a f`.
    pub fn apply(&self, model: &ManifoldModel, f: &ChartFunction, p: &ChartPoint) -> Result<C64> {
        let v = self.value(model, p)?;
        let (_, grad) = f.jet(model, p)?;
        Ok(v.iter().zip(&grad).map(|(a, b)| a * b).sum())
    }

    /// Real vector `(Re V^1, Im V^1, …)` in the `(x1, y1, …)` basis.
    pub fn real_value(&self, model: &ManifoldModel, p: &ChartPoint) -> Result<Vec<f64>> {
        Ok(linalg::complex_to_real(&self.value(model, p)?))
    }
}

fn projective_jet(model: &ManifoldModel, a: &CMatrix, p: &ChartPoint) -> Result<FieldJet> {
    let n = model.dim();
    if a.nrows() != n + 1 || a.ncols() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: a.nrows() });
    }
    let z = model.to_homogeneous(p)?;
    let c = p.chart;
    let az: Vec<C64> = (0..=n).map(|i| (0..=n).map(|j| a[(i, j)] * z[j]).sum()).collect();
    let hom = |m: usize| if m < c { m } else { m + 1 };
    let value = (0..n).map(|m| az[hom(m)] - z[hom(m)] * az[c]).collect();
    let jacobian = CMatrix::from_fn(n, n, |m, q| {
        let mut v = a[(hom(m), hom(q))] - z[hom(m)] * a[(c, hom(q))];
        if m == q {
            v -= az[c];
        }
        v
    });
    Ok(FieldJet { value, jacobian })
}

/// `∂_q ∂_r` of the projective transition from the chart of `q` to chart
/// `target`, returned as `hess[m][(q, r)]`.
fn transition_hessian(model: &ManifoldModel, p: &ChartPoint, target: usize) -> Result<Vec<CMatrix>> {
    let n = model.dim();
    let z = model.to_homogeneous(p)?;
    let zd = z[target];
    if zd.norm() == 0.0 {
        return Err(Error::OutsideDomain { chart: target });
    }
    let src = |q: usize| if q < p.chart { q } else { q + 1 };
    let dst = |m: usize| if m < target { m } else { m + 1 };
    let e = |i: usize, q: usize| if src(q) == i { 1.0 } else { 0.0 };
    Ok((0..n)
        .map(|m| {
            let i = dst(m);
            CMatrix::from_fn(n, n, |q, r| {
                -(C64::new(e(i, q) * e(target, r) + e(i, r) * e(target, q), 0.0)) / (zd * zd)
                    + z[i] * (2.0 * e(target, q) * e(target, r)) / (zd * zd * zd)
            })
        })
        .collect())
}

/// Moves a jet from the chart of `q` to the chart of `p` (same point).
fn transport_jet(model: &ManifoldModel, q: &ChartPoint, p: &ChartPoint, jet: &FieldJet) -> Result<FieldJet> {
    let n = model.dim();
    let d = model.transition_jacobian(q, p.chart)?;
    let d_inv = model.transition_jacobian(p, q.chart)?;
    let hess = transition_hessian(model, q, p.chart)?;
    let value: Vec<C64> = (0..n).map(|m| (0..n).map(|a| d[(m, a)] * jet.value[a]).sum()).collect();
    let inner = CMatrix::from_fn(n, n, |m, r| {
        let second: C64 = (0..n).map(|a| hess[m][(a, r)] * jet.value[a]).sum();
        let first: C64 = (0..n).map(|a| d[(m, a)] * jet.jacobian[(a, r)]).sum();
        second + first
    });
    Ok(FieldJet { value, jacobian: inner * d_inv })
}

/// Richardson-extrapolated `∂/∂z^b = (∂_x − i ∂_y)/2`.
fn wirtinger(h: f64, z: &[C64], b: usize, f: impl Fn(&[C64]) -> Vec<C64>) -> Vec<C64> {
    let dir = |delta: C64| {
        let eval = |s: f64| {
            let mut w = z.to_vec();
            w[b] += delta * s;
            f(&w)
        };
        let diff = |s: f64| -> Vec<C64> {
            eval(s).iter().zip(eval(-s)).map(|(a, c)| (a - c) / (2.0 * s)).collect()
        };
        let (coarse, fine) = (diff(h), diff(0.5 * h));
        fine.iter().zip(coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect::<Vec<C64>>()
    };
    let dx = dir(C64::new(1.0, 0.0));
    let dy = dir(I);
    dx.iter().zip(dy).map(|(x, y)| (x - I * y) * 0.5).collect()
}

/// Largest circle-estimated `|∂V^a/∂z̄^b|` over the points, evaluated in each
/// point's chart.
pub fn holomorphy_residual(model: &ManifoldModel, v: &HolomorphicField, points: &[ChartPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        for b in 0..model.dim() {
            for a in 0..model.dim() {
                let mut failure = None;
                let r = linalg::circle_antiholomorphic(HOLOMORPHY_RADIUS, HOLOMORPHY_SAMPLES, |d| {
                    match v.value(model, &p.shifted(b, d)) {
                        Ok(val) => val[a],
                        Err(e) => {
                            failure = Some(e);
                            C64::new(0.0, 0.0)
                        }
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                worst = worst.max(r.norm());
            }
        }
    }
    Ok(worst)
}

/// `div V = Σ_a ∂_a V^a + Σ_c V^c ∂_c log det g` from precomputed jets.
pub fn divergence_from_jets(metric: &MetricJet, field: &FieldJet) -> C64 {
    let trace: C64 = (0..field.value.len()).map(|a| field.jacobian[(a, a)]).sum();
    trace + field.value.iter().zip(&metric.log_det_grad).map(|(v, l)| v * l).sum::<C64>()
}

/// Divergence (complex trace of `X ↦ ∇_X V`) by the chart formula.
pub fn divergence(model: &ManifoldModel, v: &HolomorphicField, p: &ChartPoint) -> Result<C64> {
    if !v.is_exact() {
        let r = holomorphy_residual(model, v, core::slice::from_ref(p))?;
        if r > HOLOMORPHY_TOLERANCE {
            return Err(Error::NotHolomorphic { label: v.label.clone(), residual: r });
        }
    }
    let metric = model.metric_at(p)?;
    Ok(divergence_from_jets(&metric, &v.jet(model, p)?))
}

/// The real endomorphism `X ↦ ∇_X V` assembled from real finite differences.
#[derive(Debug, Clone)]
pub struct RealCovariantDerivative {
    /// `matrix[(k, i)] = (∇_{e_i} V)^k` in the `(x1, y1, …)` basis.
    pub matrix: RMatrix,
    /// `max |AJ − JA|`; zero for holomorphic `V`.
    pub j_linearity_defect: f64,
    /// `½ tr A − (i/2) tr(JA)`.
    pub complex_trace: C64,
}

/// Independent divergence oracle: real Levi-Civita connection from finite
/// differences of the real metric, real Jacobian of the field from finite
/// differences of its values, and the complex trace of the result.
pub fn real_covariant_derivative(
    model: &ManifoldModel,
    v: &HolomorphicField,
    p: &ChartPoint,
) -> Result<RealCovariantDerivative> {
    let m = 2 * model.dim();
    let g = model.real_metric(p)?;
    let g_inv = g.clone().try_inverse().ok_or(Error::SingularMetric)?;
    let mut dg = Vec::with_capacity(m);
    let mut dx = Vec::with_capacity(m);
    for l in 0..m {
        let mut failure = None;
        let mut metric_at = |s: f64| match model.real_metric(&p.shifted_real(l, s)) {
            Ok(g) => g,
            Err(e) => {
                failure = Some(e);
                RMatrix::zeros(m, m)
            }
        };
        let d1 = |s: f64, f: &mut dyn FnMut(f64) -> RMatrix| (f(s) - f(-s)) / (2.0 * s);
        let coarse = d1(ORACLE_STEP, &mut metric_at);
        let fine = d1(0.5 * ORACLE_STEP, &mut metric_at);
        if let Some(e) = failure {
            return Err(e);
        }
        dg.push((fine * 4.0 - coarse) / 3.0);
        let real = |s: f64| v.real_value(model, &p.shifted_real(l, s));
        let diff = |s: f64| -> Result<Vec<f64>> {
            Ok(real(s)?.iter().zip(real(-s)?).map(|(a, b)| (a - b) / (2.0 * s)).collect())
        };
        let (coarse, fine) = (diff(ORACLE_STEP)?, diff(0.5 * ORACLE_STEP)?);
        dx.push(fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect::<Vec<f64>>());
    }
    let x = v.real_value(model, p)?;
    // Γ^k_{ij} = ½ G^{kl} (∂_i G_{lj} + ∂_j G_{li} − ∂_l G_{ij})
    let gamma = |k: usize, i: usize, j: usize| -> f64 {
        (0..m).map(|l| 0.5 * g_inv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)])).sum()
    };
    let a = RMatrix::from_fn(m, m, |k, i| dx[i][k] + (0..m).map(|j| gamma(k, i, j) * x[j]).sum::<f64>());
    let j = linalg::complex_structure(model.dim());
    let defect = linalg::max_abs_real(&(&a * &j - &j * &a));
    let complex_trace = C64::new(0.5 * a.trace(), -0.5 * (&j * &a).trace());
    Ok(RealCovariantDerivative { matrix: a, j_linearity_defect: defect, complex_trace })
}

/// `max |M^T g + g conj(M)|` with `M_{ab} = ∂_b V^a + Γ^a_{bc} V^c`; zero iff
/// the real part of `V` is a Killing field.
pub fn killing_residual(model: &ManifoldModel, v: &HolomorphicField, points: &[ChartPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let metric = model.metric_at(p)?;
        let jet = v.jet(model, p)?;
        let gamma = metric.christoffel();
        let n = model.dim();
        let m = CMatrix::from_fn(n, n, |a, b| {
            jet.jacobian[(a, b)] + (0..n).map(|c| gamma[a][(b, c)] * jet.value[c]).sum::<C64>()
        });
        let sym = m.transpose() * &metric.g + &metric.g * m.map(|x| x.conj());
        worst = worst.max(linalg::max_abs(&sym) / linalg::max_abs(&metric.g).max(1e-300));
    }
    Ok(worst)
}

/// `f V`, with derivative data; checks holomorphy of numerically given `f`
/// on a ring of probe points around the chart origin.
pub fn scale_field(v: &HolomorphicField, f: ChartFunction) -> Result<HolomorphicField> {
    if let ChartFunction::Custom { .. } = f {
        let n = v.dim;
        let probes: Vec<Vec<C64>> = (0..8)
            .map(|k| {
                let e = C64::from_polar(0.5, core::f64::consts::PI * k as f64 / 4.0);
                (0..n).map(|a| e * (1.0 - 0.1 * a as f64)).collect()
            })
            .collect();
        let r = f.holomorphy_residual(&probes);
        if r > HOLOMORPHY_TOLERANCE {
            return Err(Error::NotHolomorphic { label: format!("f*{}", v.label), residual: r });
        }
    }
    let label = format!("f*{}", v.label);
    Ok(HolomorphicField::new(label, v.dim, FieldKind::Scaled { f, inner: Box::new(v.clone()) }))
}

/// Outcome of the moment-map verification for one field.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MomentCheckReport {
    pub label: String,
    pub einstein_constant: f64,
    pub points: usize,
    pub killing_residual: f64,
    /// `max |dμ(e_j) − ω(V, e_j)|` over points and real directions.
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `μ = Re(i t⁻¹ div V)`.
pub fn moment_map(model: &ManifoldModel, v: &HolomorphicField, t: f64, p: &ChartPoint) -> Result<f64> {
    Ok((I * divergence(model, v, p)? / t).re)
}

/// Checks `dμ = i_V ω` with `μ = i t⁻¹ div V` and `t` from the Einstein fit.
pub fn moment_map_check(
    model: &ManifoldModel,
    v: &HolomorphicField,
    points: &[ChartPoint],
) -> Result<MomentCheckReport> {
    let fit = model.einstein_constant()?;
    if !fit.moment_map_applicable {
        return Err(Error::ZeroEinsteinConstant);
    }
    let t = fit.t;
    let killing = killing_residual(model, v, points)?;
    if killing > KILLING_TOLERANCE {
        return Err(Error::NotIsometry { label: v.label.clone(), residual: killing });
    }
    let mut worst: f64 = 0.0;
    for p in points {
        let jet = model.metric_at(p)?;
        let val = v.value(model, p)?;
        for dir in 0..2 * model.dim() {
            let plus = moment_map(model, v, t, &p.shifted_real(dir, MOMENT_STEP))?;
            let minus = moment_map(model, v, t, &p.shifted_real(dir, -MOMENT_STEP))?;
            let dmu = (plus - minus) / (2.0 * MOMENT_STEP);
            let mut e = vec![C64::new(0.0, 0.0); model.dim()];
            e[dir / 2] = if dir % 2 == 0 { C64::new(1.0, 0.0) } else { I };
            worst = worst.max((dmu - jet.omega(&val, &e)).abs());
        }
    }
    Ok(MomentCheckReport {
        label: v.label.clone(),
        einstein_constant: t,
        points: points.len(),
        killing_residual: killing,
        max_residual: worst,
        tolerance: MOMENT_TOLERANCE,
        passed: worst < MOMENT_TOLERANCE,
    })
}

/// Generator of `(e^{is/(n+1)} z_j, e^{−is/(n+1)} z_k)` on `CP^n`, indices
/// 1-based. The speed makes `i div V = (|z_j|² − |z_k|²) / Σ|z_i|²` in every
/// dimension. Swapping `j` and `k` negates the field.
pub fn cpn_torus_generator(model: &ManifoldModel, j: usize, k: usize) -> Result<HolomorphicField> {
    let n = model.dim();
    if !model.is_projective() {
        return Err(Error::NotProjective(model.name().to_string()));
    }
    if j == k || j == 0 || k == 0 || j > n + 1 || k > n + 1 {
        return Err(Error::GeneratorIndex { j, k, n });
    }
    let mut a = CMatrix::zeros(n + 1, n + 1);
    let speed = 1.0 / (n + 1) as f64;
    a[(j - 1, j - 1)] = I * speed;
    a[(k - 1, k - 1)] = -I * speed;
    Ok(HolomorphicField::projective(format!("T{j}{k}"), a))
}

/// `(|z_j|² − |z_k|²) / Σ|z_i|²` at a projective point, indices 1-based.
pub fn projective_moment(model: &ManifoldModel, p: &ChartPoint, j: usize, k: usize) -> Result<f64> {
    let z = model.to_homogeneous(p)?;
    let total: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    Ok((z[j - 1].norm_sqr() - z[k - 1].norm_sqr()) / total)
}

/// A labelled list of fields.
#[derive(Debug, Clone)]
pub struct FieldBasis {
    pub name: String,
    pub fields: Vec<HolomorphicField>,
}

impl FieldBasis {
    /// Real basis of `sl(n+1, C)` acting on `CP^n`: `E_jk`, `iE_jk` for
    /// `j ≠ k` and `H_j = E_jj − E_{j+1,j+1}`, `iH_j`.
    pub fn sl_real(model: &ManifoldModel) -> Result<Self> {
        if !model.is_projective() {
            return Err(Error::NotProjective(model.name().to_string()));
        }
        let m = model.dim() + 1;
        let mut fields = Vec::with_capacity(2 * (m * m - 1));
        let mut push = |label: String, a: CMatrix| {
            let ia = &a * I;
            fields.push(HolomorphicField::projective(label.clone(), a));
            fields.push(HolomorphicField::projective(format!("i{label}"), ia));
        };
        for j in 0..m {
            for k in 0..m {
                if j != k {
                    let mut a = CMatrix::zeros(m, m);
                    a[(j, k)] = C64::new(1.0, 0.0);
                    push(format!("E{}{}", j + 1, k + 1), a);
                }
            }
        }
        for j in 0..m - 1 {
            let mut a = CMatrix::zeros(m, m);
            a[(j, j)] = C64::new(1.0, 0.0);
            a[(j + 1, j + 1)] = C64::new(-1.0, 0.0);
            push(format!("H{}", j + 1), a);
        }
        Ok(Self { name: "sl-real".into(), fields })
    }

    /// All torus generators `T_jk`, `j < k`.
    pub fn torus(model: &ManifoldModel) -> Result<Self> {
        let m = model.dim() + 1;
        let mut fields = Vec::new();
        for j in 1..=m {
            for k in j + 1..=m {
                fields.push(cpn_torus_generator(model, j, k)?);
            }
        }
        Ok(Self { name: "torus".into(), fields })
    }

    /// Real basis of affine fields on flat `C^n`: `∂_a`, `i∂_a`, `z^b∂_a`,
    /// `i z^b ∂_a`.
    pub fn flat_affine(n: usize) -> Self {
        let mut fields = Vec::with_capacity(2 * n + 2 * n * n);
        for a in 0..n {
            for c in [C64::new(1.0, 0.0), I] {
                let mut offset = vec![C64::new(0.0, 0.0); n];
                offset[a] = c;
                let tag = if c == I { "i" } else { "" };
                fields.push(HolomorphicField::affine(format!("{tag}D{}", a + 1), CMatrix::zeros(n, n), offset));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in [C64::new(1.0, 0.0), I] {
                    let mut m = CMatrix::zeros(n, n);
                    m[(a, b)] = c;
                    let tag = if c == I { "i" } else { "" };
                    fields.push(HolomorphicField::affine(
                        format!("{tag}L{}{}", a + 1, b + 1),
                        m,
                        vec![C64::new(0.0, 0.0); n],
                    ));
                }
            }
        }
        Self { name: "flat-affine".into(), fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Real rank of the basis, from the stacked real field values at the
    /// given points.
    pub fn rank(&self, model: &ManifoldModel, points: &[ChartPoint]) -> Result<usize> {
        let rows = 2 * model.dim() * points.len();
        let mut m = RMatrix::zeros(rows, self.fields.len());
        for (col, f) in self.fields.iter().enumerate() {
            let mut row = 0;
            for p in points {
                for x in f.real_value(model, p)? {
                    m[(row, col)] = x;
                    row += 1;
                }
            }
        }
        let s = linalg::real_singular_values(&m);
        let top = s.first().copied().unwrap_or(0.0);
        Ok(s.iter().filter(|&&x| x > 1e-10 * top).count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn flat_point(z: &[C64]) -> ChartPoint {
        ChartPoint::new(0, z.to_vec())
    }

    #[test]
    fn holomorphy_residual_separates_z_from_zbar() {
        let flat = ManifoldModel::flat(1);
        let pts = [flat_point(&[c(0.3, -0.4)]), flat_point(&[c(1.0, 2.0)])];
        let euler = HolomorphicField::affine("z", CMatrix::identity(1, 1), vec![c(0.0, 0.0)]);
        assert!(holomorphy_residual(&flat, &euler, &pts).unwrap() < 1e-12);
        let conj = HolomorphicField::custom("zbar", 1, 0, |z| vec![z[0].conj()]);
        let r = holomorphy_residual(&flat, &conj, &pts).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(matches!(divergence(&flat, &conj, &pts[0]), Err(Error::NotHolomorphic { .. })));
    }

    #[test]
    fn sl_basis_is_holomorphic_and_full_rank() {
        for n in 1..=2 {
            let m = ManifoldModel::projective_t1(n);
            let basis = FieldBasis::sl_real(&m).unwrap();
            assert_eq!(basis.len(), 2 * ((n + 1) * (n + 1) - 1));
            let pts = sampling::random_points(&m, 50, 11);
            for f in &basis.fields {
                assert!(holomorphy_residual(&m, f, &pts).unwrap() < 1e-10, "{}", f.label());
            }
            assert_eq!(basis.rank(&m, &pts[..10]).unwrap(), basis.len());
        }
        let cp1 = FieldBasis::sl_real(&ManifoldModel::projective_t1(1)).unwrap();
        let labels: Vec<&str> = cp1.fields.iter().map(|f| f.label()).collect();
        assert_eq!(labels, ["E12", "iE12", "E21", "iE21", "H1", "iH1"]);
    }

    #[test]
    fn flat_divergence_examples() {
        let flat2 = ManifoldModel::flat(2);
        let euler = HolomorphicField::affine("euler", CMatrix::identity(2, 2), vec![c(0.0, 0.0); 2]);
        let d = divergence(&flat2, &euler, &flat_point(&[c(0.3, 0.1), c(-1.0, 2.0)])).unwrap();
        assert!((d - c(2.0, 0.0)).norm() < 1e-15);

        let flat1 = ManifoldModel::flat(1);
        let z = Polynomial::variable(1, 0);
        let sq = HolomorphicField::polynomial("z^2", 0, vec![z.pow(2)]);
        let at = c(0.7, -0.2);
        assert!((divergence(&flat1, &sq, &flat_point(&[at])).unwrap() - at * 2.0).norm() < 1e-15);
    }

    #[test]
    fn scale_field_examples() {
        let flat1 = ManifoldModel::flat(1);
        let p = flat_point(&[c(2.0, 0.0)]);
        let d = HolomorphicField::affine("d", CMatrix::zeros(1, 1), vec![c(1.0, 0.0)]);
        let z = Polynomial::variable(1, 0);
        let fd = scale_field(&d, ChartFunction::polynomial(0, z.clone())).unwrap();
        assert!((divergence(&flat1, &fd, &p).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let euler = HolomorphicField::affine("z", CMatrix::identity(1, 1), vec![c(0.0, 0.0)]);
        let f = ChartFunction::polynomial(0, z.pow(2));
        let fv = scale_field(&euler, f.clone()).unwrap();
        assert!((divergence(&flat1, &fv, &p).unwrap() - c(12.0, 0.0)).norm() < 1e-13);
        // product rule side
        let rhs = c(4.0, 0.0) * divergence(&flat1, &euler, &p).unwrap() + euler.apply(&flat1, &f, &p).unwrap();
        assert!((rhs - c(12.0, 0.0)).norm() < 1e-13);

        let one = scale_field(&euler, ChartFunction::polynomial(0, Polynomial::constant(1, c(1.0, 0.0)))).unwrap();
        assert_eq!(one.value(&flat1, &p).unwrap(), euler.value(&flat1, &p).unwrap());

        let bad = ChartFunction::custom(0, |z| z[0].conj());
        assert!(matches!(scale_field(&euler, bad), Err(Error::NotHolomorphic { .. })));
    }

    #[test]
    fn torus_generator_in_cp1_chart() {
        let m = ManifoldModel::projective_t1(1);
        let v = cpn_torus_generator(&m, 1, 2).unwrap();
        let w = c(0.4, -0.3);
        let val = v.value(&m, &ChartPoint::new(0, vec![w])).unwrap();
        // half-speed action: w ↦ e^{−is} w
        assert!((val[0] - (-I * w)).norm() < 1e-15);
        assert!(v.value(&m, &ChartPoint::new(0, vec![c(0.0, 0.0)])).unwrap()[0].norm() == 0.0);
        assert!(matches!(cpn_torus_generator(&m, 1, 3), Err(Error::GeneratorIndex { .. })));
        assert!(matches!(
            cpn_torus_generator(&ManifoldModel::flat(1), 1, 2),
            Err(Error::NotProjective(_))
        ));
    }

    #[test]
    fn swapped_generator_is_negated() {
        let m = ManifoldModel::projective_t1(2);
        let a = cpn_torus_generator(&m, 1, 2).unwrap();
        let b = cpn_torus_generator(&m, 2, 1).unwrap();
        for p in sampling::random_points(&m, 20, 3) {
            let (va, vb) = (a.jet(&m, &p).unwrap(), b.jet(&m, &p).unwrap());
            for i in 0..2 {
                assert!((va.value[i] + vb.value[i]).norm() < 1e-15);
            }
            assert!(linalg::max_abs(&(&va.jacobian + &vb.jacobian)) < 1e-15);
        }
    }

    #[test]
    fn transported_polynomial_field_matches_projective_form() {
        // E12 on CP² equals ∂/∂w_1 in chart 0
        let m = ManifoldModel::projective_t1(2);
        let mut a = CMatrix::zeros(3, 3);
        a[(1, 0)] = c(1.0, 0.0);
        let proj = HolomorphicField::projective("E21", a);
        let poly = HolomorphicField::polynomial(
            "d1",
            0,
            vec![Polynomial::constant(2, c(1.0, 0.0)), Polynomial::zero(2)],
        );
        for p in sampling::random_points(&m, 30, 5) {
            if m.to_homogeneous(&p).unwrap()[0].norm() < 0.3 {
                continue;
            }
            let (x, y) = (proj.jet(&m, &p).unwrap(), poly.jet(&m, &p).unwrap());
            for i in 0..2 {
                assert!((x.value[i] - y.value[i]).norm() < 1e-12);
            }
            assert!(linalg::max_abs(&(&x.jacobian - &y.jacobian)) < 1e-11);
        }
    }

    #[test]
    fn torus_generators_are_killing_and_sl_shears_are_not() {
        let m = ManifoldModel::projective_t1(2);
        let pts = sampling::random_points(&m, 20, 9);
        for f in FieldBasis::torus(&m).unwrap().fields {
            assert!(killing_residual(&m, &f, &pts).unwrap() < 1e-12);
        }
        let basis = FieldBasis::sl_real(&m).unwrap();
        let h1 = &basis.fields[basis.fields.iter().position(|f| f.label() == "H1").unwrap()];
        assert!(killing_residual(&m, h1, &pts).unwrap() > 1e-3);
    }

    #[test]
    fn divergence_matches_projective_moment_formula() {
        for n in 1..=3 {
            let m = ManifoldModel::projective_t1(n);
            let v = cpn_torus_generator(&m, 1, 2).unwrap();
            for p in sampling::random_points(&m, 40, 2) {
                let idiv = I * divergence(&m, &v, &p).unwrap();
                let expect = projective_moment(&m, &p, 1, 2).unwrap();
                assert!((idiv - c(expect, 0.0)).norm() < 1e-12, "CP{n}");
            }
        }
    }

    #[test]
    fn divergence_is_invariant_under_metric_scaling() {
        let t1 = ManifoldModel::projective_t1(2);
        let unit = ManifoldModel::projective_unit(2);
        let basis = FieldBasis::sl_real(&t1).unwrap();
        for p in sampling::random_points(&t1, 10, 4) {
            for f in &basis.fields {
                let a = divergence(&t1, f, &p).unwrap();
                let b = divergence(&unit, f, &p).unwrap();
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn real_oracle_agrees_and_detects_non_holomorphic_fields() {
        let m = ManifoldModel::projective_t1(2);
        let basis = FieldBasis::sl_real(&m).unwrap();
        for (i, p) in sampling::random_points(&m, 8, 6).iter().enumerate() {
            let f = &basis.fields[(3 * i) % basis.len()];
            let oracle = real_covariant_derivative(&m, f, p).unwrap();
            let chart = divergence(&m, f, p).unwrap();
            assert!((oracle.complex_trace - chart).norm() < 1e-8, "{}", f.label());
            assert!(oracle.j_linearity_defect < 1e-8);
        }
        let bad = HolomorphicField::custom("conj", 2, 0, |z| vec![z[0].conj(), z[1]]);
        let p = ChartPoint::new(0, vec![c(0.2, 0.1), c(-0.1, 0.3)]);
        assert!(real_covariant_derivative(&m, &bad, &p).unwrap().j_linearity_defect > 0.1);
    }

    #[test]
    fn moment_map_check_on_cp1_and_flat() {
        let m = ManifoldModel::projective_t1(1);
        let v = cpn_torus_generator(&m, 1, 2).unwrap();
        let pts = sampling::random_points(&m, 100, 8);
        let report = moment_map_check(&m, &v, &pts).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.einstein_constant - 1.0).abs() < 1e-7);

        let flat = ManifoldModel::flat(2);
        let rot = HolomorphicField::affine("rot", CMatrix::identity(2, 2) * I, vec![c(0.0, 0.0); 2]);
        let pts = sampling::random_points(&flat, 4, 1);
        assert_eq!(moment_map_check(&flat, &rot, &pts), Err(Error::ZeroEinsteinConstant));

        let shear = FieldBasis::sl_real(&m).unwrap().fields.remove(0);
        let pts = sampling::random_points(&m, 5, 1);
        assert!(matches!(moment_map_check(&m, &shear, &pts), Err(Error::NotIsometry { .. })));
    }
}
