//! Immersed tori and circles: induced geometry, frames, mean curvature, the
//! canonical section `κ` along `L` and its connection form `ξ`.
//!
//! An immersion is sampled on a uniform grid over the flat parameter torus in
//! a single chart; all `θ`-derivatives are spectral.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::kahler::{ChartPoint, ManifoldModel, MetricJet};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::spectral::TorusGrid;
use crate::{Error, Result, C64, I};

/// Default grid resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 64;
/// Lagrangian defect below which Lagrangian-only identities are evaluated.
pub const LAGRANGIAN_TOLERANCE: f64 = 1e-8;
/// Totally-real margin below which `κ` is considered to blow up.
pub const TOTALLY_REAL_TOLERANCE: f64 = 1e-6;
/// Mean-curvature bound used to call a Lagrangian minimal.
pub const MINIMAL_TOLERANCE: f64 = 1e-7;

/// Built-in immersion families.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Family {
    /// `{|z_i|² = a_i}` in `CP^n`, `Σ a_i = 1`.
    OrbitTorus { weights: Vec<f64> },
    /// Orbit torus with all `a_i = 1/(n+1)`.
    Clifford,
    /// `|w| = 1` in `CP¹`.
    Equator,
    /// Orbit torus with `|z_1|² = |z_2|² = level` and the remaining weight
    /// split evenly.
    PairBalanced { level: f64 },
    /// `(r_1 e^{iθ_1}, …, r_n e^{iθ_n})` in flat `C^n`.
    ProductCircles { radii: Vec<f64> },
    /// Clifford torus displaced by `ε J∇H` with `H = Re w_1`.
    PerturbedClifford { epsilon: f64 },
    /// Clifford torus with `w_n += δ e^{iθ_1}`; totally real, not Lagrangian.
    GraphTorus { delta: f64 },
    /// Torus in flat `C²` with a complex tangent plane at `θ = 0`.
    ComplexTangent,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::OrbitTorus { .. } => "orbit-torus",
            Family::Clifford => "clifford-torus",
            Family::Equator => "equator",
            Family::PairBalanced { .. } => "pair-balanced-torus",
            Family::ProductCircles { .. } => "product-circles",
            Family::PerturbedClifford { .. } => "perturbed-clifford",
            Family::GraphTorus { .. } => "graph-torus",
            Family::ComplexTangent => "complex-tangent-torus",
        }
    }

    /// Orbit weights for the orbit-type families.
    pub fn orbit_weights(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            Family::OrbitTorus { weights } => Some(weights.clone()),
            Family::Clifford | Family::PerturbedClifford { .. } | Family::GraphTorus { .. } => {
                Some(vec![1.0 / (n + 1) as f64; n + 1])
            }
            Family::Equator => Some(vec![0.5, 0.5]),
            Family::PairBalanced { level } => {
                let mut w = vec![*level, *level];
                if n > 1 {
                    w.extend(core::iter::repeat_n((1.0 - 2.0 * level) / (n - 1) as f64, n - 1));
                }
                Some(w)
            }
            _ => None,
        }
    }

    /// Checks parameters against the model.
    pub fn validate(&self, model: &ManifoldModel) -> Result<()> {
        let n = model.dim();
        let bad = |msg: String| Err(Error::InvalidFamily(msg));
        let projective = model.is_projective();
        match self {
            Family::OrbitTorus { weights } => {
                if !projective {
                    return bad(format!("{} needs projective space", self.name()));
                }
                if weights.len() != n + 1 {
                    return bad(format!("expected {} weights, got {}", n + 1, weights.len()));
                }
                if weights.iter().any(|&a| !(a > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return bad("weights must be positive and sum to 1".into());
                }
            }
            Family::Clifford | Family::PerturbedClifford { .. } if !projective => {
                return bad(format!("{} needs projective space", self.name()));
            }
            Family::Equator if !(projective && n == 1) => return bad("equator lives in CP1".into()),
            Family::PairBalanced { level } => {
                if !projective {
                    return bad(format!("{} needs projective space", self.name()));
                }
                let ok = if n == 1 { (*level - 0.5).abs() < 1e-15 } else { *level > 0.0 && *level < 0.5 };
                if !ok {
                    return bad(format!("pair level {level} out of range for CP{n}"));
                }
            }
            Family::ProductCircles { radii } => {
                if projective {
                    return bad("product circles live in flat space".into());
                }
                if radii.len() != n || radii.iter().any(|&r| !(r > 0.0)) {
                    return bad(format!("expected {n} positive radii"));
                }
            }
            Family::GraphTorus { .. } if !(projective && n >= 2) => {
                return bad("graph torus needs CPn with n >= 2".into());
            }
            Family::ComplexTangent if projective || n != 2 => {
                return bad("complex-tangent torus lives in flat C2".into());
            }
            _ => {}
        }
        Ok(())
    }

    fn chart(&self, n: usize) -> usize {
        let Some(w) = self.orbit_weights(n) else { return 0 };
        let mut best = 0;
        for (i, a) in w.iter().enumerate() {
            if *a > w[best] * (1.0 + 1e-12) {
                best = i;
            }
        }
        best
    }

    /// Chart coordinates of the immersion at angles `theta`.
    fn eval(&self, model: &ManifoldModel, chart: usize, theta: &[f64]) -> Result<Vec<C64>> {
        let n = model.dim();
        let orbit = |w: &[f64]| -> Vec<C64> {
            let mut z = Vec::with_capacity(n + 1);
            z.push(C64::new(w[0].sqrt(), 0.0));
            for (k, t) in theta.iter().enumerate() {
                z.push(C64::from_polar(w[k + 1].sqrt(), *t));
            }
            let pivot = z[chart];
            z.iter().enumerate().filter(|(i, _)| *i != chart).map(|(_, c)| c / pivot).collect()
        };
        let clifford = || orbit(&vec![1.0 / (n + 1) as f64; n + 1]);
        Ok(match self {
            Family::OrbitTorus { .. } | Family::Clifford | Family::Equator | Family::PairBalanced { .. } => {
                orbit(&self.orbit_weights(n).expect("orbit family"))
            }
            Family::ProductCircles { radii } => {
                theta.iter().zip(radii).map(|(t, r)| C64::from_polar(*r, *t)).collect()
            }
            Family::PerturbedClifford { epsilon } => {
                let w = clifford();
                let g = model.metric_matrix(&ChartPoint::new(chart, w.clone()))?;
                // ∇H = (g^T)^{-1} ∂̄H with ∂̄H = e_1 / 2
                let mut dbar = vec![C64::new(0.0, 0.0); n];
                dbar[0] = C64::new(0.5, 0.0);
                let grad = linalg::inverse(&g.transpose())? * CMatrix::from_column_slice(n, 1, &dbar);
                w.iter().enumerate().map(|(a, c)| c + I * grad[(a, 0)] * *epsilon).collect()
            }
            Family::GraphTorus { delta } => {
                let mut w = clifford();
                w[n - 1] += C64::from_polar(*delta, theta[0]);
                w
            }
            Family::ComplexTangent => {
                let (t1, t2) = (theta[0], theta[1]);
                vec![
                    C64::from_polar(1.0, t1) - t2.sin(),
                    C64::new(t1.sin(), t2.sin()) + C64::from_polar(2.0, t2) - C64::new(0.0, 2.0 * t2.sin()),
                ]
            }
        })
    }
}

/// Reversal negates the last frame vector and hence `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Orientation {
    #[default]
    Standard,
    Reversed,
}

/// A map from the flat torus into one chart, sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct TorusImmersion {
    pub label: String,
    pub grid: TorusGrid,
    pub chart: usize,
    pub orientation: Orientation,
    /// `samples[i][a]`: chart coordinate `a` at grid point `i`.
    samples: Vec<Vec<C64>>,
    /// `first[k][i][a] = ∂_k F^a`.
    first: Vec<Vec<Vec<C64>>>,
    /// `second[k][l][i][a] = ∂_k ∂_l F^a`.
    second: Vec<Vec<Vec<Vec<C64>>>>,
}

impl TorusImmersion {
    /// Samples a built-in family at resolution `n` per axis.
    pub fn from_family(
        model: &ManifoldModel,
        family: &Family,
        resolution: usize,
        orientation: Orientation,
    ) -> Result<Self> {
        family.validate(model)?;
        let grid = TorusGrid::new(model.dim(), resolution)?;
        let chart = family.chart(model.dim());
        let samples = (0..grid.len())
            .map(|i| family.eval(model, chart, &grid.angles(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(model, family.name().into(), grid, chart, samples, orientation)
    }

    /// Builds an immersion from chart samples, computing spectral derivatives
    /// and rejecting rank-deficient grid points.
    pub fn from_samples(
        model: &ManifoldModel,
        label: String,
        grid: TorusGrid,
        chart: usize,
        samples: Vec<Vec<C64>>,
        orientation: Orientation,
    ) -> Result<Self> {
        let n = model.dim();
        if grid.dim != n {
            return Err(Error::DimensionMismatch { expected: n, got: grid.dim });
        }
        if samples.len() != grid.len() {
            return Err(Error::ResolutionMismatch { expected: grid.len(), got: samples.len() });
        }
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        let comps: Vec<Vec<C64>> = (0..n).map(|a| samples.iter().map(|s| s[a]).collect()).collect();
        let transpose = |per_comp: Vec<Vec<C64>>| -> Vec<Vec<C64>> {
            (0..grid.len()).map(|i| per_comp.iter().map(|c| c[i]).collect()).collect()
        };
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for k in 0..n {
            let d: Vec<Vec<C64>> = comps.iter().map(|c| grid.derivative(c, k, 1)).collect::<Result<_>>()?;
            first.push(transpose(d));
            let mut row = Vec::with_capacity(n);
            for l in 0..n {
                let d: Vec<Vec<C64>> =
                    comps.iter().map(|c| grid.mixed_derivative(c, k, l)).collect::<Result<_>>()?;
                row.push(transpose(d));
            }
            second.push(row);
        }
        let imm = Self { label, grid, chart, orientation, samples, first, second };
        for i in 0..imm.len() {
            let d = RMatrix::from_fn(2 * n, n, |r, k| {
                let t = imm.first[k][i][r / 2];
                if r % 2 == 0 { t.re } else { t.im }
            });
            let s = linalg::real_singular_values(&d);
            let scale = s[0].max(1.0);
            let smallest = *s.last().unwrap_or(&0.0);
            if !(smallest > 1e-10 * scale) {
                return Err(Error::DegenerateImmersion { index: i, value: smallest });
            }
        }
        Ok(imm)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> ChartPoint {
        ChartPoint::new(self.chart, self.samples[i].clone())
    }

    pub fn samples(&self) -> &[Vec<C64>] {
        &self.samples
    }

    /// `∂F/∂θ_k` at grid point `i`.
    pub fn tangent(&self, i: usize, k: usize) -> &[C64] {
        &self.first[k][i]
    }

    pub fn second_derivative(&self, i: usize, k: usize, l: usize) -> &[C64] {
        &self.second[k][l][i]
    }

    /// Samples of chart component `a` over the grid.
    pub fn component(&self, a: usize) -> Vec<C64> {
        self.samples.iter().map(|s| s[a]).collect()
    }

    pub fn reversed(mut self) -> Self {
        self.orientation = match self.orientation {
            Orientation::Standard => Orientation::Reversed,
            Orientation::Reversed => Orientation::Standard,
        };
        self
    }

    /// Metric jets at all grid points.
    pub fn metric_jets(&self, model: &ManifoldModel) -> Result<Vec<MetricJet>> {
        (0..self.len()).map(|i| model.metric_at(&self.point(i))).collect()
    }
}

/// Frame data at every grid point.
#[derive(Debug, Clone)]
pub struct FrameField {
    /// `induced[i][(k, l)] = g(∂_k F, ∂_l F)`.
    pub induced: Vec<RMatrix>,
    /// Oriented orthonormal frame `v_j` by Gram–Schmidt in `θ` order.
    pub frame: Vec<Vec<Vec<C64>>>,
    /// `√det` of the induced metric.
    pub volume_element: Vec<f64>,
    /// `max |g(v_i, v_j) − δ_ij|`.
    pub orthonormality_defect: f64,
}

pub fn frame_field(model: &ManifoldModel, l: &TorusImmersion) -> Result<FrameField> {
    let jets = l.metric_jets(model)?;
    frame_from_jets(l, &jets)
}

fn frame_from_jets(l: &TorusImmersion, jets: &[MetricJet]) -> Result<FrameField> {
    let n = l.dim();
    let mut induced = Vec::with_capacity(l.len());
    let mut frames = Vec::with_capacity(l.len());
    let mut vol = Vec::with_capacity(l.len());
    let mut defect: f64 = 0.0;
    for (i, jet) in jets.iter().enumerate() {
        let gi = RMatrix::from_fn(n, n, |a, b| jet.riemannian(l.tangent(i, a), l.tangent(i, b)));
        vol.push(gi.determinant().max(0.0).sqrt());
        induced.push(gi);
        let mut frame: Vec<Vec<C64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = l.tangent(i, k).to_vec();
            let original = jet.norm(&v);
            for u in &frame {
                let c = jet.riemannian(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= y * c;
                }
            }
            let norm = jet.norm(&v);
            if !(norm > 1e-12 * original) {
                return Err(Error::FrameDegenerate { index: i });
            }
            v.iter_mut().for_each(|x| *x /= norm);
            frame.push(v);
        }
        if l.orientation == Orientation::Reversed {
            frame[n - 1].iter_mut().for_each(|x| *x = -*x);
        }
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                defect = defect.max((jet.riemannian(&frame[a], &frame[b]) - target).abs());
            }
        }
        frames.push(frame);
    }
    Ok(FrameField { induced, frame: frames, volume_element: vol, orthonormality_defect: defect })
}

/// `max |ω(∂_iF, ∂_jF)| / (|∂_iF| |∂_jF|)`.
pub fn lagrangian_defect(model: &ManifoldModel, l: &TorusImmersion) -> Result<f64> {
    let jets = l.metric_jets(model)?;
    Ok(lagrangian_defect_from(l, &jets))
}

fn lagrangian_defect_from(l: &TorusImmersion, jets: &[MetricJet]) -> f64 {
    let n = l.dim();
    let mut worst: f64 = 0.0;
    for (i, jet) in jets.iter().enumerate() {
        for a in 0..n {
            for b in a + 1..n {
                let (ta, tb) = (l.tangent(i, a), l.tangent(i, b));
                worst = worst.max(jet.omega(ta, tb).abs() / (jet.norm(ta) * jet.norm(tb)));
            }
        }
    }
    worst
}

/// Frame matrix `Z_v` whose columns are the (1,0)-parts of the frame.
fn frame_matrix(frame: &[Vec<C64>]) -> CMatrix {
    let n = frame.len();
    CMatrix::from_fn(n, n, |a, k| frame[k][a])
}

/// Smallest singular value of `√2 Lᵀ Z_v` with `g = L L^H`: 1 on
/// Lagrangians, 0 where the tangent space contains a complex line.
pub fn totally_real_margin(model: &ManifoldModel, l: &TorusImmersion) -> Result<f64> {
    let jets = l.metric_jets(model)?;
    let frames = frame_from_jets(l, &jets)?;
    Ok(margin_from(&jets, &frames))
}

fn margin_from(jets: &[MetricJet], frames: &FrameField) -> f64 {
    let mut worst = f64::INFINITY;
    for (jet, frame) in jets.iter().zip(&frames.frame) {
        let chol = jet.g.clone().cholesky().expect("metric jets are positive definite");
        let m = chol.l().transpose() * frame_matrix(frame) * C64::new(2f64.sqrt(), 0.0);
        let s = linalg::singular_values(&m);
        worst = worst.min(*s.last().unwrap_or(&0.0));
    }
    worst
}

/// `∫_L f dvol` by the periodic trapezoidal rule.
pub fn integrate(model: &ManifoldModel, l: &TorusImmersion, samples: &[C64]) -> Result<C64> {
    let frames = frame_field(model, l)?;
    l.grid.quadrature(samples, Some(&frames.volume_element))
}

pub fn volume(model: &ManifoldModel, l: &TorusImmersion) -> Result<f64> {
    let ones = vec![C64::new(1.0, 0.0); l.len()];
    Ok(integrate(model, l, &ones)?.re)
}

/// Mean curvature vector and form along `L`.
#[derive(Debug, Clone)]
pub struct MeanCurvatureData {
    /// (1,0)-components of `h` at each grid point.
    pub h: Vec<Vec<C64>>,
    /// `sigma[i][k] = ω(h, ∂_kF)`.
    pub sigma: Vec<Vec<f64>>,
    pub max_norm: f64,
    /// `max |g(h, v_j)|`.
    pub tangential_defect: f64,
}

pub fn mean_curvature(model: &ManifoldModel, l: &TorusImmersion) -> Result<MeanCurvatureData> {
    let jets = l.metric_jets(model)?;
    let frames = frame_from_jets(l, &jets)?;
    Ok(mean_curvature_from(l, &jets, &frames))
}

fn mean_curvature_from(l: &TorusImmersion, jets: &[MetricJet], frames: &FrameField) -> MeanCurvatureData {
    let n = l.dim();
    let mut hs = Vec::with_capacity(l.len());
    let mut sigmas = Vec::with_capacity(l.len());
    let mut max_norm: f64 = 0.0;
    let mut tangential: f64 = 0.0;
    for (i, jet) in jets.iter().enumerate() {
        let gamma = jet.christoffel();
        let ginv = frames.induced[i].clone().try_inverse().expect("immersion has full rank");
        let mut trace = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            for m in 0..n {
                let cov = MetricJet::christoffel_contract(&gamma, l.tangent(i, k), l.tangent(i, m));
                for a in 0..n {
                    trace[a] += (l.second_derivative(i, k, m)[a] + cov[a]) * ginv[(k, m)];
                }
            }
        }
        let frame = &frames.frame[i];
        let mut h = trace.clone();
        for v in frame {
            let c = jet.riemannian(&trace, v);
            for (x, y) in h.iter_mut().zip(v) {
                *x -= y * c;
            }
        }
        for v in frame {
            tangential = tangential.max(jet.riemannian(&h, v).abs());
        }
        max_norm = max_norm.max(jet.norm(&h));
        sigmas.push((0..n).map(|k| jet.omega(&h, l.tangent(i, k))).collect());
        hs.push(h);
    }
    MeanCurvatureData { h: hs, sigma: sigmas, max_norm, tangential_defect: tangential }
}

/// `κ = c dz¹∧…∧dzⁿ` along `L` and its connection form in the `θ` coframe.
#[derive(Debug, Clone)]
pub struct CanonicalSectionData {
    pub c: Vec<C64>,
    /// `xi[i][k] = ξ(∂_kF)`.
    pub xi: Vec<Vec<C64>>,
    /// `|κ|`.
    pub norm: Vec<f64>,
    /// `max |κ(v_1, …, v_n) − 1|`.
    pub defining_defect: f64,
}

pub fn canonical_section(model: &ManifoldModel, l: &TorusImmersion) -> Result<CanonicalSectionData> {
    let jets = l.metric_jets(model)?;
    let frames = frame_from_jets(l, &jets)?;
    canonical_section_from(l, &jets, &frames)
}

fn canonical_section_from(
    l: &TorusImmersion,
    jets: &[MetricJet],
    frames: &FrameField,
) -> Result<CanonicalSectionData> {
    let n = l.dim();
    let margin = margin_from(jets, frames);
    if !(margin > TOTALLY_REAL_TOLERANCE) {
        return Err(Error::NotTotallyReal { margin, tolerance: TOTALLY_REAL_TOLERANCE });
    }
    let mut c = Vec::with_capacity(l.len());
    let mut norm = Vec::with_capacity(l.len());
    let mut defect: f64 = 0.0;
    for (jet, frame) in jets.iter().zip(&frames.frame) {
        let det = frame_matrix(frame).determinant();
        let ci = C64::new(1.0, 0.0) / det;
        defect = defect.max((ci * det - C64::new(1.0, 0.0)).norm());
        let det_g = jet.g.determinant().re;
        norm.push(ci.norm() / (det_g.sqrt() * 2f64.powi(n as i32).sqrt()));
        c.push(ci);
    }
    let dc: Vec<Vec<C64>> = (0..n).map(|k| l.grid.derivative(&c, k, 1)).collect::<Result<_>>()?;
    let xi = (0..l.len())
        .map(|i| (0..n).map(|k| dc[k][i] / c[i] + jets[i].canonical_coeff(l.tangent(i, k))).collect())
        .collect();
    Ok(CanonicalSectionData { c, xi, norm, defining_defect: defect })
}

/// `max |σ(∂_kF) − iξ(∂_kF)|`; Lagrangians only.
pub fn connection_form_residual(model: &ManifoldModel, l: &TorusImmersion) -> Result<f64> {
    let jets = l.metric_jets(model)?;
    let defect = lagrangian_defect_from(l, &jets);
    if defect > LAGRANGIAN_TOLERANCE {
        return Err(Error::NotLagrangian { defect });
    }
    let frames = frame_from_jets(l, &jets)?;
    let mc = mean_curvature_from(l, &jets, &frames);
    let cs = canonical_section_from(l, &jets, &frames)?;
    let mut worst: f64 = 0.0;
    for i in 0..l.len() {
        for k in 0..l.dim() {
            worst = worst.max((C64::new(mc.sigma[i][k], 0.0) - I * cs.xi[i][k]).norm());
        }
    }
    Ok(worst)
}

/// `max |Ric(∂_iF, ∂_jF)| / (|∂_iF| |∂_jF|)`.
pub fn ricci_restriction(model: &ManifoldModel, l: &TorusImmersion) -> Result<f64> {
    let n = l.dim();
    let mut worst: f64 = 0.0;
    for i in 0..l.len() {
        let p = l.point(i);
        let jet = model.metric_at(&p)?;
        let ric = model.ricci_tensor_at(&p)?;
        for a in 0..n {
            for b in a + 1..n {
                let (ta, tb) = (l.tangent(i, a), l.tangent(i, b));
                let r = 2.0 * linalg::sesquilinear(&ric, ta, tb).im;
                worst = worst.max(r.abs() / (jet.norm(ta) * jet.norm(tb)));
            }
        }
    }
    Ok(worst)
}

/// Everything derived from one immersion, computed once.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub jets: Vec<MetricJet>,
    pub frames: FrameField,
    pub lagrangian_defect: f64,
    pub totally_real_margin: f64,
    pub mean_curvature: MeanCurvatureData,
    pub section: CanonicalSectionData,
}

impl Geometry {
    pub fn new(model: &ManifoldModel, l: &TorusImmersion) -> Result<Self> {
        let jets = l.metric_jets(model)?;
        let frames = frame_from_jets(l, &jets)?;
        let lagrangian_defect = lagrangian_defect_from(l, &jets);
        let totally_real_margin = margin_from(&jets, &frames);
        let mean_curvature = mean_curvature_from(l, &jets, &frames);
        let section = canonical_section_from(l, &jets, &frames)?;
        Ok(Self { jets, frames, lagrangian_defect, totally_real_margin, mean_curvature, section })
    }

    pub fn is_minimal_lagrangian(&self) -> bool {
        self.lagrangian_defect < LAGRANGIAN_TOLERANCE && self.mean_curvature.max_norm < MINIMAL_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn cp(n: usize) -> ManifoldModel {
        ManifoldModel::projective_t1(n)
    }

    fn immerse(model: &ManifoldModel, family: Family, res: usize) -> TorusImmersion {
        TorusImmersion::from_family(model, &family, res, Orientation::Standard).unwrap()
    }

    #[test]
    fn clifford_torus_is_minimal_lagrangian() {
        let m = cp(2);
        let l = immerse(&m, Family::Clifford, 32);
        let g = Geometry::new(&m, &l).unwrap();
        assert!(g.lagrangian_defect < 1e-10);
        assert!(g.totally_real_margin > 0.1);
        assert!(g.mean_curvature.max_norm < 1e-8);
        assert!(g.frames.orthonormality_defect < 1e-10);
        assert!(g.section.defining_defect < 1e-10);
        for i in 0..l.len() {
            assert!((g.section.norm[i] - 1.0).abs() < 1e-8);
            for k in 0..2 {
                assert!(g.section.xi[i][k].norm() < 1e-7);
            }
        }
        assert!(ricci_restriction(&m, &l).unwrap() < 1e-8);
    }

    #[test]
    fn equator_is_a_geodesic() {
        let m = cp(1);
        let l = immerse(&m, Family::Equator, 32);
        assert!(mean_curvature(&m, &l).unwrap().max_norm < 1e-8);
        assert!(lagrangian_defect(&m, &l).unwrap() < 1e-12);
        assert!(totally_real_margin(&m, &l).unwrap() > 0.1);
        assert!(connection_form_residual(&m, &l).unwrap() < 1e-8);
        assert!(ricci_restriction(&m, &l).unwrap() < 1e-10);
        // self-convergence of the length
        let coarse = volume(&m, &l).unwrap();
        let fine = volume(&m, &immerse(&m, Family::Equator, 64)).unwrap();
        assert!((coarse - fine).abs() < 1e-9);
    }

    #[test]
    fn weighted_orbit_torus_is_lagrangian_but_not_minimal() {
        let m = cp(2);
        let l = immerse(&m, Family::OrbitTorus { weights: vec![0.5, 0.25, 0.25] }, 32);
        assert!(lagrangian_defect(&m, &l).unwrap() < 1e-10);
        let mc = mean_curvature(&m, &l).unwrap();
        assert!(mc.max_norm > 0.1);
        assert!(mc.tangential_defect < 1e-8);
        assert!(connection_form_residual(&m, &l).unwrap() < 1e-7);
    }

    #[test]
    fn product_circles_have_unit_section() {
        let m = ManifoldModel::flat(2);
        let l = immerse(&m, Family::ProductCircles { radii: vec![1.0, 1.0] }, 16);
        let cs = canonical_section(&m, &l).unwrap();
        assert!(cs.norm.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn graph_torus_is_totally_real_not_lagrangian() {
        let m = cp(2);
        let l = immerse(&m, Family::GraphTorus { delta: 0.3 }, 32);
        let defect = lagrangian_defect(&m, &l).unwrap();
        assert!(defect > 0.01);
        assert!(totally_real_margin(&m, &l).unwrap() > 0.01);
        assert!(matches!(connection_form_residual(&m, &l), Err(Error::NotLagrangian { .. })));
        // Ric = t ω with t = 1
        assert!((ricci_restriction(&m, &l).unwrap() - defect).abs() < 1e-8);
    }

    #[test]
    fn complex_tangent_torus_has_zero_margin() {
        let m = ManifoldModel::flat(2);
        let l = immerse(&m, Family::ComplexTangent, 16);
        assert!(totally_real_margin(&m, &l).unwrap() < 1e-10);
        assert!(matches!(canonical_section(&m, &l), Err(Error::NotTotallyReal { .. })));
    }

    #[test]
    fn orientation_flip_negates_kappa_only() {
        let m = cp(2);
        let l = immerse(&m, Family::OrbitTorus { weights: vec![0.5, 0.3, 0.2] }, 16);
        let a = canonical_section(&m, &l).unwrap();
        let b = canonical_section(&m, &l.clone().reversed()).unwrap();
        let ha = mean_curvature(&m, &l).unwrap();
        let hb = mean_curvature(&m, &l.reversed()).unwrap();
        for i in 0..a.c.len() {
            assert!((a.c[i] + b.c[i]).norm() < 1e-12);
            for k in 0..2 {
                assert!((a.xi[i][k] - b.xi[i][k]).norm() < 1e-10);
                assert!((ha.sigma[i][k] - hb.sigma[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_coefficients_decay() {
        let m = cp(2);
        let l = immerse(&m, Family::OrbitTorus { weights: vec![0.5, 0.3, 0.2] }, 64);
        let f = frame_field(&m, &l).unwrap();
        for j in 0..2 {
            for a in 0..2 {
                let s: Vec<C64> = f.frame.iter().map(|v| v[j][a]).collect();
                assert!(l.grid.tail_fraction(&s, 16).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn family_validation() {
        let m = cp(2);
        let bad = Family::OrbitTorus { weights: vec![0.5, 0.5] };
        assert!(matches!(
            TorusImmersion::from_family(&m, &bad, 16, Orientation::Standard),
            Err(Error::InvalidFamily(_))
        ));
        assert!(matches!(
            TorusImmersion::from_family(&m, &Family::Equator, 16, Orientation::Standard),
            Err(Error::InvalidFamily(_))
        ));
        assert!(matches!(
            TorusImmersion::from_family(&m, &Family::Clifford, 12, Orientation::Standard),
            Err(Error::BadResolution(12))
        ));
    }
}
