//! Projected descent over the moment polytope of orbit tori in `CP^n`.
//!
//! Two objectives are offered: the volume of the orbit torus `{|z_i|² = a_i}`
//! and the certificate defect `Σ_{j<k} |∫_L div(T_jk)|²` over the torus
//! generators. Gradients are central differences along the simplex tangent
//! directions `e_i − (1/(n+1)) Σ e_j`, steps are backtracking Armijo, and the
//! iterate is projected back onto `{a_i ≥ floor, Σ a_i = 1}`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certify::{divergence_certificate, divergence_integrals, CertificateReport, CERTIFICATE_TOLERANCE};
use crate::fields::FieldBasis;
use crate::kahler::ManifoldModel;
use crate::submanifold::{volume, Family, Geometry, Orientation, TorusImmersion};
use crate::{Error, Result};

/// Smallest admissible weight.
pub const WEIGHT_FLOOR: f64 = 1e-3;

/// Interior point of the simplex, `a_i ≥ WEIGHT_FLOOR`, `Σ a_i = 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct OrbitWeights(Vec<f64>);

impl OrbitWeights {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidWeights("need at least two weights".into()));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidWeights("weights must be finite".into()));
        }
        if (a.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(alloc::format!("weights sum to {}, not 1", a.iter().sum::<f64>())));
        }
        if let Some(x) = a.iter().find(|&&x| x < WEIGHT_FLOOR) {
            return Err(Error::InvalidWeights(alloc::format!("weight {x} is below the floor {WEIGHT_FLOOR}")));
        }
        Ok(Self(a))
    }

    /// The symmetric point `a_i = 1/(n+1)`.
    pub fn clifford(n: usize) -> Self {
        Self(vec![1.0 / (n + 1) as f64; n + 1])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn at_floor(&self) -> bool {
        self.0.iter().any(|&x| x <= WEIGHT_FLOOR * (1.0 + 1e-12))
    }

    fn family(&self) -> Family {
        Family::OrbitTorus { weights: self.0.clone() }
    }
}

/// Uniform samples from the simplex with every weight at least `margin`.
pub fn random_interior_weights(n: usize, count: usize, margin: f64, seed: u64) -> Vec<OrbitWeights> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // normalized exponentials are uniform on the simplex
        let e: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        let mut a: Vec<f64> = e.iter().map(|x| x / s).collect();
        if a.iter().any(|&x| x < margin) {
            continue;
        }
        let drift = 1.0 - a.iter().sum::<f64>();
        a[0] += drift;
        out.push(OrbitWeights(a));
    }
    out
}

/// Euclidean projection onto `{a_i ≥ floor, Σ a_i = 1}`.
fn project(a: &[f64], floor: f64) -> Vec<f64> {
    // shift so the constraint is the standard simplex with total 1 − m·floor
    let m = a.len() as f64;
    let total = 1.0 - m * floor;
    let y: Vec<f64> = a.iter().map(|x| x - floor).collect();
    let mut u = y.clone();
    u.sort_by(|p, q| q.total_cmp(p));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - total) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|x| (x - tau).max(0.0) + floor).collect()
}

/// Volume of the orbit torus with weights `a` at resolution `n`.
pub fn orbit_volume(model: &ManifoldModel, a: &OrbitWeights, resolution: usize) -> Result<f64> {
    let l = TorusImmersion::from_family(model, &a.family(), resolution, Orientation::Standard)?;
    volume(model, &l)
}

/// `Σ_{j<k} |∫_L div(T_jk)|²` over the torus generators.
pub fn orbit_defect(model: &ManifoldModel, a: &OrbitWeights, resolution: usize) -> Result<f64> {
    let basis = FieldBasis::torus(model)?;
    let l = TorusImmersion::from_family(model, &a.family(), resolution, Orientation::Standard)?;
    let g = Geometry::new(model, &l)?;
    Ok(divergence_integrals(model, &l, &g, &basis.fields)?.iter().map(|v| v.norm_sqr()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Objective {
    Volume,
    Defect,
}

/// Step policy and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DescentOptions {
    /// Grid resolution for every objective evaluation.
    pub resolution: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub fd_step: f64,
    /// Length of the first trial displacement in weight space.
    pub initial_step: f64,
    pub backtrack: f64,
    pub sufficient_decrease: f64,
    /// Halvings allowed before the line search is declared stalled.
    pub max_backtracks: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            resolution: 32,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            fd_step: 1e-4,
            initial_step: 0.1,
            backtrack: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Iterate {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub volume: f64,
    pub gradient_norm: f64,
    /// Largest `|∫ div V|` over the `sl(n+1)` basis at this iterate.
    pub certificate_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Termination {
    Converged,
    MaxIterations,
    FloorReached,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DescentTrace {
    pub objective: Objective,
    pub options: DescentOptions,
    pub iterates: Vec<Iterate>,
    pub termination: Termination,
    /// Two-resolution certificate at the last iterate.
    pub certificate: CertificateReport,
}

impl DescentTrace {
    pub fn last(&self) -> &Iterate {
        self.iterates.last().expect("trace holds the start point")
    }

    pub fn final_weights(&self) -> &[f64] {
        &self.last().weights
    }
}

/// Descent on orbit-torus volume. Returns `Error::FloorReached` or
/// `Error::Stalled` (carrying the trace) when the search cannot finish in the
/// interior.
pub fn minimize_volume(model: &ManifoldModel, start: &OrbitWeights, options: &DescentOptions) -> Result<DescentTrace> {
    descend(model, start, Objective::Volume, options)
}

/// Descent on `Σ_{j<k} |∫_L div(T_jk)|²`.
pub fn minimize_defect(model: &ManifoldModel, start: &OrbitWeights, options: &DescentOptions) -> Result<DescentTrace> {
    descend(model, start, Objective::Defect, options)
}

fn descend(model: &ManifoldModel, start: &OrbitWeights, objective: Objective, opt: &DescentOptions) -> Result<DescentTrace> {
    if !model.is_projective() {
        return Err(Error::NotProjective(model.name().into()));
    }
    if start.len() != model.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: model.dim() + 1, got: start.len() });
    }
    let sl = FieldBasis::sl_real(model)?;
    let eval = |a: &[f64]| -> Result<f64> {
        let w = OrbitWeights(a.to_vec());
        match objective {
            Objective::Volume => orbit_volume(model, &w, opt.resolution),
            Objective::Defect => orbit_defect(model, &w, opt.resolution),
        }
    };
    let record = |a: &[f64], f: f64, grad: &[f64]| -> Result<Iterate> {
        let w = OrbitWeights(a.to_vec());
        let l = TorusImmersion::from_family(model, &w.family(), opt.resolution, Orientation::Standard)?;
        let g = Geometry::new(model, &l)?;
        let cert = divergence_integrals(model, &l, &g, &sl.fields)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Iterate {
            weights: a.to_vec(),
            objective: f,
            volume: volume(model, &l)?,
            gradient_norm: norm(grad),
            certificate_max: cert,
        })
    };

    let m = start.len();
    let mut a = start.as_slice().to_vec();
    let mut f = eval(&a)?;
    let mut iterates = Vec::new();
    let termination = loop {
        let grad = gradient(&eval, &a, opt.fd_step)?;
        iterates.push(record(&a, f, &grad)?);
        if norm(&grad) < opt.gradient_tolerance {
            break Termination::Converged;
        }
        if iterates.len() > opt.max_iterations {
            break Termination::MaxIterations;
        }
        // the first trial moves the weights by `initial_step` in Euclidean norm
        let mut step = opt.initial_step / norm(&grad);
        let mut accepted = None;
        for _ in 0..opt.max_backtracks {
            let trial: Vec<f64> = project(&a.iter().zip(&grad).map(|(x, g)| x - step * g).collect::<Vec<_>>(), WEIGHT_FLOOR);
            let moved: f64 = a.iter().zip(&trial).zip(&grad).map(|((x, y), g)| g * (x - y)).sum();
            if moved > 0.0 {
                let ft = eval(&trial)?;
                if ft <= f - opt.sufficient_decrease * moved {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            step *= opt.backtrack;
        }
        let Some((next, fnext)) = accepted else { break Termination::Stalled };
        a = next;
        f = fnext;
        if OrbitWeights(a.clone()).at_floor() {
            let grad = vec![f64::NAN; m];
            let mut it = record(&a, f, &grad)?;
            it.gradient_norm = f64::NAN;
            iterates.push(it);
            break Termination::FloorReached;
        }
    };

    let family = OrbitWeights(a.clone()).family();
    let certificate =
        divergence_certificate(model, &family, opt.resolution, Orientation::Standard, &sl, CERTIFICATE_TOLERANCE)?;
    let trace = DescentTrace { objective, options: *opt, iterates, termination, certificate };
    match termination {
        Termination::FloorReached => Err(Error::FloorReached { trace: Box::new(trace) }),
        Termination::Stalled => Err(Error::Stalled { trace: Box::new(trace) }),
        _ => Ok(trace),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central differences along `d_i = e_i − mean`; the result is the gradient
/// projected onto the simplex tangent space.
fn gradient(eval: &impl Fn(&[f64]) -> Result<f64>, a: &[f64], h: f64) -> Result<Vec<f64>> {
    let m = a.len();
    (0..m)
        .map(|i| {
            let shift = |s: f64| -> Vec<f64> {
                a.iter().enumerate().map(|(j, x)| x + s * (if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64)).collect()
            };
            Ok((eval(&shift(h))? - eval(&shift(-h))?) / (2.0 * h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn weights_are_validated() {
        assert!(OrbitWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(matches!(OrbitWeights::new(vec![0.6, 0.5]), Err(Error::InvalidWeights(_))));
        assert!(matches!(OrbitWeights::new(vec![0.9995, 0.0005]), Err(Error::InvalidWeights(_))));
        assert!(matches!(OrbitWeights::new(vec![1.0]), Err(Error::InvalidWeights(_))));
    }

    #[test]
    fn projection_keeps_the_floor_and_the_sum() {
        let p = project(&[1.2, -0.1, -0.1], WEIGHT_FLOOR);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p[1] == WEIGHT_FLOOR && p[2] == WEIGHT_FLOOR);
        let q = project(&[0.2, 0.3, 0.5], WEIGHT_FLOOR);
        assert!(q.iter().zip([0.2, 0.3, 0.5]).all(|(x, y)| (x - y).abs() < 1e-15));
    }

    #[test]
    fn equator_length_is_stationary() {
        let m = ManifoldModel::projective_t1(1);
        let a = OrbitWeights::clifford(1);
        // |w| = 1 with g = 2 Re h and g_{ww~} = 2/(1+|w|²)² has length 2π
        let len = orbit_volume(&m, &a, 16).unwrap();
        assert!((len - 2.0 * PI).abs() < 1e-12, "{len}");
        let eval = |x: &[f64]| orbit_volume(&m, &OrbitWeights(x.to_vec()), 16);
        assert!(norm(&gradient(&eval, a.as_slice(), 1e-4).unwrap()) < 1e-6);
    }

    #[test]
    fn defect_matches_the_moment_formula() {
        let m = ManifoldModel::projective_t1(2);
        let a = OrbitWeights::new(vec![0.5, 0.25, 0.25]).unwrap();
        let vol = orbit_volume(&m, &a, 16).unwrap();
        let w = a.as_slice();
        let expect: f64 = [(0, 1), (0, 2), (1, 2)].iter().map(|&(j, k)| ((w[j] - w[k]) * vol).powi(2)).sum();
        assert!((orbit_defect(&m, &a, 16).unwrap() - expect).abs() < 1e-6 * expect);
        assert!(orbit_defect(&m, &OrbitWeights::clifford(2), 16).unwrap() < 1e-12);
    }

    #[test]
    fn clifford_start_is_stationary() {
        let m = ManifoldModel::projective_t1(2);
        let t = minimize_defect(&m, &OrbitWeights::clifford(2), &DescentOptions { resolution: 16, ..Default::default() })
            .unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert_eq!(t.iterates.len(), 1);
    }

    #[test]
    fn defect_descent_reaches_clifford() {
        let m = ManifoldModel::projective_t1(2);
        let start = OrbitWeights::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = minimize_defect(&m, &start, &DescentOptions { resolution: 16, ..Default::default() }).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        for x in t.final_weights() {
            assert!((x - 1.0 / 3.0).abs() < 1e-3, "{:?}", t.final_weights());
        }
        assert!(t.iterates.windows(2).all(|w| w[1].objective < w[0].objective));
        assert!(t.certificate.max_modulus < 1e-6);
    }

    #[test]
    fn volume_descent_leaves_through_the_floor() {
        let m = ManifoldModel::projective_t1(2);
        let start = OrbitWeights::new(vec![0.6, 0.2, 0.2]).unwrap();
        let err = minimize_volume(&m, &start, &DescentOptions { resolution: 16, ..Default::default() }).unwrap_err();
        let Error::FloorReached { trace } = err else { panic!("{err:?}") };
        assert!(trace.iterates.windows(2).all(|w| w[1].volume < w[0].volume));
        assert!(trace.final_weights().iter().any(|&x| x <= WEIGHT_FLOOR * (1.0 + 1e-12)));
    }
}
