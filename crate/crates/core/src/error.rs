use alloc::boxed::Box;
use alloc::string::String;

use crate::optimize::DescentTrace;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point outside the domain of chart {chart}")]
    OutsideDomain { chart: usize },

    #[error("metric is not positive definite at the requested point (model definition error)")]
    NotPositiveDefinite,

    #[error("metric is singular at the requested point")]
    SingularMetric,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("chart {chart} is not defined for this model")]
    UnknownChart { chart: usize },

    #[error("model `{0}` is not flagged as a Kähler-Einstein candidate")]
    NotEinsteinCandidate(String),

    #[error("model is not Kähler-Einstein: Ricci residual {residual:e} after fitting t = {t}")]
    NotKahlerEinstein { t: f64, residual: f64 },

    #[error("Einstein constant is zero; the moment-map construction needs t != 0")]
    ZeroEinsteinConstant,

    #[error("field `{label}` is not holomorphic: residual {residual:e}")]
    NotHolomorphic { label: String, residual: f64 },

    #[error("field `{label}` is not an infinitesimal isometry: Killing residual {residual:e}")]
    NotIsometry { label: String, residual: f64 },

    #[error("field `{label}` is undefined on chart {chart}")]
    FieldUndefined { label: String, chart: usize },

    #[error("torus generator indices ({j}, {k}) out of range for CP^{n}")]
    GeneratorIndex { j: usize, k: usize, n: usize },

    #[error("operation requires projective space, model is `{0}`")]
    NotProjective(String),

    #[error("grid resolution {0} must be a power of two and at least 4")]
    BadResolution(usize),

    #[error("resolution mismatch: expected {expected} samples, got {got}")]
    ResolutionMismatch { expected: usize, got: usize },

    #[error("immersion is degenerate at grid point {index}: smallest singular value {value:e}")]
    DegenerateImmersion { index: usize, value: f64 },

    #[error("Gram-Schmidt frame degenerates at grid point {index}")]
    FrameDegenerate { index: usize },

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("totally-real margin {margin:e} is below tolerance {tolerance:e}")]
    NotTotallyReal { margin: f64, tolerance: f64 },

    #[error("submanifold is not Lagrangian: defect {defect:e}")]
    NotLagrangian { defect: f64 },

    #[error("submanifold is not minimal Lagrangian: Lagrangian defect {defect:e}, max |h| {mean_curvature:e}")]
    NotMinimalLagrangian { defect: f64, mean_curvature: f64 },

    #[error("coefficient sum diverges at tube half-width {half_width}")]
    DivergentAtWidth { half_width: f64 },

    #[error("insufficient Fourier coefficient decay: outer-shell mass {shell_mass:e}")]
    InsufficientDecay { shell_mass: f64 },

    #[error("complexified Jacobian is singular at grid point {index} (condition number {condition:e})")]
    JacobianSingular { index: usize, condition: f64 },

    #[error("evaluation point leaves the tube of half-width {half_width}")]
    OutsideTube { half_width: f64 },

    #[error("orbit weights invalid: {0}")]
    InvalidWeights(String),

    #[error("descent reached the simplex floor after {} iterates", trace.iterates.len())]
    FloorReached { trace: Box<DescentTrace> },

    #[error("line search found no decrease after {} iterates", trace.iterates.len())]
    Stalled { trace: Box<DescentTrace> },
}
