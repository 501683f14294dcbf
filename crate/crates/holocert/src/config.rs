//! Scenario files: a JSON document with a versioned schema tag. Unknown
//! fields are rejected everywhere.

use serde::{Deserialize, Serialize};

use holocert_core::fields::{FieldBasis, HolomorphicField};
use holocert_core::kahler::ManifoldModel;
use holocert_core::linalg::CMatrix;
use holocert_core::optimize::{DescentOptions, OrbitWeights};
use holocert_core::submanifold::{Family, Orientation};
use holocert_core::{certify, fields};

use crate::expr::{parse_constant, parse_polynomial};
use crate::{CliError, SCHEMA};

pub const MIN_RESOLUTION: usize = 16;
pub const MAX_RESOLUTION: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Certify,
    Probe,
    Stokes,
    MomentCheck,
    OptimizeVolume,
    OptimizeDefect,
    ExtendDemo,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Certify,
        Task::Probe,
        Task::Stokes,
        Task::MomentCheck,
        Task::OptimizeVolume,
        Task::OptimizeDefect,
        Task::ExtendDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Certify => "certify",
            Task::Probe => "probe",
            Task::Stokes => "stokes",
            Task::MomentCheck => "moment-check",
            Task::OptimizeVolume => "optimize-volume",
            Task::OptimizeDefect => "optimize-defect",
            Task::ExtendDemo => "extend-demo",
        }
    }

    fn needs_submanifold(self) -> bool {
        matches!(self, Task::Certify | Task::Probe | Task::Stokes | Task::ExtendDemo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub task: Task,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submanifold: Option<SubmanifoldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisName>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `flat-Cn`, `CPn-t1` or `CPn-unit`.
    pub name: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmanifoldSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<OrientationName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationName {
    Standard,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisName {
    /// Real basis of `sl(n+1, C)` on `CP^n`.
    Sl,
    /// Torus generators `T_jk`, `j < k`.
    Torus,
    /// Constant and linear fields on flat space.
    FlatAffine,
    /// Only the fields listed under `fields`.
    None,
}

/// A user field: polynomial components in one chart, or a matrix acting on
/// homogeneous coordinates of `CP^n`. Entries are expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub start: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Command-line overrides, applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub tolerance: Option<f64>,
}

/// Parses scenario text; errors name the JSON path and position.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Parse { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })
}

/// Validated, ready-to-run form of a scenario.
#[derive(Debug, Clone)]
pub struct Plan {
    pub task: Task,
    pub model: ManifoldModel,
    pub family: Option<Family>,
    pub resolution: usize,
    pub orientation: Orientation,
    pub basis: FieldBasis,
    /// The tolerance that decides the verdict of the task.
    pub tolerance: f64,
    pub start: Option<OrbitWeights>,
    pub descent: DescentOptions,
    pub points: usize,
    pub seed: u64,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation { field: field.into(), message: message.into() }
}

fn check_resolution(field: &str, n: usize) -> Result<usize, CliError> {
    if !n.is_power_of_two() || !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&n) {
        return Err(invalid(field, format!("{n} is not a power of two in {MIN_RESOLUTION}..={MAX_RESOLUTION}")));
    }
    Ok(n)
}

fn positive(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(field, format!("{x} must be positive and finite")))
    }
}

impl Scenario {
    /// Applies overrides in place so the echoed scenario shows what ran.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.resolution {
            match (self.task, &mut self.submanifold, &mut self.optimize) {
                (Task::OptimizeVolume | Task::OptimizeDefect, _, Some(opt)) => opt.resolution = Some(n),
                (_, Some(s), _) => s.resolution = Some(n),
                _ => {}
            }
        }
        if let Some(t) = o.tolerance {
            let slot = match self.task {
                Task::Certify => &mut self.tolerances.certificate,
                Task::Probe => &mut self.tolerances.identity,
                Task::Stokes => &mut self.tolerances.stokes,
                Task::MomentCheck => &mut self.tolerances.moment,
                Task::OptimizeVolume | Task::OptimizeDefect => &mut self.tolerances.gradient,
                Task::ExtendDemo => &mut self.tolerances.extension,
            };
            *slot = Some(t);
        }
    }

    pub fn validate(&self) -> Result<Plan, CliError> {
        if self.schema != SCHEMA {
            return Err(invalid("schema", format!("expected `{SCHEMA}`, found `{}`", self.schema)));
        }
        let model = ManifoldModel::builtin(&self.model.name, self.model.dim).map_err(|e| match e {
            holocert_core::Error::UnknownModel(_) => {
                invalid("model.name", format!("unknown model `{}` (flat-Cn, CPn-t1, CPn-unit)", self.model.name))
            }
            other => invalid("model.dim", other.to_string()),
        })?;
        if self.model.dim > 4 {
            return Err(invalid("model.dim", "dimensions above 4 are not supported"));
        }

        let mut family = None;
        let mut resolution = 0;
        let mut orientation = Orientation::Standard;
        if self.task.needs_submanifold() {
            let s = self.submanifold.as_ref().ok_or_else(|| invalid("submanifold", "required for this task"))?;
            let n = s.resolution.ok_or_else(|| invalid("submanifold.resolution", "required"))?;
            resolution = check_resolution("submanifold.resolution", n)?;
            family = Some(family_from_spec(s, &model)?);
            if s.orientation == Some(OrientationName::Reversed) {
                orientation = Orientation::Reversed;
            }
        } else if self.submanifold.is_some() {
            return Err(invalid("submanifold", format!("not used by task `{}`", self.task.name())));
        }

        let basis = self.basis(&model)?;
        if matches!(self.task, Task::Certify | Task::Stokes | Task::MomentCheck) && basis.fields.is_empty() {
            return Err(invalid("fields", "the basis is empty"));
        }

        let t = &self.tolerances;
        let checked = |name: &str, value: Option<f64>, default: f64| -> Result<f64, CliError> {
            value.map(|x| positive(&format!("tolerances.{name}"), x)).transpose().map(|v| v.unwrap_or(default))
        };
        let tolerance = match self.task {
            Task::Certify => checked("certificate", t.certificate, certify::CERTIFICATE_TOLERANCE)?,
            Task::Probe => checked("identity", t.identity, certify::IDENTITY_TOLERANCE)?,
            Task::Stokes => checked("stokes", t.stokes, certify::STOKES_TOLERANCE)?,
            Task::MomentCheck => checked("moment", t.moment, fields::MOMENT_TOLERANCE)?,
            Task::OptimizeVolume | Task::OptimizeDefect => {
                checked("gradient", t.gradient, DescentOptions::default().gradient_tolerance)?
            }
            Task::ExtendDemo => checked("extension", t.extension, EXTENSION_TOLERANCE)?,
        };

        let mut start = None;
        let mut descent = DescentOptions::default();
        match (self.task, &self.optimize) {
            (Task::OptimizeVolume | Task::OptimizeDefect, None) => {
                return Err(invalid("optimize", "required for this task"));
            }
            (Task::OptimizeVolume | Task::OptimizeDefect, Some(o)) => {
                if !model.is_projective() {
                    return Err(invalid("model.name", "orbit-family optimization needs CPn"));
                }
                if o.start.len() != model.dim() + 1 {
                    return Err(invalid(
                        "optimize.start",
                        format!("expected {} weights, found {}", model.dim() + 1, o.start.len()),
                    ));
                }
                start = Some(OrbitWeights::new(o.start.clone()).map_err(|e| invalid("optimize.start", e.to_string()))?);
                if let Some(n) = o.resolution {
                    descent.resolution = check_resolution("optimize.resolution", n)?;
                }
                if let Some(k) = o.max_iterations {
                    descent.max_iterations = k;
                }
                descent.gradient_tolerance = tolerance;
                resolution = descent.resolution;
            }
            (_, Some(_)) => return Err(invalid("optimize", format!("not used by task `{}`", self.task.name()))),
            _ => {}
        }

        let points = self.sampling.as_ref().and_then(|s| s.points).unwrap_or(100);
        if points == 0 {
            return Err(invalid("sampling.points", "must be at least 1"));
        }
        let seed = self.sampling.as_ref().and_then(|s| s.seed).unwrap_or(1);

        Ok(Plan {
            task: self.task,
            model,
            family,
            resolution,
            orientation,
            basis,
            tolerance,
            start,
            descent,
            points,
            seed,
        })
    }

    fn basis(&self, model: &ManifoldModel) -> Result<FieldBasis, CliError> {
        let default = match (self.task, model.is_projective()) {
            (Task::MomentCheck, true) => BasisName::Torus,
            (Task::MomentCheck, false) => BasisName::None,
            (_, true) => BasisName::Sl,
            (_, false) => BasisName::FlatAffine,
        };
        let name = self.basis.unwrap_or(if self.fields.is_empty() { default } else { BasisName::None });
        let mut basis = match name {
            BasisName::Sl => FieldBasis::sl_real(model).map_err(|e| invalid("basis", e.to_string()))?,
            BasisName::Torus => FieldBasis::torus(model).map_err(|e| invalid("basis", e.to_string()))?,
            BasisName::FlatAffine if model.is_projective() => {
                return Err(invalid("basis", "flat-affine needs a flat model"));
            }
            BasisName::FlatAffine => FieldBasis::flat_affine(model.dim()),
            BasisName::None => FieldBasis { name: "custom".into(), fields: Vec::new() },
        };
        for (i, f) in self.fields.iter().enumerate() {
            basis.fields.push(field_from_spec(f, model, &format!("fields[{i}]"))?);
        }
        if !self.fields.is_empty() && name != BasisName::None {
            basis.name = format!("{}+custom", basis.name);
        }
        Ok(basis)
    }
}

/// Largest real-angle reproduction error accepted by the extension demo.
pub const EXTENSION_TOLERANCE: f64 = 1e-10;

fn family_from_spec(s: &SubmanifoldSpec, model: &ManifoldModel) -> Result<Family, CliError> {
    let given: [(&str, bool); 5] = [
        ("weights", s.weights.is_some()),
        ("level", s.level.is_some()),
        ("radii", s.radii.is_some()),
        ("epsilon", s.epsilon.is_some()),
        ("delta", s.delta.is_some()),
    ];
    let (family, used): (Family, &[&str]) = match s.family.as_str() {
        "orbit-torus" => (
            Family::OrbitTorus {
                weights: s.weights.clone().ok_or_else(|| invalid("submanifold.weights", "required for orbit-torus"))?,
            },
            &["weights"],
        ),
        "clifford-torus" => (Family::Clifford, &[]),
        "equator" => (Family::Equator, &[]),
        "pair-balanced-torus" => (
            Family::PairBalanced {
                level: s.level.ok_or_else(|| invalid("submanifold.level", "required for pair-balanced-torus"))?,
            },
            &["level"],
        ),
        "product-circles" => (
            Family::ProductCircles {
                radii: s.radii.clone().ok_or_else(|| invalid("submanifold.radii", "required for product-circles"))?,
            },
            &["radii"],
        ),
        "perturbed-clifford" => (
            Family::PerturbedClifford {
                epsilon: s.epsilon.ok_or_else(|| invalid("submanifold.epsilon", "required for perturbed-clifford"))?,
            },
            &["epsilon"],
        ),
        "graph-torus" => (
            Family::GraphTorus {
                delta: s.delta.ok_or_else(|| invalid("submanifold.delta", "required for graph-torus"))?,
            },
            &["delta"],
        ),
        "complex-tangent-torus" => (Family::ComplexTangent, &[]),
        other => return Err(invalid("submanifold.family", format!("unknown family `{other}`"))),
    };
    if let Some((extra, _)) = given.iter().find(|(k, set)| *set && !used.contains(k)) {
        return Err(invalid(format!("submanifold.{extra}"), format!("not used by {}", s.family)));
    }
    family.validate(model).map_err(|e| invalid("submanifold", e.to_string()))?;
    Ok(family)
}

fn field_from_spec(f: &FieldSpec, model: &ManifoldModel, at: &str) -> Result<HolomorphicField, CliError> {
    let n = model.dim();
    match (&f.components, &f.matrix) {
        (Some(comps), None) => {
            let chart = f.chart.unwrap_or(0);
            if chart >= model.chart_count() {
                return Err(invalid(format!("{at}.chart"), format!("model has {} charts", model.chart_count())));
            }
            if comps.len() != n {
                return Err(invalid(format!("{at}.components"), format!("expected {n} components, found {}", comps.len())));
            }
            let polys = comps
                .iter()
                .enumerate()
                .map(|(k, text)| {
                    parse_polynomial(text, n).map_err(|e| invalid(format!("{at}.components[{k}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(HolomorphicField::polynomial(f.label.clone(), chart, polys))
        }
        (None, Some(rows)) => {
            if !model.is_projective() {
                return Err(invalid(format!("{at}.matrix"), "matrix fields need CPn"));
            }
            if f.chart.is_some() {
                return Err(invalid(format!("{at}.chart"), "not used by matrix fields"));
            }
            let m = n + 1;
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(invalid(format!("{at}.matrix"), format!("expected a {m}x{m} matrix")));
            }
            let mut a = CMatrix::zeros(m, m);
            for (r, row) in rows.iter().enumerate() {
                for (c, text) in row.iter().enumerate() {
                    a[(r, c)] = parse_constant(text).map_err(|e| invalid(format!("{at}.matrix[{r}][{c}]"), e.to_string()))?;
                }
            }
            Ok(HolomorphicField::projective(f.label.clone(), a))
        }
        _ => Err(invalid(at, "give exactly one of `components` or `matrix`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> Scenario {
        parse_scenario(text).unwrap()
    }

    #[test]
    fn overrides_land_on_the_task_tolerance() {
        let mut s = scenario(
            r#"{"schema": "holocert/1", "task": "optimize-defect", "model": {"name": "CPn-t1", "dim": 2},
                "optimize": {"start": [0.4, 0.3, 0.3]}}"#,
        );
        s.apply(&Overrides { resolution: Some(64), tolerance: Some(1e-4) });
        assert_eq!(s.optimize.as_ref().unwrap().resolution, Some(64));
        assert_eq!(s.tolerances.gradient, Some(1e-4));
        let plan = s.validate().unwrap();
        assert_eq!((plan.descent.resolution, plan.descent.gradient_tolerance), (64, 1e-4));
    }

    #[test]
    fn stray_family_parameters_are_rejected() {
        let s = scenario(
            r#"{"schema": "holocert/1", "task": "probe", "model": {"name": "CPn-t1", "dim": 2},
                "submanifold": {"family": "clifford-torus", "resolution": 16, "epsilon": 0.1}}"#,
        );
        match s.validate() {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "submanifold.epsilon"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        let s = scenario(
            r#"{"schema": "holocert/1", "task": "certify", "model": {"name": "CPn-t1", "dim": 2},
                "submanifold": {"family": "orbit-torus", "weights": [0.5, 0.5, 0.5], "resolution": 16}}"#,
        );
        assert!(matches!(s.validate(), Err(CliError::Validation { field, .. }) if field == "submanifold"));
    }
}
