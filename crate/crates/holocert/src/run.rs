//! Task dispatch, report assembly and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use holocert_core::certify::{
    converse_probe, divergence_certificate, stokes_pointwise_check, CertificateReport, ConverseProbeReport,
    StokesReport,
};
use holocert_core::extend::{auto_tube, complexify_immersion, extend_fourier, FourierSeries};
use holocert_core::fields::{
    cpn_torus_generator, divergence, moment_map_check, projective_moment, MomentCheckReport,
};
use holocert_core::kahler::EinsteinFit;
use holocert_core::optimize::{minimize_defect, minimize_volume, DescentTrace, Termination};
use holocert_core::submanifold::{Geometry, TorusImmersion};
use holocert_core::{sampling, Error, C64, CONVENTIONS, I};

use crate::config::{parse_scenario, Overrides, Plan, Scenario, Task};
use crate::{CliError, SCHEMA};

/// `|i div T_jk − (|z_j|² − |z_k|²)/Σ|z_i|²|` must stay below this.
pub const FORMULA_TOLERANCE: f64 = 1e-8;
/// Largest accepted `|∂f/∂w̄|` of a Fourier continuation.
pub const CR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub tool: String,
    pub scenario: Scenario,
    pub conventions: &'static str,
    pub tolerance: f64,
    pub result: TaskResult,
    pub verdict: RunVerdict,
    pub tables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunVerdict {
    pub passed: bool,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskResult {
    Certificate(CertificateReport),
    Probe(ConverseProbeReport),
    Stokes { fields: Vec<StokesReport>, max_residual: f64 },
    MomentCheck { einstein: EinsteinFit, fields: Vec<MomentCheckReport>, formula: Vec<FormulaRow> },
    Descent(DescentTrace),
    Extension(ExtensionDemo),
    /// The task stopped on a numerical condition (not an internal fault).
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaRow {
    pub generator: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionDemo {
    pub components: Vec<ExtensionRow>,
    pub jacobian_condition: f64,
    pub restriction_defect: f64,
    pub tolerance: f64,
    pub cr_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionRow {
    pub component: usize,
    pub bandwidth: usize,
    pub half_width: f64,
    /// Largest error against the samples at real angles.
    pub reproduction_error: f64,
    pub cr_residual: f64,
    pub truncation: usize,
    pub truncation_gap: f64,
    pub tail_bound: f64,
}

/// A CSV table, written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub tables: Vec<Table>,
    pub wall_seconds: f64,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.verdict.passed {
            crate::EXIT_PASS
        } else {
            crate::EXIT_VERDICT
        }
    }
}

enum Class {
    Validation,
    Verdict,
    Internal,
}

fn classify(e: &Error) -> Class {
    match e {
        Error::UnknownModel(_)
        | Error::UnknownChart { .. }
        | Error::GeneratorIndex { .. }
        | Error::NotProjective(_)
        | Error::BadResolution(_)
        | Error::InvalidFamily(_)
        | Error::InvalidWeights(_)
        | Error::NotEinsteinCandidate(_)
        | Error::DimensionMismatch { .. } => Class::Validation,
        Error::NotKahlerEinstein { .. }
        | Error::ZeroEinsteinConstant
        | Error::NotHolomorphic { .. }
        | Error::NotIsometry { .. }
        | Error::FieldUndefined { .. }
        | Error::DegenerateImmersion { .. }
        | Error::FrameDegenerate { .. }
        | Error::NotTotallyReal { .. }
        | Error::NotLagrangian { .. }
        | Error::NotMinimalLagrangian { .. }
        | Error::DivergentAtWidth { .. }
        | Error::InsufficientDecay { .. }
        | Error::JacobianSingular { .. }
        | Error::FloorReached { .. }
        | Error::Stalled { .. } => Class::Verdict,
        Error::OutsideDomain { .. }
        | Error::NotPositiveDefinite
        | Error::SingularMetric
        | Error::ResolutionMismatch { .. }
        | Error::OutsideTube { .. } => Class::Internal,
    }
}

/// Parses, validates and runs a scenario. Nothing is written to disk.
pub fn run_scenario(text: &str, overrides: &Overrides) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let mut scenario = parse_scenario(text)?;
    scenario.apply(overrides);
    let plan = scenario.validate()?;
    let (result, tables) = match execute(&plan) {
        Ok(done) => done,
        Err(e) => match classify(&e) {
            Class::Validation => return Err(CliError::Validation { field: "scenario".into(), message: e.to_string() }),
            Class::Internal => return Err(CliError::Internal(e.to_string())),
            Class::Verdict => (TaskResult::Failed { error: e.to_string() }, Vec::new()),
        },
    };
    let verdict = judge(&plan, &result);
    let report = RunReport {
        schema: SCHEMA,
        tool: format!("holocert {}", env!("CARGO_PKG_VERSION")),
        scenario,
        conventions: CONVENTIONS,
        tolerance: plan.tolerance,
        result,
        verdict,
        tables: tables.iter().map(Table::file_name).collect(),
    };
    Ok(RunOutcome { report, tables, wall_seconds: started.elapsed().as_secs_f64() })
}

fn immersion(plan: &Plan) -> Result<TorusImmersion, Error> {
    let family = plan.family.as_ref().expect("validated: task has a submanifold");
    TorusImmersion::from_family(&plan.model, family, plan.resolution, plan.orientation)
}

fn execute(plan: &Plan) -> Result<(TaskResult, Vec<Table>), Error> {
    let model = &plan.model;
    match plan.task {
        Task::Certify => {
            let family = plan.family.as_ref().expect("validated");
            let r = divergence_certificate(model, family, plan.resolution, plan.orientation, &plan.basis, plan.tolerance)?;
            let mut t = Table::new("certificate", &["label", "re", "im", "modulus", "re_fine", "im_fine"]);
            for e in &r.entries {
                t.push(vec![e.label.clone(), fmt(e.re), fmt(e.im), fmt(e.modulus), fmt(e.re_fine), fmt(e.im_fine)]);
            }
            Ok((TaskResult::Certificate(r), vec![t]))
        }
        Task::Probe => {
            let mut r = converse_probe(model, &immersion(plan)?)?;
            r.identity_tolerance = plan.tolerance;
            r.identity_holds = r.gap_real < plan.tolerance && r.gap_imag < plan.tolerance;
            let mut t = Table::new("probe", &["column", "norm", "divergence", "gap"]);
            t.push(vec!["real".into(), fmt(r.norm_real), fmt(r.divergence_real), fmt(r.gap_real)]);
            t.push(vec!["imag".into(), fmt(r.norm_imag), fmt(r.divergence_imag), fmt(r.gap_imag)]);
            Ok((TaskResult::Probe(r), vec![t]))
        }
        Task::Stokes => {
            let l = immersion(plan)?;
            let g = Geometry::new(model, &l)?;
            let mut fields = Vec::with_capacity(plan.basis.len());
            let mut t = Table::new("stokes", &["label", "max_residual", "tolerance", "passed"]);
            for v in &plan.basis.fields {
                let mut r = stokes_pointwise_check(model, &l, &g, v)?;
                r.tolerance = plan.tolerance;
                r.passed = r.max_residual < plan.tolerance;
                t.push(vec![r.label.clone(), fmt(r.max_residual), fmt(r.tolerance), r.passed.to_string()]);
                fields.push(r);
            }
            let max_residual = fields.iter().map(|r| r.max_residual).fold(0.0, f64::max);
            Ok((TaskResult::Stokes { fields, max_residual }, vec![t]))
        }
        Task::MomentCheck => {
            let einstein = model.einstein_constant()?;
            let points = sampling::random_points(model, plan.points, plan.seed);
            let mut fields = Vec::with_capacity(plan.basis.len());
            let mut t = Table::new(
                "moment",
                &["label", "einstein_constant", "points", "killing_residual", "max_residual", "tolerance", "passed"],
            );
            for v in &plan.basis.fields {
                let mut r = moment_map_check(model, v, &points)?;
                r.tolerance = plan.tolerance;
                r.passed = r.max_residual < plan.tolerance;
                t.push(vec![
                    r.label.clone(),
                    fmt(r.einstein_constant),
                    r.points.to_string(),
                    fmt(r.killing_residual),
                    fmt(r.max_residual),
                    fmt(r.tolerance),
                    r.passed.to_string(),
                ]);
                fields.push(r);
            }
            let mut formula = Vec::new();
            let mut ft = Table::new("formula", &["generator", "max_residual", "tolerance", "passed"]);
            if model.is_projective() {
                let m = model.dim() + 1;
                for j in 1..=m {
                    for k in j + 1..=m {
                        let v = cpn_torus_generator(model, j, k)?;
                        let mut worst: f64 = 0.0;
                        for p in &points {
                            let idiv = I * divergence(model, &v, p)?;
                            worst = worst.max((idiv - C64::new(projective_moment(model, p, j, k)?, 0.0)).norm());
                        }
                        let row = FormulaRow {
                            generator: v.label().to_string(),
                            max_residual: worst,
                            tolerance: FORMULA_TOLERANCE,
                            passed: worst < FORMULA_TOLERANCE,
                        };
                        ft.push(vec![row.generator.clone(), fmt(worst), fmt(FORMULA_TOLERANCE), row.passed.to_string()]);
                        formula.push(row);
                    }
                }
            }
            let mut tables = vec![t];
            if !formula.is_empty() {
                tables.push(ft);
            }
            Ok((TaskResult::MomentCheck { einstein, fields, formula }, tables))
        }
        Task::OptimizeVolume | Task::OptimizeDefect => {
            let start = plan.start.as_ref().expect("validated");
            let run = if plan.task == Task::OptimizeVolume { minimize_volume } else { minimize_defect };
            let trace = match run(model, start, &plan.descent) {
                Ok(t) => t,
                Err(Error::FloorReached { trace }) | Err(Error::Stalled { trace }) => *trace,
                Err(e) => return Err(e),
            };
            let m = start.len();
            let mut header = vec!["iterate".to_string()];
            header.extend((1..=m).map(|i| format!("a{i}")));
            header.extend(["objective", "volume", "gradient_norm", "certificate_max"].map(String::from));
            let mut t = Table { name: "trace".into(), header, rows: Vec::new() };
            for (i, it) in trace.iterates.iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(it.weights.iter().map(|x| fmt(*x)));
                row.extend([it.objective, it.volume, it.gradient_norm, it.certificate_max].map(fmt));
                t.push(row);
            }
            Ok((TaskResult::Descent(trace), vec![t]))
        }
        Task::ExtendDemo => {
            let l = immersion(plan)?;
            let grid = &l.grid;
            let mut components = Vec::with_capacity(l.dim());
            let mut t = Table::new(
                "extension",
                &[
                    "component",
                    "bandwidth",
                    "half_width",
                    "reproduction_error",
                    "cr_residual",
                    "truncation",
                    "truncation_gap",
                    "tail_bound",
                ],
            );
            let probes = sampling::uniform(16 * 2 * grid.dim, -1.0, 1.0, plan.seed);
            for a in 0..model.dim() {
                let data = l.component(a);
                let f = FourierSeries::from_samples(grid, &data, FourierSeries::full_bandwidth(grid))?;
                let tube = auto_tube(&f)?;
                let ext = extend_fourier(&f, tube)?;
                let mut reproduction: f64 = 0.0;
                for (i, z) in data.iter().enumerate() {
                    let w: Vec<C64> = grid.angles(i).iter().map(|x| C64::new(*x, 0.0)).collect();
                    reproduction = reproduction.max((ext.eval(&w)? - z).norm());
                }
                let eta = tube.half_width;
                let pts: Vec<Vec<C64>> = probes
                    .chunks(2 * grid.dim)
                    .map(|u| {
                        (0..grid.dim).map(|k| C64::new(std::f64::consts::PI * u[2 * k], eta * u[2 * k + 1])).collect()
                    })
                    .collect();
                let cr = ext.cr_residual(&pts);
                let k = f.bandwidth() / 2;
                let coarse = f.truncated(k);
                let gap = pts.iter().map(|w| (f.eval(w) - coarse.eval(w)).norm()).fold(0.0, f64::max);
                let row = ExtensionRow {
                    component: a + 1,
                    bandwidth: f.bandwidth(),
                    half_width: eta,
                    reproduction_error: reproduction,
                    cr_residual: cr,
                    truncation: k,
                    truncation_gap: gap,
                    tail_bound: f.tail_bound(k, eta),
                };
                t.push(vec![
                    row.component.to_string(),
                    row.bandwidth.to_string(),
                    fmt(row.half_width),
                    fmt(row.reproduction_error),
                    fmt(row.cr_residual),
                    row.truncation.to_string(),
                    fmt(row.truncation_gap),
                    fmt(row.tail_bound),
                ]);
                components.push(row);
            }
            let lt = complexify_immersion(&l)?;
            let demo = ExtensionDemo {
                components,
                jacobian_condition: lt.max_condition,
                restriction_defect: lt.restriction_defect,
                tolerance: plan.tolerance,
                cr_tolerance: CR_TOLERANCE,
            };
            Ok((TaskResult::Extension(demo), vec![t]))
        }
    }
}

fn judge(plan: &Plan, result: &TaskResult) -> RunVerdict {
    let (passed, summary) = match result {
        TaskResult::Certificate(r) => {
            let what = match &r.verdict {
                holocert_core::certify::Verdict::Vanishes => "all integrals vanish".to_string(),
                holocert_core::certify::Verdict::Obstructed { witness, modulus } => {
                    format!("obstructed by {witness} (|∫div V| = {modulus:e})")
                }
                holocert_core::certify::Verdict::Unresolved { agreement } => {
                    format!("unresolved: N and 2N differ by {agreement:e}")
                }
            };
            (r.verdict.passed(), format!("max |∫div V| = {:e} at N = {}; {what}", r.max_modulus, r.resolution))
        }
        TaskResult::Probe(r) => (
            r.identity_holds,
            format!(
                "defect {:e} ({}); identity gaps {:e} / {:e}",
                r.defect,
                if r.minimal { "minimal" } else { "not minimal" },
                r.gap_real,
                r.gap_imag
            ),
        ),
        TaskResult::Stokes { fields, max_residual } => {
            (fields.iter().all(|r| r.passed), format!("max |dφ − div(V)κ| = {max_residual:e} over {} fields", fields.len()))
        }
        TaskResult::MomentCheck { einstein, fields, formula } => {
            let worst = fields.iter().map(|r| r.max_residual).fold(0.0, f64::max);
            let ok = fields.iter().all(|r| r.passed) && formula.iter().all(|r| r.passed);
            (ok, format!("t = {}, max |dμ − i_V ω| = {worst:e} over {} fields", einstein.t, fields.len()))
        }
        TaskResult::Descent(trace) => {
            let ok = trace.termination == Termination::Converged && trace.certificate.verdict.passed();
            let term = match trace.termination {
                Termination::Converged => "converged",
                Termination::MaxIterations => "iteration limit",
                Termination::FloorReached => "reached the simplex floor",
                Termination::Stalled => "line search stalled",
            };
            (
                ok,
                format!(
                    "{term} after {} iterates at {:?}; final certificate max {:e}",
                    trace.iterates.len(),
                    trace.final_weights(),
                    trace.certificate.max_modulus
                ),
            )
        }
        TaskResult::Extension(d) => {
            let ok = d.components.iter().all(|c| {
                c.reproduction_error < d.tolerance && c.cr_residual < d.cr_tolerance && c.truncation_gap <= c.tail_bound
            });
            let worst = d.components.iter().map(|c| c.reproduction_error).fold(0.0, f64::max);
            (ok, format!("real-angle error {worst:e}, Jacobian condition {:e}", d.jacobian_condition))
        }
        TaskResult::Failed { error } => (false, format!("{} stopped: {error}", plan.task.name())),
    };
    RunVerdict { passed, summary }
}

/// Shortest round-trip form in scientific notation.
fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Writes `report.json`, `timing.json` and the CSV tables into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let report = dir.join("report.json");
    let mut json = serde_json::to_string_pretty(&outcome.report).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    fs::write(&report, json).map_err(io(&report))?;
    written.push(report);

    let timing = dir.join("timing.json");
    let body = serde_json::json!({ "schema": SCHEMA, "wall_seconds": outcome.wall_seconds });
    fs::write(&timing, format!("{body:#}\n")).map_err(io(&timing))?;
    written.push(timing);

    for table in &outcome.tables {
        let path = dir.join(table.file_name());
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e.into(),
        })?;
        let csv_err = |e: csv::Error| CliError::Io { path: path.display().to_string(), source: e.into() };
        w.write_record(&table.header).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}
