//! The `list` catalog.

use std::fmt::Write;

use crate::config::Task;
use crate::SCHEMA;

pub const MODELS: &[(&str, &str)] = &[
    ("flat-Cn", "flat C^n, K = |z|^2, t = 0"),
    ("CPn-t1", "CP^n with K = (n+1) log(1+|w|^2) per chart, Ric = omega (t = 1)"),
    ("CPn-unit", "CP^n with K = log(1+|w|^2) per chart (t = n+1)"),
];

/// `(name, parameters, where it lives)`.
pub const FAMILIES: &[(&str, &str, &str)] = &[
    ("orbit-torus", "weights: n+1 positive reals summing to 1", "CPn"),
    ("clifford-torus", "-", "CPn"),
    ("equator", "-", "CP1"),
    ("pair-balanced-torus", "level: |z1|^2 = |z2|^2 = level < 1/2, rest split evenly", "CPn"),
    ("product-circles", "radii: n positive reals", "flat-Cn"),
    ("perturbed-clifford", "epsilon: displacement along J grad Re(w1)", "CPn"),
    ("graph-torus", "delta: w_n += delta e^{i theta_1} (totally real, not Lagrangian)", "CPn, n >= 2"),
    ("complex-tangent-torus", "- (complex tangent plane at theta = 0)", "flat-C2"),
];

pub const BASES: &[(&str, &str)] = &[
    ("sl", "real basis E_jk, iE_jk, H_j, iH_j of sl(n+1, C); 2((n+1)^2 - 1) fields on CPn"),
    ("torus", "torus generators T_jk, j < k; i div T_jk = (|z_j|^2 - |z_k|^2) / sum |z_i|^2"),
    ("flat-affine", "constant and linear fields on flat-Cn"),
    ("none", "only the fields listed under `fields`"),
];

fn task_parameters(task: Task) -> &'static str {
    match task {
        Task::Certify => "submanifold; basis and/or fields; tolerances.certificate",
        Task::Probe => "submanifold; tolerances.identity",
        Task::Stokes => "submanifold (minimal Lagrangian); basis and/or fields; tolerances.stokes",
        Task::MomentCheck => {
            "sampling.points, sampling.seed; basis (default torus); tolerances.moment; \
             also checks the torus-generator moment formula"
        }
        Task::OptimizeVolume | Task::OptimizeDefect => {
            "optimize.start, optimize.resolution, optimize.max_iterations; tolerances.gradient"
        }
        Task::ExtendDemo => "submanifold; sampling.seed; tolerances.extension",
    }
}

/// Models, families, field bases and tasks with their parameters.
pub fn list_builtins() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "holocert catalog, schema {SCHEMA}");
    let _ = writeln!(s, "\nmodels (model.name, model.dim = n)");
    for (name, about) in MODELS {
        let _ = writeln!(s, "  {name:<22} {about}");
    }
    let _ = writeln!(s, "\nfamilies (submanifold.family; submanifold.resolution is a power of two in 16..=512)");
    for (name, params, home) in FAMILIES {
        let _ = writeln!(s, "  {name:<22} {params} [{home}]");
    }
    let _ = writeln!(s, "\nbases (basis)");
    for (name, about) in BASES {
        let _ = writeln!(s, "  {name:<22} {about}");
    }
    let _ = writeln!(s, "\ntasks (task)");
    for task in Task::ALL {
        let _ = writeln!(s, "  {:<22} {}", task.name(), task_parameters(task));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use holocert_core::kahler::ManifoldModel;
    use holocert_core::submanifold::Family;

    #[test]
    fn family_names_match_the_core() {
        let core = [
            Family::OrbitTorus { weights: vec![] },
            Family::Clifford,
            Family::Equator,
            Family::PairBalanced { level: 0.0 },
            Family::ProductCircles { radii: vec![] },
            Family::PerturbedClifford { epsilon: 0.0 },
            Family::GraphTorus { delta: 0.0 },
            Family::ComplexTangent,
        ];
        let names: Vec<&str> = FAMILIES.iter().map(|f| f.0).collect();
        assert_eq!(names, core.iter().map(|f| f.name()).collect::<Vec<_>>());
        for (name, _) in MODELS {
            assert!(ManifoldModel::builtin(name, 2).is_ok());
        }
    }
}
