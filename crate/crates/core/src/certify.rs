//! Divergence certificates, the pointwise Stokes identity for `i_V κ` and
//! the converse probe built from the dual of the connection form.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::extend::{complexify_immersion, pushforward_field, FourierSeries};
use crate::fields::{divergence_from_jets, projective_moment, FieldBasis, HolomorphicField};
use crate::kahler::ManifoldModel;
use crate::linalg::CMatrix;
use crate::submanifold::{Family, Geometry, Orientation, TorusImmersion};
use crate::{Error, Result, C64};

pub const CERTIFICATE_TOLERANCE: f64 = 1e-6;
/// Largest allowed change of any certificate value between `N` and `2N`.
pub const AGREEMENT_GATE: f64 = 1e-8;
pub const STOKES_TOLERANCE: f64 = 1e-6;
/// Allowed gap between the two columns of the converse identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-5;
pub const DEFECT_TOLERANCE: f64 = 1e-7;

/// `∫_L div(V)` for one field.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CertificateEntry {
    pub label: String,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Same integral at twice the resolution.
    pub re_fine: f64,
    pub im_fine: f64,
}

impl CertificateEntry {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn value_fine(&self) -> C64 {
        C64::new(self.re_fine, self.im_fine)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Verdict {
    Vanishes,
    Obstructed { witness: String, modulus: f64 },
    /// The two resolutions disagree beyond the gate.
    Unresolved { agreement: f64 },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Vanishes)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CertificateReport {
    pub submanifold: String,
    pub basis: String,
    pub resolution: usize,
    pub entries: Vec<CertificateEntry>,
    pub max_modulus: f64,
    pub max_modulus_fine: f64,
    pub agreement: f64,
    pub tolerance: f64,
    pub gate: f64,
    pub verdict: Verdict,
}

/// `∫_L div(V) dvol` for each field at the resolution of `l`.
pub fn divergence_integrals(
    model: &ManifoldModel,
    l: &TorusImmersion,
    geometry: &Geometry,
    fields: &[HolomorphicField],
) -> Result<Vec<C64>> {
    fields
        .iter()
        .map(|f| {
            let samples = divergence_samples(model, l, geometry, f)?;
            l.grid.quadrature(&samples, Some(&geometry.frames.volume_element))
        })
        .collect()
}

fn divergence_samples(
    model: &ManifoldModel,
    l: &TorusImmersion,
    geometry: &Geometry,
    f: &HolomorphicField,
) -> Result<Vec<C64>> {
    (0..l.len())
        .map(|i| {
            let jet = f.jet(model, &l.point(i)).map_err(|e| match e {
                Error::OutsideDomain { chart } | Error::UnknownChart { chart } => {
                    Error::FieldUndefined { label: f.label().to_string(), chart }
                }
                other => other,
            })?;
            Ok(divergence_from_jets(&geometry.jets[i], &jet))
        })
        .collect()
}

/// Evaluates the certificate at `resolution` and twice that, and issues a
/// verdict once the two agree within the gate.
pub fn divergence_certificate(
    model: &ManifoldModel,
    family: &Family,
    resolution: usize,
    orientation: Orientation,
    basis: &FieldBasis,
    tolerance: f64,
) -> Result<CertificateReport> {
    let mut values = Vec::with_capacity(2);
    for n in [resolution, 2 * resolution] {
        let l = TorusImmersion::from_family(model, family, n, orientation)?;
        let geometry = Geometry::new(model, &l)?;
        values.push(divergence_integrals(model, &l, &geometry, &basis.fields)?);
    }
    let entries: Vec<CertificateEntry> = basis
        .fields
        .iter()
        .zip(values[0].iter().zip(&values[1]))
        .map(|(f, (v, w))| CertificateEntry {
            label: f.label().to_string(),
            re: v.re,
            im: v.im,
            modulus: v.norm(),
            re_fine: w.re,
            im_fine: w.im,
        })
        .collect();
    Ok(assemble(family.name().into(), basis.name.clone(), resolution, entries, tolerance))
}

fn assemble(
    submanifold: String,
    basis: String,
    resolution: usize,
    entries: Vec<CertificateEntry>,
    tolerance: f64,
) -> CertificateReport {
    let max_modulus = entries.iter().map(|e| e.modulus).fold(0.0, f64::max);
    let max_modulus_fine = entries.iter().map(|e| e.value_fine().norm()).fold(0.0, f64::max);
    let agreement = entries.iter().map(|e| (e.value() - e.value_fine()).norm()).fold(0.0, f64::max);
    let verdict = if agreement > AGREEMENT_GATE {
        Verdict::Unresolved { agreement }
    } else if max_modulus < tolerance {
        Verdict::Vanishes
    } else {
        // first field attaining the maximum
        let witness = entries.iter().find(|e| e.modulus == max_modulus).expect("non-empty basis");
        Verdict::Obstructed { witness: witness.label.clone(), modulus: max_modulus }
    };
    CertificateReport {
        submanifold,
        basis,
        resolution,
        entries,
        max_modulus,
        max_modulus_fine,
        agreement,
        tolerance,
        gate: AGREEMENT_GATE,
        verdict,
    }
}

/// Pointwise comparison of `dφ` with `div(V) κ|_L` for `φ = i_V κ|_L`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StokesReport {
    pub label: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn det_with_columns(cols: &[&[C64]]) -> C64 {
    let n = cols.len();
    CMatrix::from_fn(n, n, |a, k| cols[k][a]).determinant()
}

/// Needs a minimal Lagrangian `L`, where `∇κ = 0` along `L`.
pub fn stokes_pointwise_check(
    model: &ManifoldModel,
    l: &TorusImmersion,
    geometry: &Geometry,
    v: &HolomorphicField,
) -> Result<StokesReport> {
    if !geometry.is_minimal_lagrangian() {
        return Err(Error::NotMinimalLagrangian {
            defect: geometry.lagrangian_defect,
            mean_curvature: geometry.mean_curvature.max_norm,
        });
    }
    let n = l.dim();
    let c = &geometry.section.c;
    let mut phi = vec![Vec::with_capacity(l.len()); n];
    let mut rhs = Vec::with_capacity(l.len());
    for i in 0..l.len() {
        let jet = v.jet(model, &l.point(i))?;
        let tangents: Vec<&[C64]> = (0..n).map(|k| l.tangent(i, k)).collect();
        for (k, slot) in phi.iter_mut().enumerate() {
            let mut cols: Vec<&[C64]> = Vec::with_capacity(n);
            cols.push(&jet.value);
            cols.extend(tangents.iter().enumerate().filter(|(m, _)| *m != k).map(|(_, t)| *t));
            slot.push(c[i] * det_with_columns(&cols));
        }
        rhs.push(divergence_from_jets(&geometry.jets[i], &jet) * c[i] * det_with_columns(&tangents));
    }
    let mut dphi = vec![C64::new(0.0, 0.0); l.len()];
    for (k, p) in phi.iter().enumerate() {
        let d = l.grid.derivative(p, k, 1)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (acc, x) in dphi.iter_mut().zip(d) {
            *acc += x * sign;
        }
    }
    let max_residual = dphi.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(StokesReport {
        label: v.label().to_string(),
        max_residual,
        tolerance: STOKES_TOLERANCE,
        passed: max_residual < STOKES_TOLERANCE,
    })
}

/// Both sides of `∫ ξ(V) κ = −∫ div(Ṽ) κ` for the duals of `Re ξ` and
/// `Im ξ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConverseProbeReport {
    pub submanifold: String,
    pub resolution: usize,
    /// `∫ |V_r|²`.
    pub norm_real: f64,
    /// `−Re ∫ div(Ṽ_r) κ`.
    pub divergence_real: f64,
    pub gap_real: f64,
    /// `∫ |V_i|²`.
    pub norm_imag: f64,
    /// `−Im ∫ div(Ṽ_i) κ`.
    pub divergence_imag: f64,
    pub gap_imag: f64,
    /// `∫ |V_r|² + ∫ |V_i|²`.
    pub defect: f64,
    pub tube_half_width: f64,
    pub jacobian_condition: f64,
    pub identity_tolerance: f64,
    pub defect_tolerance: f64,
    pub identity_holds: bool,
    pub minimal: bool,
}

pub fn converse_probe(model: &ManifoldModel, l: &TorusImmersion) -> Result<ConverseProbeReport> {
    let geometry = Geometry::new(model, l)?;
    let lt = complexify_immersion(l)?;
    let n = l.dim();
    let section = &geometry.section;
    // dual coefficients a = G⁻¹ (Re ξ) and G⁻¹ (Im ξ)
    let mut coeffs = [vec![Vec::with_capacity(l.len()); n], vec![Vec::with_capacity(l.len()); n]];
    let mut norms = [Vec::with_capacity(l.len()), Vec::with_capacity(l.len())];
    for i in 0..l.len() {
        let ginv = geometry.frames.induced[i].clone().try_inverse().ok_or(Error::FrameDegenerate { index: i })?;
        for (part, take) in [|z: C64| z.re, |z: C64| z.im].iter().enumerate() {
            let rhs: Vec<f64> = section.xi[i].iter().map(|z| take(*z)).collect();
            let a: Vec<f64> = (0..n).map(|k| (0..n).map(|m| ginv[(k, m)] * rhs[m]).sum()).collect();
            let v: Vec<C64> = (0..n).map(|c| (0..n).map(|k| l.tangent(i, k)[c] * a[k]).sum()).collect();
            norms[part].push(C64::new(geometry.jets[i].riemannian(&v, &v), 0.0));
            for k in 0..n {
                coeffs[part][k].push(C64::new(a[k], 0.0));
            }
        }
    }
    let kappa: Vec<C64> = (0..l.len())
        .map(|i| {
            let tangents: Vec<&[C64]> = (0..n).map(|k| l.tangent(i, k)).collect();
            section.c[i] * det_with_columns(&tangents)
        })
        .collect();
    let bandwidth = FourierSeries::full_bandwidth(&l.grid);
    let mut columns = [(0.0, 0.0); 2];
    for part in 0..2 {
        let series = coeffs[part]
            .iter()
            .map(|s| FourierSeries::from_samples(&l.grid, s, bandwidth))
            .collect::<Result<Vec<_>>>()?;
        let field = pushforward_field(l, &lt, &series)?;
        let div = field.divergence(&geometry.jets);
        let weighted: Vec<C64> = div.iter().zip(&kappa).map(|(d, k)| d * k).collect();
        let integral = l.grid.quadrature(&weighted, None)?;
        let norm = l.grid.quadrature(&norms[part], Some(&geometry.frames.volume_element))?.re;
        let side = if part == 0 { -integral.re } else { -integral.im };
        columns[part] = (norm, side);
    }
    let (norm_real, divergence_real) = columns[0];
    let (norm_imag, divergence_imag) = columns[1];
    let gap_real = (norm_real - divergence_real).abs();
    let gap_imag = (norm_imag - divergence_imag).abs();
    let defect = norm_real + norm_imag;
    Ok(ConverseProbeReport {
        submanifold: l.label.clone(),
        resolution: l.grid.n,
        norm_real,
        divergence_real,
        gap_real,
        norm_imag,
        divergence_imag,
        gap_imag,
        defect,
        tube_half_width: lt.tube.half_width,
        jacobian_condition: lt.max_condition,
        identity_tolerance: IDENTITY_TOLERANCE,
        defect_tolerance: DEFECT_TOLERANCE,
        identity_holds: gap_real < IDENTITY_TOLERANCE && gap_imag < IDENTITY_TOLERANCE,
        minimal: defect < DEFECT_TOLERANCE,
    })
}

/// `∫_L (|z_j|² − |z_k|²)/Σ|z_i|² dvol`, indices 1-based.
pub fn moment_integral(
    model: &ManifoldModel,
    l: &TorusImmersion,
    geometry: &Geometry,
    j: usize,
    k: usize,
) -> Result<f64> {
    let n = model.dim();
    if j == 0 || k == 0 || j > n + 1 || k > n + 1 {
        return Err(Error::GeneratorIndex { j, k, n });
    }
    let samples = (0..l.len())
        .map(|i| Ok(C64::new(projective_moment(model, &l.point(i), j, k)?, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(l.grid.quadrature(&samples, Some(&geometry.frames.volume_element))?.re)
}

/// Label of a certificate entry for a combination, used in reports.
pub fn combination_label(terms: &[(f64, &str)]) -> String {
    terms.iter().map(|(c, l)| format!("{c}*{l}")).collect::<Vec<_>>().join("+")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::cpn_torus_generator;
    use crate::submanifold::volume;

    #[test]
    fn equator_certificate_vanishes() {
        let m = ManifoldModel::projective_t1(1);
        let basis = FieldBasis::sl_real(&m).unwrap();
        let r = divergence_certificate(&m, &Family::Equator, 32, Orientation::Standard, &basis, CERTIFICATE_TOLERANCE)
            .unwrap();
        assert_eq!(r.entries.len(), 6);
        assert!(r.max_modulus < 1e-8, "{}", r.max_modulus);
        assert_eq!(r.verdict, Verdict::Vanishes);
    }

    #[test]
    fn weighted_orbit_torus_is_obstructed() {
        let m = ManifoldModel::projective_t1(2);
        let family = Family::OrbitTorus { weights: vec![0.5, 0.25, 0.25] };
        let basis = FieldBasis { name: "t12".into(), fields: vec![cpn_torus_generator(&m, 1, 2).unwrap()] };
        let r = divergence_certificate(&m, &family, 16, Orientation::Standard, &basis, CERTIFICATE_TOLERANCE).unwrap();
        let l = TorusImmersion::from_family(&m, &family, 16, Orientation::Standard).unwrap();
        let vol = volume(&m, &l).unwrap();
        // i ∫ div V = (a1 − a2) Vol
        let v = r.entries[0].value() * crate::I;
        assert!((v.re - 0.25 * vol).abs() < 1e-10 * vol, "{v} {vol}");
        assert!(matches!(r.verdict, Verdict::Obstructed { ref witness, .. } if witness == "T12"));
    }

    #[test]
    fn certificate_is_linear_in_the_field() {
        let m = ManifoldModel::projective_t1(2);
        let l = TorusImmersion::from_family(&m, &Family::OrbitTorus { weights: vec![0.4, 0.35, 0.25] }, 16, Orientation::Standard)
            .unwrap();
        let g = Geometry::new(&m, &l).unwrap();
        let basis = FieldBasis::sl_real(&m).unwrap();
        let (a, b) = (basis.fields[0].clone(), basis.fields[5].clone());
        let combo =
            HolomorphicField::combination("combo", vec![(C64::new(0.3, 0.0), a.clone()), (C64::new(-1.7, 0.0), b.clone())])
                .unwrap();
        let v = divergence_integrals(&m, &l, &g, &[a, b, combo]).unwrap();
        assert!((v[0] * 0.3 - v[1] * 1.7 - v[2]).norm() < 1e-12);
    }

    #[test]
    fn stokes_identity_on_equator_and_zero_field() {
        let m = ManifoldModel::projective_t1(1);
        let l = TorusImmersion::from_family(&m, &Family::Equator, 32, Orientation::Standard).unwrap();
        let g = Geometry::new(&m, &l).unwrap();
        let v = cpn_torus_generator(&m, 1, 2).unwrap();
        assert!(stokes_pointwise_check(&m, &l, &g, &v).unwrap().max_residual < 1e-7);
        let zero = HolomorphicField::projective("zero", CMatrix::zeros(2, 2));
        assert_eq!(stokes_pointwise_check(&m, &l, &g, &zero).unwrap().max_residual, 0.0);
    }

    #[test]
    fn stokes_rejects_non_minimal_tori() {
        let m = ManifoldModel::projective_t1(2);
        let l = TorusImmersion::from_family(&m, &Family::OrbitTorus { weights: vec![0.5, 0.25, 0.25] }, 16, Orientation::Standard)
            .unwrap();
        let g = Geometry::new(&m, &l).unwrap();
        let v = cpn_torus_generator(&m, 1, 2).unwrap();
        assert!(matches!(stokes_pointwise_check(&m, &l, &g, &v), Err(Error::NotMinimalLagrangian { .. })));
    }

    #[test]
    fn converse_probe_on_clifford_and_perturbation() {
        let m = ManifoldModel::projective_t1(2);
        let l = TorusImmersion::from_family(&m, &Family::Clifford, 32, Orientation::Standard).unwrap();
        let r = converse_probe(&m, &l).unwrap();
        assert!(r.defect < 1e-7 && r.minimal, "{r:?}");
        let l = TorusImmersion::from_family(&m, &Family::PerturbedClifford { epsilon: 0.05 }, 32, Orientation::Standard)
            .unwrap();
        let r = converse_probe(&m, &l).unwrap();
        assert!(r.defect > 1e-6, "{r:?}");
        assert!(r.identity_holds, "{r:?}");
    }

    #[test]
    fn clifford_moment_integral_vanishes() {
        let m = ManifoldModel::projective_t1(2);
        let l = TorusImmersion::from_family(&m, &Family::Clifford, 16, Orientation::Standard).unwrap();
        let g = Geometry::new(&m, &l).unwrap();
        assert!(moment_integral(&m, &l, &g, 1, 2).unwrap().abs() < 1e-12);
    }
}
