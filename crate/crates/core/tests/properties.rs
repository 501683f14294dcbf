use std::f64::consts::PI;

use proptest::prelude::*;

use holocert_core::extend::FourierSeries;
use holocert_core::fields::{cpn_torus_generator, divergence, FieldBasis, HolomorphicField};
use holocert_core::kahler::{ChartPoint, ManifoldModel};
use holocert_core::optimize::{orbit_defect, orbit_volume, OrbitWeights};
use holocert_core::spectral::TorusGrid;
use holocert_core::C64;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..1.0, n + 1).prop_map(|x| {
        let s: f64 = x.iter().sum();
        let mut a: Vec<f64> = x.iter().map(|v| v / s).collect();
        let drift = 1.0 - a.iter().sum::<f64>();
        a[0] += drift;
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // (2(n+1))^{n/2} (2π)^n √(Π a_i): the torus {|z_i|² = a_i} in S^{2n+1}
    // has volume (2π)^{n+1} √Π a_i, the Hopf circle has length 2π, and CPn-t1
    // with g = 2 Re h scales lengths by √(2(n+1)).
    #[test]
    fn orbit_volume_closed_form(a in simplex(2)) {
        let m = ManifoldModel::projective_t1(2);
        let w = OrbitWeights::new(a.clone()).unwrap();
        let expect = 6.0 * (2.0 * PI).powi(2) * a.iter().product::<f64>().sqrt();
        let vol = orbit_volume(&m, &w, 8).unwrap();
        prop_assert!((vol - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn defect_is_permutation_invariant(a in simplex(2)) {
        let m = ManifoldModel::projective_t1(2);
        let b = vec![a[2], a[0], a[1]];
        let fa = orbit_defect(&m, &OrbitWeights::new(a).unwrap(), 8).unwrap();
        let fb = orbit_defect(&m, &OrbitWeights::new(b).unwrap(), 8).unwrap();
        prop_assert!((fa - fb).abs() < 1e-9 * fa.max(1.0));
    }

    #[test]
    fn divergence_is_real_linear(c in -2.0f64..2.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let m = ManifoldModel::projective_t1(2);
        let basis = FieldBasis::sl_real(&m).unwrap();
        let (u, v) = (basis.fields[2].clone(), basis.fields[13].clone());
        let combo = HolomorphicField::combination("w", vec![(C64::new(c, 0.0), u.clone()), (C64::new(1.0, 0.0), v.clone())]).unwrap();
        let p = ChartPoint::new(0, vec![C64::new(re, im), C64::new(im, -re)]);
        let lhs = divergence(&m, &combo, &p).unwrap();
        let rhs = divergence(&m, &u, &p).unwrap() * c + divergence(&m, &v, &p).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn series_matches_grid_values(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, k in 1i64..5) {
        let f = FourierSeries::from_coefficients(2, &[
            (vec![k, 0], C64::new(c1, 0.0)),
            (vec![-1, k], C64::new(0.0, c2)),
        ]).unwrap();
        let grid = TorusGrid::new(2, 16).unwrap();
        let values = f.to_grid(&grid).unwrap();
        for i in (0..grid.len()).step_by(11) {
            let w: Vec<C64> = grid.angles(i).iter().map(|t| C64::new(*t, 0.0)).collect();
            prop_assert!((f.eval(&w) - values[i]).norm() < 1e-13);
        }
    }
}

#[test]
fn torus_generator_signs_follow_the_index_order() {
    let m = ManifoldModel::projective_t1(2);
    let p = ChartPoint::new(0, vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.4)]);
    let a = divergence(&m, &cpn_torus_generator(&m, 2, 3).unwrap(), &p).unwrap();
    let b = divergence(&m, &cpn_torus_generator(&m, 3, 2).unwrap(), &p).unwrap();
    assert!((a + b).norm() < 1e-14);
}
