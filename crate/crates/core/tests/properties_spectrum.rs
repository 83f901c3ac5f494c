use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngSeed};

use pfdde::charmatrix::{
    char_det, char_det_prime, char_scale, delta, delta_prime, eigen_triple, find_roots, refine_root, root_sensitivity,
    Rect,
};
use pfdde::model::{Forcing, LinearPart, Model};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0xc4a2),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix_model(entries: &[f64]) -> Model {
    let lin = LinearPart::new(
        2,
        vec![
            (0.0, DMatrix::from_row_slice(2, 2, &entries[0..4])),
            (0.5, DMatrix::from_row_slice(2, 2, &entries[4..8])),
            (1.0, DMatrix::from_row_slice(2, 2, &entries[8..12])),
        ],
    )
    .unwrap();
    Model::new(2, Forcing::Autonomous, lin, None, None, None).unwrap()
}

/// `ẋ = a x(t) + b x(t - 1)`.
fn scalar_model(a: f64, b: f64) -> Model {
    let lin = LinearPart::new(
        1,
        vec![(0.0, DMatrix::from_element(1, 1, a)), (1.0, DMatrix::from_element(1, 1, b))],
    )
    .unwrap();
    Model::new(1, Forcing::Autonomous, lin, None, None, None).unwrap()
}

fn boundary(rect: &Rect, n: usize) -> Vec<Complex64> {
    let per = n / 4;
    let corners = [
        c(rect.re_min, rect.im_min),
        c(rect.re_max, rect.im_min),
        c(rect.re_max, rect.im_max),
        c(rect.re_min, rect.im_max),
    ];
    (0..4)
        .flat_map(|k| {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            (0..per).map(move |j| a + (b - a) * (j as f64 / per as f64))
        })
        .collect()
}

fn brute_winding(model: &Model, pts: &[Complex64]) -> i64 {
    let vals: Vec<Complex64> = pts.iter().map(|&z| char_det(model, z)).collect();
    let total: f64 = (0..vals.len()).map(|i| (vals[(i + 1) % vals.len()] / vals[i]).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn determinant_commutes_with_conjugation(e in proptest::collection::vec(-2.0..2.0f64, 12), re in -3.0..3.0f64, im in -20.0..20.0f64) {
        let m = matrix_model(&e);
        let z = c(re, im);
        let d = char_det(&m, z);
        prop_assert!((char_det(&m, z.conj()) - d.conj()).norm() <= 1e-13 * (1.0 + d.norm()));
    }

    #[test]
    fn delta_prime_matches_central_difference(e in proptest::collection::vec(-2.0..2.0f64, 12), re in -2.0..2.0f64, im in -10.0..10.0f64) {
        let m = matrix_model(&e);
        let z = c(re, im);
        let h = 1e-5;
        let fd = (delta(&m, z + h) - delta(&m, z - h)) / c(2.0 * h, 0.0);
        let exact = delta_prime(&m, z);
        prop_assert!((fd - &exact).norm() <= 1e-7 * (1.0 + exact.norm()));
        let dfd = (char_det(&m, z + h) - char_det(&m, z - h)) / (2.0 * h);
        let dexact = char_det_prime(&m, z);
        prop_assert!((dfd - dexact).norm() <= 1e-6 * (1.0 + dexact.norm()));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn root_count_matches_boundary_winding(
        a in -1.5..1.0f64,
        b in -2.5..2.5f64,
        re0 in -2.5..-0.5f64,
        re1 in 0.1..1.5f64,
        im1 in 2.0..15.0f64,
    ) {
        let m = scalar_model(a, b);
        let rect = Rect::new(re0, re1, -im1, im1);
        let pts = boundary(&rect, 10_000);
        let floor = pts.iter().map(|&z| char_det(&m, z).norm() / char_scale(&m, z)).fold(f64::INFINITY, f64::min);
        prop_assume!(floor > 1e-3);
        let roots = find_roots(&m, rect, 1e-12).unwrap();
        prop_assert_eq!(roots.total_multiplicity() as i64, brute_winding(&m, &pts));
        prop_assert_eq!(roots.total_multiplicity() as i64, roots.winding);
        for r in &roots.roots {
            prop_assert!(roots.roots.iter().any(|s| s.value == r.value.conj()));
            let t = eigen_triple(&m, r.value).unwrap();
            prop_assert!((t.normalization(&m) - 1.0).norm() < 1e-12);
            prop_assert!(t.right_residual < 1e-10 && t.left_residual < 1e-10);
        }
    }

    #[test]
    fn root_sensitivity_predicts_rerooting(
        e in proptest::collection::vec(-1.0..1.0f64, 12),
        i in 0..12usize,
    ) {
        let m = matrix_model(&e);
        let rect = Rect::new(-3.0, 2.0, -12.0, 12.0);
        let roots = find_roots(&m, rect, 1e-12).unwrap();
        let Some(root) = roots.roots.iter().find(|r| r.multiplicity == 1) else {
            return Ok(());
        };
        let t = eigen_triple(&m, root.value).unwrap();
        let tau = [0.0, 0.5, 1.0][i / 4];
        let mut unit = DMatrix::zeros(2, 2);
        unit[((i % 4) / 2, i % 2)] = -(-root.value * tau).exp();
        let dl = root_sensitivity(&t, &unit);
        let eps = 1e-5;
        let mut shifted = e.clone();
        shifted[i] += eps;
        let moved = refine_root(&matrix_model(&shifted), root.value + dl * eps, None).unwrap();
        let predicted = root.value + dl * eps;
        prop_assert!((moved - predicted).norm() <= 50.0 * eps * eps * (1.0 + dl.norm()).powi(2));
    }
}
