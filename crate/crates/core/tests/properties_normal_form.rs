use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngSeed};

use pfdde::normal_form::{classify_resonance, fold_coefficient, hopf_coefficients, H11Source, HopfOptions, ResonanceClass};
use pfdde::series::FourierSeries;
use pfdde::wright::{
    fold_b_closed, fold_model, gcd, l1_forced_default, l1_forced_plain, l1_general, wright_model, wright_model_with,
    Variant, WrightBranch,
};
use pfdde::Error;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0xf01d),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real scalar series with modes up to two.
fn beta(freq: f64) -> impl Strategy<Value = FourierSeries> {
    (-2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(move |(m0, a, b, cc, d)| {
        let (m1, m2) = (c(a, b), c(cc, d));
        FourierSeries::scalar(freq, [(0, c(m0, 0.0)), (1, m1), (-1, m1.conj()), (2, m2), (-2, m2.conj())]).unwrap()
    })
}

fn beta1() -> impl Strategy<Value = f64> {
    prop_oneof![-0.9..-0.1f64, 0.1..3.0f64]
}

/// Hopf data, skipping grid points that land on a resonance.
fn hopf(model: &pfdde::model::Model, omega: f64, src: H11Source) -> Option<pfdde::normal_form::HopfReport> {
    match hopf_coefficients(model, omega, HopfOptions::with_source(src)) {
        Ok(r) => Some(r),
        Err(Error::ResonantMode { .. }) => None,
        Err(e) => panic!("unexpected error {e}"),
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn fold_coefficient_matches_mean_formula(b1 in beta1(), b2 in beta(0.8)) {
        let r = fold_coefficient(&fold_model(b1, &b2).unwrap()).unwrap();
        prop_assert!((r.b - fold_b_closed(b1, &b2)).abs() < 1e-10);
        prop_assert!(r.im_leakage < 1e-10);
        prop_assert!(r.fsc_residual < 1e-10);
    }

    #[test]
    fn doubling_b_stencil_doubles_fold_coefficient(b1 in beta1(), b2 in beta(0.8)) {
        let m = fold_model(b1, &b2).unwrap();
        let doubled = m.with_bilinear(m.bilinear().map(|b| b.scale(2.0))).unwrap();
        let one = fold_coefficient(&m).unwrap();
        let two = fold_coefficient(&doubled).unwrap();
        prop_assert_eq!(two.b, 2.0 * one.b);
        let again = fold_coefficient(&m).unwrap();
        prop_assert_eq!(again, one);
    }

    #[test]
    fn hopf_is_conjugation_equivariant(n in 0u32..3, o1 in 0.1..2.0f64, o2 in 0.05..3.0f64, plain in any::<bool>()) {
        let src = if plain { H11Source::Plain } else { H11Source::Conjugate };
        let b = WrightBranch::new(n);
        let m = wright_model(n, o1, o2).unwrap();
        let (Some(up), Some(down)) = (hopf(&m, b.omega, src), hopf(&m, -b.omega, src)) else {
            return Ok(());
        };
        prop_assert!((up.c - down.c.conj()).norm() <= 1e-12 * (1.0 + up.c.norm()));
        prop_assert!((up.l1 - down.l1).abs() <= 1e-12 * (1.0 + up.l1.abs()));
        prop_assert!(up.fsc_residual < 1e-10 && down.fsc_residual < 1e-10);
    }

    #[test]
    fn wright_pipeline_matches_mode_sum(n in 0u32..3, o1 in 0.1..2.0f64, o2 in 0.05..3.0f64) {
        let b = WrightBranch::new(n);
        let m = wright_model(n, o1, o2).unwrap();
        let (Some(plain), Some(default)) = (hopf(&m, b.omega, H11Source::Plain), hopf(&m, b.omega, H11Source::Conjugate)) else {
            return Ok(());
        };
        let cp = l1_forced_plain(n, o1, o2).unwrap();
        let cd = l1_forced_default(n, o1, o2).unwrap();
        prop_assert!((plain.l1 - cp).abs() <= 1e-10 * (1.0 + cp.abs()), "plain {} vs {}", plain.l1, cp);
        prop_assert!((default.l1 - cd).abs() <= 1e-10 * (1.0 + cd.abs()), "default {} vs {}", default.l1, cd);
    }

    #[test]
    fn general_beta_pipeline_matches_mode_sum(n in 0u32..2, bt in beta(0.37)) {
        let b = WrightBranch::new(n);
        let m = wright_model_with(b.a, &bt).unwrap();
        for (src, variant) in [(H11Source::Plain, Variant::Plain), (H11Source::Conjugate, Variant::Default)] {
            let Some(r) = hopf(&m, b.omega, src) else { return Ok(()) };
            let closed = l1_general(n, &bt, variant).unwrap();
            prop_assert!((r.l1 - closed).abs() <= 1e-10 * (1.0 + closed.abs()));
        }
    }

    #[test]
    fn strong_resonance_classification(r in 1i64..8, s in 1i64..12, omega in 0.2..4.0f64) {
        let class = classify_resonance(omega, omega * r as f64 / s as f64, 100);
        match class {
            ResonanceClass::Resonant { r: rr, s: ss, .. } => {
                prop_assert_eq!(gcd(rr as u32, ss as u32), 1);
                prop_assert_eq!(rr * s, r * ss);
                prop_assert_eq!(class.is_strong(), rr <= 3);
            }
            ResonanceClass::Nonresonant { .. } => prop_assert!(false, "{r}/{s} classified nonresonant"),
        }
    }
}
