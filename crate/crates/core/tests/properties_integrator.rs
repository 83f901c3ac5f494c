use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngSeed};

use pfdde::integrator::{
    amplitude_sweep, estimate_re_c, fit_through_origin, integrate_dde, integrate_normal_form, strobe, validate_step,
    AmplitudeMetric, DdeSystem, History, ModelSystem, NormalForm, SimConfig, StrobeConfig, Verdict,
};
use pfdde::wright::{autonomous_wright, WrightBranch};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x4b4),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// `ẋ = -x(t - τ)` (`τ = 0` gives the ODE).
struct Decay {
    delays: Vec<f64>,
}

impl DdeSystem for Decay {
    fn dim(&self) -> usize {
        1
    }

    fn delays(&self) -> &[f64] {
        &self.delays
    }

    fn rhs(&self, _t: f64, x: &[f64], lagged: &[Vec<f64>], out: &mut [f64]) {
        out[0] = -lagged.first().map_or(x[0], |l| l[0]);
    }
}

fn global_error(delays: Vec<f64>, dt: f64, exact: fn(f64) -> f64) -> f64 {
    let tr = integrate_dde(&Decay { delays }, &History::Constant(vec![1.0]), 2.0, dt).unwrap();
    (0..tr.len()).map(|k| (tr.sample(k)[0] - exact(tr.time(k))).abs()).fold(0.0, f64::max)
}

#[test]
fn rk4_global_error_is_fourth_order() {
    let ode = |t: f64| (-t).exp();
    let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&dt| global_error(vec![], dt, ode)).collect();
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 16.0).abs() < 0.2 * 16.0, "ratio {ratio}");
    }
}

#[test]
fn rk4_on_delay_equation_matches_method_of_steps() {
    // On [0, 2] with unit history the solution is piecewise polynomial.
    let steps = |t: f64| if t <= 1.0 { 1.0 - t } else { 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0) };
    let e = global_error(vec![1.0], 0.05, steps);
    assert!(e < 1e-13, "error {e}");
}

#[test]
fn dense_output_reproduces_grid_samples() {
    let m = autonomous_wright(-1.2);
    let tr = integrate_dde(&ModelSystem::new(&m), &History::Constant(vec![0.3]), 20.0, 0.02).unwrap();
    for k in (0..tr.len()).step_by(7) {
        assert_eq!(tr.eval_component(tr.time(k), 0), tr.sample(k)[0]);
    }
}

#[test]
fn invalid_steps_are_rejected() {
    assert!(validate_step(&[1.0], 0.0).is_err());
    assert!(validate_step(&[1.0], 0.3).is_err());
    assert!(validate_step(&[1.0], 0.5).is_err());
    assert!(validate_step(&[1.0, 0.35], 0.05).is_ok());
    assert!(validate_step(&[1.0, 0.35], 0.1).is_err());
}

#[test]
fn critical_point_amplitude_is_stationary() {
    let b = WrightBranch::new(0);
    let m = autonomous_wright(b.a);
    let w = b.omega;
    let hist = History::Function(Box::new(move |t: f64| vec![1e-3 * (w * t).cos()]));
    let period = 2.0 * PI / w;
    let tr = integrate_dde(&ModelSystem::new(&m), &hist, 100.0 * period, 0.01).unwrap();
    let a0 = tr.sup_norm(60.0 * period, 61.0 * period);
    let a1 = tr.sup_norm(80.0 * period, 81.0 * period);
    assert!(((a1 - a0) / a0).abs() < 1e-3, "{a0} -> {a1}");
}

#[test]
fn sweep_order_matches_sequential_runs() {
    let params = [-0.01, -0.02, -0.03, 0.01];
    let mut cfg = StrobeConfig::new(4.0);
    cfg.transient = 100.0;
    let sim = SimConfig {
        dt: 0.01,
        t_end: 400.0,
        strobe: cfg,
        metric: AmplitudeMetric::SupNorm,
    };
    let a = WrightBranch::new(0).a;
    let models: Vec<_> = params.iter().map(|d| autonomous_wright(a + d)).collect();
    let models: &'static [_] = Box::leak(models.into_boxed_slice());
    let sweep = amplitude_sweep(
        |p| ModelSystem::new(&models[params.iter().position(|q| *q == p).unwrap()]),
        |_| History::Constant(vec![0.05]),
        &params,
        &sim,
    )
    .unwrap();
    for (pt, m) in sweep.iter().zip(models) {
        let tr = integrate_dde(&ModelSystem::new(m), &History::Constant(vec![0.05]), 400.0, 0.01).unwrap();
        let s = strobe(&tr, &cfg).unwrap();
        assert_eq!(pt.verdict, s.verdict);
    }
    assert_eq!(sweep.iter().map(|p| p.param).collect::<Vec<_>>(), params);
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn decayed_set_shrinks_as_threshold_tightens(
        beta in -0.05..0.05f64,
        re_c in -2.0..-0.3f64,
        r0 in 0.0..0.3f64,
        eps in prop::collection::vec(1e-9..1e-2f64, 2),
    ) {
        let kind = NormalForm::Hopf { beta, omega: 1.0, c: Complex64::new(re_c, 0.4) };
        let tr = integrate_normal_form(kind, |_| 0.0, &[r0, 0.0], 300.0, 0.05).unwrap();
        let (loose, tight) = (eps[0].max(eps[1]), eps[0].min(eps[1]));
        let mut cfg = StrobeConfig::new(2.0 * PI);
        cfg.transient = 200.0;
        cfg.eps_dec = tight;
        let t = strobe(&tr, &cfg).unwrap();
        cfg.eps_dec = loose;
        let l = strobe(&tr, &cfg).unwrap();
        if t.verdict == Verdict::Decayed {
            prop_assert_eq!(l.verdict, Verdict::Decayed);
        }
        if matches!(l.verdict, Verdict::Converged { .. }) {
            let still = matches!(t.verdict, Verdict::Converged { .. });
            prop_assert!(still);
        }
    }

    #[test]
    fn estimator_inverts_exact_amplitude_law(
        re_c in -3.0..-0.1f64,
        dl_re in -1.0..-0.05f64,
        dl_im in -1.0..1.0f64,
    ) {
        let deltas = [0.01, 0.02, 0.03];
        let ys: Vec<f64> = deltas.iter().map(|d| -4.0 * dl_re * d / re_c).collect();
        let (slope, r2) = fit_through_origin(&deltas, &ys).unwrap();
        prop_assert!(r2 > 1.0 - 1e-12);
        let est = estimate_re_c(slope, Complex64::new(dl_re, dl_im)).unwrap();
        prop_assert!((est - re_c).abs() < 1e-12 * re_c.abs());
    }
}
