use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use pfdde::charmatrix::{find_roots, Rect, ROOT_SIGMA_RTOL, SIMPLE_PAIRING_TOL, SIMPLE_SIGMA_RTOL};
use pfdde::integrator::{integrate_dde, strobe, validate_step, DdeSystem, History, ModelSystem, StrobeConfig};
use pfdde::model::{parse_model, serialize_model, Forcing, Model};
use pfdde::normal_form::{
    classify_resonance, fold_coefficient, hopf_coefficients, H11Source, HopfOptions, ResonanceClass, Strength,
    MAX_DENOMINATOR,
};
use pfdde::series::FourierSeries;
use pfdde::wright::{
    autonomous_wright, bifdiag_rows, fold_model, l1_forced_default, l1_forced_paper, l1_forced_plain, wright_model,
    WrightBranch,
};

use crate::error::CliError;
use crate::output::Sink;
use crate::{BifdiagArgs, FoldArgs, HopfArgs, L1SweepArgs, ModelCommand, SimulateArgs, SpectrumArgs, VariantArg};

fn load_model(path: &Path, sink: &mut Sink) -> Result<Model, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    sink.manifest.model_source = Some(path.display().to_string());
    Ok(parse_model(&text)?)
}

fn source(v: VariantArg) -> H11Source {
    match v {
        VariantArg::Default => H11Source::Conjugate,
        VariantArg::Paper => H11Source::Plain,
    }
}

fn parse_rect(s: &str) -> Result<Rect, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--rect {s:?}: {e}")))?;
    match v[..] {
        [a, b, c, d] if a <= b && c <= d && v.iter().all(|x| x.is_finite()) => Ok(Rect::new(a, b, c, d)),
        _ => Err(CliError::Usage(format!(
            "--rect {s:?}: expected re_min,re_max,im_min,im_max with min <= max"
        ))),
    }
}

/// `a:b:count` as `count` evenly spaced points strictly inside `(a, b)`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("--grid {s:?}: {why}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad("expected a:b:count"));
    };
    let a: f64 = a.trim().parse().map_err(|_| bad("bad lower bound"))?;
    let b: f64 = b.trim().parse().map_err(|_| bad("bad upper bound"))?;
    let n: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
    if !(a.is_finite() && b.is_finite() && a < b) || n == 0 {
        return Err(bad("need a < b and count > 0"));
    }
    Ok((1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.15e}"))
}

fn tolerances() -> serde_json::Value {
    json!({
        "root_sigma_rtol": ROOT_SIGMA_RTOL,
        "simple_sigma_rtol": SIMPLE_SIGMA_RTOL,
        "simple_pairing_tol": SIMPLE_PAIRING_TOL,
    })
}

pub fn spectrum(a: &SpectrumArgs, sink: &mut Sink) -> Result<(), CliError> {
    let model = load_model(&a.model, sink)?;
    let rect = parse_rect(&a.rect)?;
    sink.manifest.tolerances = json!({ "newton_tol": a.tol, "eigen": tolerances() });
    let roots = find_roots(&model, rect, a.tol)?;
    sink.manifest.summary = json!({ "roots": roots.total_multiplicity(), "winding": roots.winding });
    sink.write_csv(&roots.to_csv())
}

pub fn fold(a: &FoldArgs, sink: &mut Sink) -> Result<(), CliError> {
    let model = load_model(&a.model, sink)?;
    sink.manifest.tolerances = tolerances();
    let report = fold_coefficient(&model)?;
    sink.manifest.summary = json!({ "b": report.b, "cusp": report.cusp });
    sink.write_json(report.to_json())
}

pub fn hopf(a: &HopfArgs, sink: &mut Sink) -> Result<(), CliError> {
    let model = load_model(&a.model, sink)?;
    sink.manifest.variant = Some(a.variant.as_str().into());
    sink.manifest.tolerances = json!({ "mode_cap": a.mode_cap, "eigen": tolerances() });
    let opts = HopfOptions {
        h11_source: source(a.variant),
        mode_cap: a.mode_cap,
    };
    let report = hopf_coefficients(&model, a.omega, opts)?;
    sink.manifest.summary = json!({ "l1": report.l1, "c": [report.c.re, report.c.im] });
    let mut v = report.to_json();
    v["variant"] = json!(a.variant.as_str());
    sink.write_json(v)
}

fn resonance_label(class: &ResonanceClass) -> String {
    match class {
        ResonanceClass::Nonresonant { .. } => "none".into(),
        ResonanceClass::Resonant { r, s, strength, .. } => {
            let k = match strength {
                Strength::Strong => "strong",
                Strength::Weak => "weak",
            };
            format!("{r}/{s}-{k}")
        }
    }
}

struct SweepRow {
    omega2: f64,
    pipeline: Option<f64>,
    closed: Option<f64>,
    printed: Option<f64>,
    resonant: bool,
    resonance: String,
    pole_distance: f64,
}

pub fn l1_sweep(a: &L1SweepArgs, sink: &mut Sink) -> Result<(), CliError> {
    let b = WrightBranch::new(a.n);
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => parse_grid(&format!("0:{}:210", b.omega))?,
    };
    if a.omega1 <= 0.0 {
        return Err(CliError::Usage("--omega1 must be positive".into()));
    }
    sink.manifest.variant = Some(a.variant.as_str().into());
    sink.manifest.tolerances = json!({
        "mode_cap": a.mode_cap,
        "max_denominator": MAX_DENOMINATOR,
        "eigen": tolerances(),
    });
    let opts = HopfOptions {
        h11_source: source(a.variant),
        mode_cap: a.mode_cap,
    };
    let closed_form = match a.variant {
        VariantArg::Default => l1_forced_default,
        VariantArg::Paper => l1_forced_plain,
    };
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&o2| -> Result<SweepRow, CliError> {
            let model = wright_model(a.n, a.omega1, o2)?;
            let (pipeline, resonant) = match hopf_coefficients(&model, b.omega, opts) {
                Ok(r) => (Some(r.l1), false),
                Err(pfdde::Error::ResonantMode { .. }) => (None, true),
                Err(e) if e.is_numerical() => (None, false),
                Err(e) => return Err(e.into()),
            };
            Ok(SweepRow {
                omega2: o2,
                pipeline,
                closed: closed_form(a.n, a.omega1, o2).ok(),
                printed: l1_forced_paper(a.n, a.omega1, o2).ok(),
                resonant,
                resonance: resonance_label(&classify_resonance(b.omega, o2, MAX_DENOMINATOR)),
                pole_distance: (o2 - b.omega).abs(),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("omega2,l1_pipeline,l1_closed,l1_printed,resonant,resonance,pole_distance,sign_change\n");
    let mut prev: Option<f64> = None;
    let mut brackets = 0;
    for r in &rows {
        let change = match (prev, r.pipeline) {
            (Some(p), Some(c)) => p.signum() != c.signum(),
            _ => false,
        };
        brackets += change as usize;
        if r.pipeline.is_some() {
            prev = r.pipeline;
        }
        let _ = writeln!(
            csv,
            "{:.15e},{},{},{},{},{},{:.6e},{}",
            r.omega2,
            opt(r.pipeline),
            opt(r.closed),
            opt(r.printed),
            r.resonant,
            r.resonance,
            r.pole_distance,
            change
        );
    }
    let max_gap = rows
        .iter()
        .filter_map(|r| Some((r.pipeline? - r.closed?).abs()))
        .fold(0.0, f64::max);
    sink.manifest.summary = json!({
        "rows": rows.len(),
        "resonant_rows": rows.iter().filter(|r| r.resonant).count(),
        "sign_change_brackets": brackets,
        "max_pipeline_closed_gap": max_gap,
    });
    sink.write_csv(&csv)
}

pub fn simulate(a: &SimulateArgs, sink: &mut Sink) -> Result<(), CliError> {
    let model = load_model(&a.model, sink)?;
    let n = model.n();
    let period = match (a.period, model.forcing()) {
        (Some(p), _) => p,
        (None, Forcing::Periodic { period }) => period,
        (None, Forcing::Autonomous) => 2.0 * PI,
    };
    if !(period > 0.0 && period.is_finite()) {
        return Err(CliError::Usage(format!("strobe period {period} must be positive")));
    }
    if !(a.tmax > 0.0 && a.tmax.is_finite()) {
        return Err(CliError::Usage(format!("--tmax {} must be positive", a.tmax)));
    }
    let history = match a.history.len() {
        1 => vec![a.history[0]; n],
        k if k == n => a.history.clone(),
        k => return Err(CliError::Usage(format!("--history has {k} values for a model of dimension {n}"))),
    };
    let offset = match &a.offset {
        None => vec![0.0; n],
        Some(v) if v.len() == n => v.clone(),
        Some(v) => return Err(CliError::Usage(format!("--offset has {} values for dimension {n}", v.len()))),
    };
    let sys = ModelSystem::with_offset(&model, offset);
    validate_step(sys.delays(), a.dt)?;

    let mut cfg = StrobeConfig::new(period);
    cfg.transient = a.transient.unwrap_or((200.0 * period).min(0.5 * a.tmax));
    cfg.eps_dec = a.eps_dec;
    cfg.eps_cyc = a.eps_cyc;
    cfg.block = a.block.max(1);
    sink.manifest.tolerances = json!({
        "dt": a.dt,
        "tmax": a.tmax,
        "strobe": cfg,
        "history": history,
    });

    let traj = integrate_dde(&sys, &History::Constant(history), a.tmax, a.dt)?;
    let st = strobe(&traj, &cfg)?;
    let verdict = json!({
        "verdict": st.verdict.as_str(),
        "amplitude": st.amplitude,
        "half_range": st.half_range,
        "drift": st.drift,
        "diverged": traj.diverged,
        "config": cfg,
    });
    sink.manifest.summary = verdict.clone();
    sink.write_csv(&traj.to_csv(a.stride))?;
    if sink.write_aux_csv(".strobe.csv", &st.to_csv())?.is_none() {
        eprintln!("{verdict}");
    }
    Ok(())
}

pub fn bifdiag(a: &BifdiagArgs, sink: &mut Sink) -> Result<(), CliError> {
    let grid = parse_grid(&a.grid)?;
    sink.manifest.tolerances = json!({ "pole_rtol": pfdde::wright::POLE_RTOL, "s_max": a.s_max });
    let rows = bifdiag_rows(a.n_max, a.s_max, a.omega1, &grid);
    let mut csv = String::from("n,omega_n,a_n,omega2,kind,l1_paper,l1_default\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{:.15e},{:.15e},{:.15e},{},{},{}",
            r.n,
            r.omega_n,
            r.a_n,
            r.omega2,
            r.kind.as_str(),
            opt(r.l1_paper),
            opt(r.l1_default)
        );
    }
    sink.manifest.summary = json!({ "rows": rows.len() });
    sink.write_csv(&csv)
}

pub fn model(m: &ModelCommand, sink: &mut Sink) -> Result<(), CliError> {
    let model = match *m {
        ModelCommand::Wright { a: Some(a), .. } => autonomous_wright(a),
        ModelCommand::Wright {
            n,
            a: None,
            omega1,
            omega2,
        } => wright_model(n, omega1, omega2)?,
        ModelCommand::Fold {
            beta1,
            mean,
            sin,
            cos,
            freq,
        } => {
            let c = |re: f64, im: f64| Complex64::new(re, im);
            let beta2 = FourierSeries::scalar(
                freq,
                [
                    (0, c(mean, 0.0)),
                    (1, c(0.5 * cos, -0.5 * sin)),
                    (-1, c(0.5 * cos, 0.5 * sin)),
                ],
            )?;
            fold_model(beta1, &beta2)?
        }
    };
    sink.write_text(&(serialize_model(&model) + "\n"))
}
