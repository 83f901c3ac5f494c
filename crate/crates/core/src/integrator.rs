//! Fixed-step RK4 for delay equations with cubic Hermite dense history,
//! stroboscopic sampling and the amplitude-based estimate of `Re c`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;

/// States with a component above this magnitude count as blown up.
pub const BLOWUP: f64 = 1e6;

/// Right-hand side `ẋ(t) = f(t, x(t), x(t - τ_1), …, x(t - τ_k))`.
pub trait DdeSystem: Sync {
    fn dim(&self) -> usize;
    /// Positive delays `τ_j` whose lagged states are passed to [`rhs`](Self::rhs).
    fn delays(&self) -> &[f64];
    fn rhs(&self, t: f64, x: &[f64], lagged: &[Vec<f64>], out: &mut [f64]);
}

/// `ẋ = Σ_j A_j x(t-τ_j) + ½B(t; x_t, x_t) + ⅙C(t; x_t, x_t, x_t) + offset`.
pub struct ModelSystem<'a> {
    model: &'a Model,
    offset: Vec<f64>,
    delays: Vec<f64>,
}

impl<'a> ModelSystem<'a> {
    pub fn new(model: &'a Model) -> Self {
        Self::with_offset(model, vec![0.0; model.n()])
    }

    /// Adds a constant term (e.g. the unfolding parameter of a fold).
    pub fn with_offset(model: &'a Model, offset: Vec<f64>) -> Self {
        let mut delays: Vec<f64> = model.linear().delays().to_vec();
        for s in [model.bilinear(), model.trilinear()].into_iter().flatten() {
            delays.extend(s.delays());
        }
        delays.retain(|&d| d > 0.0);
        delays.sort_by(f64::total_cmp);
        delays.dedup();
        Self { model, offset, delays }
    }
}

impl DdeSystem for ModelSystem<'_> {
    fn dim(&self) -> usize {
        self.model.n()
    }

    fn delays(&self) -> &[f64] {
        &self.delays
    }

    fn rhs(&self, t: f64, x: &[f64], lagged: &[Vec<f64>], out: &mut [f64]) {
        let at = |tau: f64, c: usize| -> f64 {
            if tau == 0.0 {
                x[c]
            } else {
                let j = self
                    .delays
                    .iter()
                    .position(|&d| d == tau)
                    .expect("delay registered");
                lagged[j][c]
            }
        };
        out.copy_from_slice(&self.offset);
        for (tau, a) in self.model.linear().terms() {
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    out[i] += a[(i, j)] * at(tau, j);
                }
            }
        }
        if let Some(b) = self.model.bilinear() {
            let v = b.eval_real_at(t, &[&at, &at]);
            for (o, v) in out.iter_mut().zip(v) {
                *o += 0.5 * v;
            }
        }
        if let Some(c) = self.model.trilinear() {
            let v = c.eval_real_at(t, &[&at, &at, &at]);
            for (o, v) in out.iter_mut().zip(v) {
                *o += v / 6.0;
            }
        }
    }
}

/// Uniform-step solution with derivative samples for Hermite interpolation.
pub struct Trajectory {
    dim: usize,
    dt: f64,
    x: Vec<f64>,
    f: Vec<f64>,
    pub diverged: bool,
    pub label: String,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of stored samples (`t_k = k dt`, `k = 0..len`).
    pub fn len(&self) -> usize {
        self.x.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.x[k * self.dim..(k + 1) * self.dim]
    }

    pub fn derivative(&self, k: usize) -> &[f64] {
        &self.f[k * self.dim..(k + 1) * self.dim]
    }

    /// Segment index and local coordinate of `t`, snapping to grid points.
    fn locate(&self, t: f64) -> (usize, f64) {
        let u = t / self.dt;
        let k = u.round();
        if (u - k).abs() < 1e-9 {
            let k = (k.max(0.0) as usize).min(self.len() - 1);
            return (k, 0.0);
        }
        let k = (u.floor().max(0.0) as usize).min(self.len() - 2);
        (k, u - k as f64)
    }

    /// Dense value of component `i` at `t ∈ [0, t_end]`.
    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        let (k, s) = self.locate(t);
        if s == 0.0 {
            return self.x[k * self.dim + i];
        }
        let n = self.dim;
        hermite(
            self.x[k * n + i],
            self.f[k * n + i] * self.dt,
            self.x[(k + 1) * n + i],
            self.f[(k + 1) * n + i] * self.dt,
            s,
        )
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (0..self.dim).map(|i| self.eval_component(t, i)).collect()
    }

    /// Exact extrema `(min, max)` of the Hermite interpolant of component `i`
    /// over `[a, b]`.
    pub fn range_component(&self, a: f64, b: f64, i: usize) -> (f64, f64) {
        let n = self.dim;
        let (ka, _) = self.locate(a);
        let (kb, sb) = self.locate(b);
        let kb = if sb == 0.0 { kb } else { kb + 1 };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut push = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        push(self.eval_component(a, i));
        push(self.eval_component(b, i));
        for k in ka..kb.min(self.len() - 1) {
            let (y0, m0, y1, m1) = (
                self.x[k * n + i],
                self.f[k * n + i] * self.dt,
                self.x[(k + 1) * n + i],
                self.f[(k + 1) * n + i] * self.dt,
            );
            let t0 = self.time(k);
            for s in hermite_critical_points(y0, m0, y1, m1) {
                let t = t0 + s * self.dt;
                if t > a && t < b {
                    push(hermite(y0, m0, y1, m1, s));
                }
            }
            if self.time(k) > a {
                push(y0);
            }
        }
        (lo, hi)
    }

    /// `max_i max_{t ∈ [a, b]} |x_i(t)|`.
    pub fn sup_norm(&self, a: f64, b: f64) -> f64 {
        (0..self.dim)
            .map(|i| {
                let (lo, hi) = self.range_component(a, b, i);
                lo.abs().max(hi.abs())
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t, x1..xn`, every `stride`-th sample.
    pub fn to_csv(&self, stride: usize) -> String {
        let mut s = String::from("t");
        for i in 1..=self.dim {
            let _ = write!(s, ",x{i}");
        }
        s.push('\n');
        for k in (0..self.len()).step_by(stride.max(1)) {
            let _ = write!(s, "{:.10}", self.time(k));
            for v in self.sample(k) {
                let _ = write!(s, ",{v:.12e}");
            }
            s.push('\n');
        }
        s
    }
}

fn hermite(y0: f64, m0: f64, y1: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
}

/// Roots in `(0, 1)` of the derivative of the Hermite cubic.
fn hermite_critical_points(y0: f64, m0: f64, y1: f64, m1: f64) -> Vec<f64> {
    // p'(s) = A s² + B s + C
    let a = 6.0 * y0 + 3.0 * m0 - 6.0 * y1 + 3.0 * m1;
    let b = -6.0 * y0 - 4.0 * m0 + 6.0 * y1 - 2.0 * m1;
    let c = m0;
    let mut out = Vec::new();
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return out;
    }
    if a.abs() <= 1e-14 * scale {
        if b != 0.0 {
            out.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            if q != 0.0 {
                out.push(q / a);
                out.push(c / q);
            } else {
                out.push(0.0);
            }
        }
    }
    out.retain(|s| *s > 0.0 && *s < 1.0);
    out
}

/// Initial history on `[-h, 0]`.
pub enum History<'a> {
    Constant(Vec<f64>),
    Function(Box<dyn Fn(f64) -> Vec<f64> + Sync + 'a>),
}

impl History<'_> {
    fn at(&self, t: f64) -> Vec<f64> {
        match self {
            History::Constant(v) => v.clone(),
            History::Function(f) => f(t),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            History::Constant(v) => format!("constant {v:?}"),
            History::Function(_) => "function".into(),
        }
    }
}

/// Check `dt > 0`, `dt ≤ h/4` (when `h > 0`) and that `dt` divides every delay.
pub fn validate_step(delays: &[f64], dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep(format!("dt = {dt} must be positive")));
    }
    let h = delays.iter().copied().fold(0.0, f64::max);
    if h > 0.0 && dt > h / 4.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidStep(format!("dt = {dt} exceeds h/4 = {}", h / 4.0)));
    }
    for &tau in delays {
        let r = tau / dt;
        if (r - r.round()).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::InvalidStep(format!("dt = {dt} does not divide delay {tau}")));
        }
    }
    Ok(())
}

/// Classical RK4 on `[0, t_end]` with step `dt`, delayed values from the
/// Hermite interpolant of stored steps (or the history for `t ≤ 0`).
pub fn integrate_dde<S: DdeSystem + ?Sized>(sys: &S, history: &History, t_end: f64, dt: f64) -> Result<Trajectory> {
    validate_step(sys.delays(), dt)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidStep(format!("t_end = {t_end} must be nonnegative")));
    }
    let n = sys.dim();
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let lags: Vec<usize> = sys.delays().iter().map(|tau| (tau / dt).round() as usize).collect();
    let mut traj = Trajectory {
        dim: n,
        dt,
        x: Vec::with_capacity((steps + 1) * n),
        f: Vec::with_capacity((steps + 1) * n),
        diverged: false,
        label: history.describe(),
    };
    let x0 = history.at(0.0);
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    traj.x.extend_from_slice(&x0);

    // Lagged state at t_k + s·dt - τ_j, with s ∈ {0, ½, 1}.
    let lagged = |traj: &Trajectory, k: usize, s: f64| -> Vec<Vec<f64>> {
        lags.iter()
            .map(|&l| {
                let kk = k as i64 - l as i64;
                let t = (kk as f64 + s) * dt;
                if t <= 0.0 {
                    history.at(t)
                } else if s == 0.0 {
                    traj.sample(kk as usize).to_vec()
                } else if s == 1.0 {
                    traj.sample((kk + 1) as usize).to_vec()
                } else {
                    let kk = kk as usize;
                    (0..n)
                        .map(|i| {
                            hermite(
                                traj.x[kk * n + i],
                                traj.f[kk * n + i] * dt,
                                traj.x[(kk + 1) * n + i],
                                traj.f[(kk + 1) * n + i] * dt,
                                s,
                            )
                        })
                        .collect()
                }
            })
            .collect()
    };

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for k in 0..steps {
        let t = k as f64 * dt;
        let xk: Vec<f64> = traj.sample(k).to_vec();
        sys.rhs(t, &xk, &lagged(&traj, k, 0.0), &mut k1);
        traj.f.extend_from_slice(&k1);
        let mid = lagged(&traj, k, 0.5);
        for i in 0..n {
            tmp[i] = xk[i] + 0.5 * dt * k1[i];
        }
        sys.rhs(t + 0.5 * dt, &tmp, &mid, &mut k2);
        for i in 0..n {
            tmp[i] = xk[i] + 0.5 * dt * k2[i];
        }
        sys.rhs(t + 0.5 * dt, &tmp, &mid, &mut k3);
        for i in 0..n {
            tmp[i] = xk[i] + dt * k3[i];
        }
        sys.rhs(t + dt, &tmp, &lagged(&traj, k, 1.0), &mut k4);
        for i in 0..n {
            tmp[i] = xk[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if tmp.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            traj.diverged = true;
            return Ok(traj);
        }
        traj.x.extend_from_slice(&tmp);
    }
    let k = steps;
    let xk = traj.sample(k).to_vec();
    sys.rhs(k as f64 * dt, &xk, &lagged(&traj, k, 0.0), &mut k1);
    traj.f.extend_from_slice(&k1);
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrobeConfig {
    pub period: f64,
    /// Sampling phase `s` in `s + kT`.
    pub phase: f64,
    pub transient: f64,
    /// Amplitude below which the solution counts as decayed.
    pub eps_dec: f64,
    /// Relative amplitude drift between consecutive windows below which the
    /// attractor counts as converged.
    pub eps_cyc: f64,
    /// Forcing periods per amplitude window.
    pub block: usize,
}

impl StrobeConfig {
    pub fn new(period: f64) -> Self {
        Self {
            period,
            phase: 0.0,
            transient: 200.0 * period,
            eps_dec: 1e-5,
            eps_cyc: 1e-6,
            block: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Decayed,
    Converged { amplitude: f64 },
    Diverged,
    Undecided,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Decayed => "decayed",
            Verdict::Converged { .. } => "converged",
            Verdict::Diverged => "diverged",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrobeResult {
    /// `(t, x(t))` at `t = phase + kT` after the transient.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub verdict: Verdict,
    /// Sup-norm over the final window.
    pub amplitude: f64,
    /// Half peak-to-peak range of the first component over the final window.
    pub half_range: f64,
    /// Relative change of the sup-norm between the last two windows.
    pub drift: f64,
    pub config: StrobeConfig,
}

impl StrobeResult {
    /// CSV with columns `k, t, x1..xn`.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map(|s| s.1.len()).unwrap_or(0);
        let mut s = String::from("k,t");
        for i in 1..=n {
            let _ = write!(s, ",x{i}");
        }
        s.push('\n');
        for (k, (t, x)) in self.samples.iter().enumerate() {
            let _ = write!(s, "{k},{t:.10}");
            for v in x {
                let _ = write!(s, ",{v:.12e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Stroboscopic samples and verdict. The amplitude is the sup-norm over the
/// last `block` periods; drift compares it with the preceding window.
pub fn strobe(traj: &Trajectory, cfg: &StrobeConfig) -> Result<StrobeResult> {
    if !(cfg.period.is_finite() && cfg.period > 0.0) || cfg.block == 0 {
        return Err(Error::Invalid("strobe period and block must be positive".into()));
    }
    let window = cfg.block as f64 * cfg.period;
    let t_end = traj.t_end();
    if traj.diverged {
        return Ok(StrobeResult {
            samples: Vec::new(),
            verdict: Verdict::Diverged,
            amplitude: f64::INFINITY,
            half_range: f64::INFINITY,
            drift: f64::INFINITY,
            config: *cfg,
        });
    }
    let needed = cfg.transient + 2.0 * window;
    if t_end + 1e-9 < needed {
        return Err(Error::InsufficientSpan {
            needed,
            available: t_end,
        });
    }
    let mut samples = Vec::new();
    let mut k = 0usize;
    loop {
        let t = cfg.transient + cfg.phase + k as f64 * cfg.period;
        if t > t_end + 1e-9 {
            break;
        }
        samples.push((t, traj.eval(t.min(t_end))));
        k += 1;
    }
    let a0 = traj.sup_norm(t_end - window, t_end);
    let a1 = traj.sup_norm(t_end - 2.0 * window, t_end - window);
    let (lo, hi) = traj.range_component(t_end - window, t_end, 0);
    let drift = if a0 > 0.0 { (a0 - a1).abs() / a0 } else { 0.0 };
    let verdict = if !a0.is_finite() {
        Verdict::Diverged
    } else if a0 < cfg.eps_dec {
        Verdict::Decayed
    } else if drift < cfg.eps_cyc {
        Verdict::Converged { amplitude: a0 }
    } else {
        Verdict::Undecided
    };
    Ok(StrobeResult {
        samples,
        verdict,
        amplitude: a0,
        half_range: 0.5 * (hi - lo),
        drift,
        config: *cfg,
    })
}

/// Which amplitude a sweep records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMetric {
    #[default]
    SupNorm,
    HalfRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub strobe: StrobeConfig,
    pub metric: AmplitudeMetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    /// Zero for decayed runs.
    pub amplitude: f64,
    pub verdict: Verdict,
}

impl SweepPoint {
    pub fn is_decided(&self) -> bool {
        matches!(self.verdict, Verdict::Decayed | Verdict::Converged { .. })
    }
}

/// Simulate `build(param)` from `history(param)` for each parameter value
/// (in parallel, results in input order).
pub fn amplitude_sweep<S, B, H>(build: B, history: H, params: &[f64], cfg: &SimConfig) -> Result<Vec<SweepPoint>>
where
    S: DdeSystem,
    B: Fn(f64) -> S + Sync,
    H: Fn(f64) -> History<'static> + Sync,
{
    params
        .par_iter()
        .map(|&param| {
            let sys = build(param);
            let traj = integrate_dde(&sys, &history(param), cfg.t_end, cfg.dt)?;
            let s = strobe(&traj, &cfg.strobe)?;
            let amplitude = match s.verdict {
                Verdict::Decayed => 0.0,
                Verdict::Diverged => f64::INFINITY,
                _ => match cfg.metric {
                    AmplitudeMetric::SupNorm => s.amplitude,
                    AmplitudeMetric::HalfRange => s.half_range,
                },
            };
            Ok(SweepPoint {
                param,
                amplitude,
                verdict: s.verdict,
            })
        })
        .collect()
}

/// Least-squares slope of `y = k x` and the coefficient of determination.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if xs.len() != ys.len() || xs.is_empty() || sxx == 0.0 {
        return Err(Error::Degenerate("need at least one nonzero abscissa".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let k = sxy / sxx;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - k * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((k, r2))
}

/// `Re c ≈ -4 Re(dλ/dμ) / slope`, where `slope` is the fitted
/// `amplitude² / δμ` and the state amplitude is `2|ξ|`.
pub fn estimate_re_c(slope: f64, dlambda_dparam: Complex64) -> Result<f64> {
    if !(slope.is_finite() && slope.abs() > 1e-14) {
        return Err(Error::Degenerate(format!("amplitude slope {slope} is degenerate")));
    }
    if dlambda_dparam.re == 0.0 {
        return Err(Error::Degenerate("Re dλ/dμ vanishes".into()));
    }
    Ok(-4.0 * dlambda_dparam.re / slope)
}

/// Truncated normal forms with an optional higher-order forcing term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalForm {
    /// `ξ̇ = β + bξ² + N(t)ξ³`.
    Fold { beta: f64, b: f64 },
    /// `ξ̇ = (β + iω)ξ + cξ|ξ|² + N(t)|ξ|⁴`.
    Hopf { beta: f64, omega: f64, c: Complex64 },
}

pub struct NormalFormSystem<N: Fn(f64) -> f64 + Sync> {
    pub kind: NormalForm,
    pub forcing: N,
}

impl<N: Fn(f64) -> f64 + Sync> DdeSystem for NormalFormSystem<N> {
    fn dim(&self) -> usize {
        match self.kind {
            NormalForm::Fold { .. } => 1,
            NormalForm::Hopf { .. } => 2,
        }
    }

    fn delays(&self) -> &[f64] {
        &[]
    }

    fn rhs(&self, t: f64, x: &[f64], _lagged: &[Vec<f64>], out: &mut [f64]) {
        let nt = (self.forcing)(t);
        match self.kind {
            NormalForm::Fold { beta, b } => out[0] = beta + b * x[0] * x[0] + nt * x[0].powi(3),
            NormalForm::Hopf { beta, omega, c } => {
                let xi = Complex64::new(x[0], x[1]);
                let r2 = xi.norm_sqr();
                let d = Complex64::new(beta, omega) * xi + c * xi * r2 + nt * r2 * r2;
                out[0] = d.re;
                out[1] = d.im;
            }
        }
    }
}

/// RK4 solution of a truncated normal form from `init` (`ξ` as real
/// components).
pub fn integrate_normal_form<N: Fn(f64) -> f64 + Sync>(
    kind: NormalForm,
    forcing: N,
    init: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let sys = NormalFormSystem { kind, forcing };
    integrate_dde(&sys, &History::Constant(init.to_vec()), t_end, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Forcing, LinearPart};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn scalar(terms: &[(f64, f64)]) -> Model {
        let lin = LinearPart::new(
            1,
            terms
                .iter()
                .map(|&(tau, a)| (tau, DMatrix::from_element(1, 1, a)))
                .collect(),
        )
        .unwrap();
        Model::new(1, Forcing::Autonomous, lin, None, None, None).unwrap()
    }

    #[test]
    fn exponential_decay() {
        let m = scalar(&[(0.0, -1.0)]);
        let tr = integrate_dde(&ModelSystem::new(&m), &History::Constant(vec![1.0]), 1.0, 1e-3).unwrap();
        assert!((tr.sample(tr.len() - 1)[0] - (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn dense_output_hits_samples() {
        let m = scalar(&[(1.0, -1.0)]);
        let tr = integrate_dde(&ModelSystem::new(&m), &History::Constant(vec![1.0]), 3.0, 0.01).unwrap();
        for k in [0, 17, 150, 300] {
            assert_eq!(tr.eval_component(tr.time(k), 0), tr.sample(k)[0]);
        }
    }

    #[test]
    fn step_validation() {
        let m = scalar(&[(1.0, -1.0)]);
        let h = History::Constant(vec![1.0]);
        assert!(matches!(
            integrate_dde(&ModelSystem::new(&m), &h, 1.0, 0.3),
            Err(Error::InvalidStep(_))
        ));
        assert!(matches!(
            integrate_dde(&ModelSystem::new(&m), &h, 1.0, 0.03),
            Err(Error::InvalidStep(_))
        ));
        assert!(integrate_dde(&ModelSystem::new(&m), &h, 1.0, 0.25).is_ok());
    }

    #[test]
    fn delay_equal_to_step() {
        // ẋ = -x(t - dt) with dt = h/4 is well defined from stored samples.
        let m = scalar(&[(0.25, -1.0)]);
        let tr = integrate_dde(&ModelSystem::new(&m), &History::Constant(vec![1.0]), 1.0, 0.0625).unwrap();
        assert!(tr.sample(tr.len() - 1)[0].is_finite());
    }

    #[test]
    fn blowup_guard() {
        let m = scalar(&[(0.0, 50.0)]);
        let tr = integrate_dde(&ModelSystem::new(&m), &History::Constant(vec![1.0]), 10.0, 0.01).unwrap();
        assert!(tr.diverged);
        let s = strobe(&tr, &StrobeConfig::new(1.0)).unwrap();
        assert_eq!(s.verdict, Verdict::Diverged);
    }

    #[test]
    fn hermite_extrema() {
        let m = scalar(&[(1.0, -PI / 2.0)]);
        let h = History::Function(Box::new(|t: f64| vec![(PI * t / 2.0).cos()]));
        let tr = integrate_dde(&ModelSystem::new(&m), &h, 8.0, 0.05).unwrap();
        let (lo, hi) = tr.range_component(0.0, 8.0, 0);
        assert!((hi - 1.0).abs() < 1e-6 && (lo + 1.0).abs() < 1e-6);
    }

    #[test]
    fn decaying_strobe() {
        let m = scalar(&[(0.0, -1.0)]);
        let tr = integrate_dde(&ModelSystem::new(&m), &History::Constant(vec![1.0]), 40.0, 0.01).unwrap();
        let mut cfg = StrobeConfig::new(1.0);
        cfg.transient = 20.0;
        let s = strobe(&tr, &cfg).unwrap();
        assert_eq!(s.verdict, Verdict::Decayed);
        assert!(s.amplitude < 1e-5);
        cfg.transient = 39.5;
        assert!(matches!(strobe(&tr, &cfg), Err(Error::InsufficientSpan { .. })));
    }

    #[test]
    fn fit_and_estimate() {
        let (k, r2) = fit_through_origin(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(k, 2.0);
        assert_eq!(r2, 1.0);
        assert!(fit_through_origin(&[0.0], &[1.0]).is_err());
        assert_eq!(estimate_re_c(4.0, Complex64::new(1.0, 3.0)).unwrap(), -1.0);
        assert!(estimate_re_c(0.0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn hopf_normal_form_amplitude() {
        let kind = NormalForm::Hopf {
            beta: 0.04,
            omega: PI,
            c: Complex64::new(-1.0, 0.0),
        };
        let tr = integrate_normal_form(kind, |_| 0.0, &[0.05, 0.0], 300.0, 0.01).unwrap();
        let r = Complex64::new(tr.sample(tr.len() - 1)[0], tr.sample(tr.len() - 1)[1]).norm();
        assert!((r - 0.2).abs() < 0.01);
    }
}
