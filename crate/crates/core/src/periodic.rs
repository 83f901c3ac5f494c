//! Periodic extension of the characteristic operator: history fields,
//! evaluation of the multilinear terms, mode-wise solves and resonance scans.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::charmatrix::{delta, CMat};
use crate::error::{Error, Result};
use crate::model::{permutations, Model, MultilinearStencil};
use crate::series::{fs_multiply, fs_pairing, CVec, FourierSeries};

/// Slack allowed when comparing a delay against the history length.
const DELAY_SLACK: f64 = 1e-12;

/// `u(t)(θ) = e^{zθ} v₀(t+θ)` for `θ ∈ [-h, 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryField {
    pub z: Complex64,
    pub profile: FourierSeries,
    pub max_delay: f64,
}

impl HistoryField {
    pub fn new(z: Complex64, profile: FourierSeries, max_delay: f64) -> Self {
        Self {
            z,
            profile,
            max_delay,
        }
    }

    /// Field with constant profile `v`.
    pub fn constant_profile(z: Complex64, v: CVec, freq: f64, max_delay: f64) -> Self {
        let profile = FourierSeries::constant(v).with_freq(freq).expect("constant series takes any frequency");
        Self::new(z, profile, max_delay)
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    /// `conj(u)(t)(θ) = e^{z̄θ} conj(v₀)(t+θ)`.
    pub fn conj(&self) -> Self {
        Self::new(self.z.conj(), self.profile.conj(), self.max_delay)
    }

    /// Series of `t ↦ u(t)(-τ)`.
    pub fn at_delay(&self, tau: f64) -> Result<FourierSeries> {
        history_eval(self, tau)
    }

    /// Pointwise value `u(t)(θ)`.
    pub fn eval(&self, t: f64, theta: f64) -> CVec {
        self.profile.eval(t + theta) * (self.z * theta).exp()
    }
}

/// Series of `t ↦ u(t)(-τ)`: modes `e^{-zτ} e^{-imω_T τ} v₀,m`.
pub fn history_eval(u: &HistoryField, tau: f64) -> Result<FourierSeries> {
    if !(0.0..=u.max_delay + DELAY_SLACK).contains(&tau) {
        return Err(Error::DelayOutOfRange {
            delay: tau,
            max_delay: u.max_delay,
        });
    }
    if tau == 0.0 {
        return Ok(u.profile.clone());
    }
    let w = u.profile.freq();
    let base = (-u.z * tau).exp();
    let modes: Vec<(i64, CVec)> = u
        .profile
        .modes()
        .map(|(m, v)| {
            let shift = Complex64::new(0.0, -(m as f64) * w * tau).exp();
            (m, v * (base * shift))
        })
        .collect();
    FourierSeries::from_modes(u.dim(), w, modes)
}

/// `B(t; u(t), w(t))` as a series in `t`.
pub fn eval_bilinear(b: &MultilinearStencil, u: &HistoryField, w: &HistoryField) -> Result<FourierSeries> {
    if b.order() != 2 {
        return Err(Error::OrderMismatch {
            expected: 2,
            found: b.order(),
        });
    }
    eval_multilinear(b, &[u, w])
}

/// `C(t; u(t), w(t), x(t))` as a series in `t`.
pub fn eval_trilinear(
    c: &MultilinearStencil,
    u: &HistoryField,
    w: &HistoryField,
    x: &HistoryField,
) -> Result<FourierSeries> {
    if c.order() != 3 {
        return Err(Error::OrderMismatch {
            expected: 3,
            found: c.order(),
        });
    }
    eval_multilinear(c, &[u, w, x])
}

/// Generic evaluation of an order-`r` stencil on `r` history fields.
pub fn eval_multilinear(stencil: &MultilinearStencil, args: &[&HistoryField]) -> Result<FourierSeries> {
    let r = stencil.order();
    if args.len() != r {
        return Err(Error::OrderMismatch {
            expected: r,
            found: args.len(),
        });
    }
    for a in args {
        if a.dim() != stencil.dim() {
            return Err(Error::DimensionMismatch {
                expected: stencil.dim(),
                found: a.dim(),
            });
        }
    }
    let freq = args
        .iter()
        .map(|a| a.profile.freq())
        .chain(stencil.terms().iter().map(|t| t.coeff.freq()))
        .fold(0.0, f64::max);
    let perms = permutations(r);
    let weight = Complex64::new(1.0 / perms.len() as f64, 0.0);
    let mut out = FourierSeries::zero(stencil.dim(), freq);
    for term in stencil.terms() {
        let mut avg = FourierSeries::zero(1, freq);
        for p in &perms {
            let mut prod = FourierSeries::scalar_constant(Complex64::new(1.0, 0.0));
            for (k, &j) in p.iter().enumerate() {
                let slot = term.slots[j];
                let s = args[k].at_delay(slot.delay)?.component(slot.component);
                prod = fs_multiply(&prod, &s)?;
            }
            avg = avg.add(&prod)?;
        }
        let contrib = fs_multiply(&avg.scale(weight), &term.coeff)?;
        out = out.add(&contrib)?;
    }
    Ok(out)
}

/// Resonance threshold `ε_res = 1e-8 (1 + |z| + |m| ω_T)`.
pub fn resonance_threshold(z: Complex64, m: i64, freq: f64) -> f64 {
    1e-8 * (1.0 + z.norm() + (m as f64).abs() * freq)
}

fn sigma_min(m: &CMat) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn mode_shift(model: &Model, z: Complex64, m: i64) -> Complex64 {
    z + Complex64::new(0.0, m as f64 * model.freq())
}

fn solve_modes<F>(model: &Model, z: Complex64, f: &FourierSeries, sign: f64, solve: F) -> Result<FourierSeries>
where
    F: Fn(&CMat, &CVec) -> Option<CVec>,
{
    if f.dim() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            found: f.dim(),
        });
    }
    let f = if f.is_constant() {
        f.clone().with_freq(model.freq())?
    } else if f.freq() != model.freq() {
        return Err(Error::PeriodMismatch(f.freq(), model.freq()));
    } else {
        f.clone()
    };
    let mut resonant = Vec::new();
    let mut modes = Vec::new();
    for (m, fm) in f.modes() {
        let d = delta(model, mode_shift(model, z, (sign as i64) * m));
        let eps = resonance_threshold(z, m, model.freq());
        if sigma_min(&d) < eps {
            resonant.push(m);
            continue;
        }
        match solve(&d, fm) {
            Some(x) => modes.push((m, x)),
            None => resonant.push(m),
        }
    }
    if !resonant.is_empty() {
        return Err(Error::ResonantMode { z, modes: resonant });
    }
    FourierSeries::from_modes(model.n(), model.freq(), modes)
}

/// Profile `q` of the solution of `𝚫(z)q = f`: `q_m = Δ(z + imω_T)^{-1} f_m`.
pub fn solve_characteristic(model: &Model, z: Complex64, f: &FourierSeries) -> Result<FourierSeries> {
    solve_modes(model, z, f, 1.0, |d, fm| d.clone().lu().solve(fm))
}

/// Adjoint profile: `p_m = f_m Δ(z - imω_T)^{-1}` for row-valued `f`
/// (stored as column vectors of the row entries).
pub fn solve_characteristic_adjoint(model: &Model, z: Complex64, f: &FourierSeries) -> Result<FourierSeries> {
    solve_modes(model, z, f, -1.0, |d, fm| d.transpose().lu().solve(fm))
}

/// Largest mode residual `max_m ‖Δ(z + imω_T) q_m - f_m‖`.
pub fn solve_residual(model: &Model, z: Complex64, q: &FourierSeries, f: &FourierSeries) -> f64 {
    let mut support = q.support();
    support.extend(f.support());
    support.sort_unstable();
    support.dedup();
    support
        .into_iter()
        .map(|m| (delta(model, mode_shift(model, z, m)) * q.coeff(m) - f.coeff(m)).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeMargin {
    pub m: i64,
    /// `σ_min(Δ(z + imω_T))`.
    pub sigma_min: f64,
    pub threshold: f64,
}

/// Best rational approximation `r/s` of a ratio with bounded denominator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RationalApprox {
    pub r: i64,
    pub s: i64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceScan {
    pub z: Complex64,
    pub mode_cap: u32,
    pub margins: Vec<ModeMargin>,
    pub flagged: Vec<i64>,
    /// Rational approximation of `ω_T / Im z` (denominator ≤ 100), when both
    /// are nonzero.
    pub rational: Option<RationalApprox>,
}

impl ResonanceScan {
    pub fn min_margin(&self) -> Option<&ModeMargin> {
        self.margins
            .iter()
            .min_by(|a, b| (a.sigma_min / a.threshold).total_cmp(&(b.sigma_min / b.threshold)))
    }
}

/// Singular-value margins of `Δ(z + imω_T)` for `|m| ≤ mode_cap`.
pub fn resonance_scan(model: &Model, z: Complex64, mode_cap: u32) -> ResonanceScan {
    let cap = if model.freq() == 0.0 { 0 } else { mode_cap as i64 };
    let margins: Vec<ModeMargin> = (-cap..=cap)
        .map(|m| ModeMargin {
            m,
            sigma_min: sigma_min(&delta(model, mode_shift(model, z, m))),
            threshold: resonance_threshold(z, m, model.freq()),
        })
        .collect();
    let flagged = margins
        .iter()
        .filter(|g| g.sigma_min < g.threshold)
        .map(|g| g.m)
        .collect();
    let rational = (model.freq() > 0.0 && z.im != 0.0).then(|| rational_approx(model.freq() / z.im.abs(), 100));
    ResonanceScan {
        z,
        mode_cap,
        margins,
        flagged,
        rational,
    }
}

/// Closest fraction `r/s` to `x ≥ 0` with `1 ≤ s ≤ max_den`, via continued
/// fraction convergents and semiconvergents.
pub fn rational_approx(x: f64, max_den: i64) -> RationalApprox {
    let max_den = max_den.max(1);
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    let mut best = RationalApprox {
        r: x.round() as i64,
        s: 1,
        error: (x - x.round()).abs(),
    };
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let q2 = a * q1 + q0;
        if q2 > max_den {
            // Largest admissible semiconvergent.
            let k = (max_den - q0) / q1.max(1);
            if k > 0 {
                let (r, s) = (k * p1 + p0, k * q1 + q0);
                let err = (x - r as f64 / s as f64).abs();
                if err < best.error {
                    best = RationalApprox { r, s, error: err };
                }
            }
            break;
        }
        let p2 = a * p1 + p0;
        let err = (x - p2 as f64 / q2 as f64).abs();
        if err < best.error || (err == best.error && q2 < best.s) {
            best = RationalApprox { r: p2, s: q2, error: err };
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    best
}

/// `⟨p, w₀⟩_T` for an adjoint profile `p` (row entries stored as a column).
pub fn fsc_residual(p: &FourierSeries, w0: &FourierSeries) -> Result<Complex64> {
    fs_pairing(p, w0)
}

/// Profile of a constant row vector as a series with the model frequency.
pub fn constant_row(p: &DVector<Complex64>, freq: f64) -> FourierSeries {
    FourierSeries::constant(p.clone()).with_freq(freq).expect("constant series takes any frequency")
}
