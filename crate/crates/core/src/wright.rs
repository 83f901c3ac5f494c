//! Closed forms for the forced Wright equation
//! `ẋ = a x(t-1)[1 + β(t) x(t)]` and the scalar fold model
//! `ẋ = α₁ + β₁(x(t-1) - x(t)) + β₂(t) x(t-1)²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Forcing, LinearPart, Model, MultilinearStencil, Slot, StencilTerm};
use crate::series::FourierSeries;

/// Relative threshold on `|w(x)|` below which `J` is treated as singular.
pub const POLE_RTOL: f64 = 1e-13;

/// Hopf branch `N`: `ω_N = π/2 + Nπ`, `a_N = (-1)^{N+1} ω_N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WrightBranch {
    pub n: u32,
    pub omega: f64,
    pub a: f64,
}

impl WrightBranch {
    pub fn new(n: u32) -> Self {
        let omega = PI / 2.0 + n as f64 * PI;
        Self {
            n,
            omega,
            a: sign(n + 1) * omega,
        }
    }

    /// `(-1)^N`.
    pub fn parity(&self) -> f64 {
        sign(self.n)
    }

    /// Left null vector `(1 - iω_N)/(1 + ω_N²)` (with `q = 1`).
    pub fn p(&self) -> Complex64 {
        Complex64::new(1.0, -self.omega) / (1.0 + self.omega * self.omega)
    }

    /// `w(x) = a_N² + 2a_N x sin x + x²`.
    pub fn w(&self, x: f64) -> f64 {
        self.a * self.a + 2.0 * self.a * x * x.sin() + x * x
    }

    /// `J(x) = 2ω_N (a_N sin x + x - i a_N cos x) / w(x) = 2iω_N / Δ(ix)`.
    pub fn j(&self, x: f64) -> Result<Complex64> {
        let w = self.w(x);
        if w.abs() < POLE_RTOL * (self.a * self.a + x * x) {
            return Err(Error::PoleAtX { x, w });
        }
        let a = self.a;
        Ok(Complex64::new(a * x.sin() + x, -a * x.cos()) * (2.0 * self.omega / w))
    }

    /// `X_m = (-1)^N e^{-imω_T} - i`.
    fn x_factor(&self, m: i64, freq: f64) -> Complex64 {
        Complex64::new(0.0, -(m as f64) * freq).exp() * self.parity() - Complex64::new(0.0, 1.0)
    }
}

fn sign(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `J(N, x)`.
pub fn j(n: u32, x: f64) -> Result<Complex64> {
    WrightBranch::new(n).j(x)
}

/// `J₀ = J(2ω_N) - 2J(0)`.
pub fn j0(n: u32) -> Complex64 {
    let b = WrightBranch::new(n);
    b.j(2.0 * b.omega).expect("no pole at 2ω_N") - b.j(0.0).expect("no pole at 0") * 2.0
}

/// Forced Wright model with parameter `a` and scalar forcing `β`. The
/// bilinear stencil is `aβ(t)[ψ₁(0)ψ₂(-1) + ψ₁(-1)ψ₂(0)]`.
pub fn wright_model_with(a: f64, beta: &FourierSeries) -> Result<Model> {
    if beta.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: beta.dim(),
        });
    }
    let forcing = if beta.is_constant() {
        Forcing::Autonomous
    } else {
        Forcing::Periodic {
            period: 2.0 * PI / beta.freq(),
        }
    };
    let lin = LinearPart::new(
        1,
        vec![
            (0.0, DMatrix::zeros(1, 1)),
            (1.0, DMatrix::from_element(1, 1, a)),
        ],
    )?;
    let g = beta.scale(Complex64::new(a, 0.0));
    let b = MultilinearStencil::new(
        2,
        1,
        vec![
            StencilTerm {
                coeff: g.clone(),
                slots: vec![Slot::new(0.0, 0), Slot::new(1.0, 0)],
            },
            StencilTerm {
                coeff: g,
                slots: vec![Slot::new(1.0, 0), Slot::new(0.0, 0)],
            },
        ],
    )?;
    Model::new(1, forcing, lin, Some(b), None, None)
}

/// Forcing `β(t) = Ω₁ cos(Ω₂ t)` as a scalar series.
pub fn cosine_forcing(omega1: f64, omega2: f64) -> Result<FourierSeries> {
    let h = Complex64::new(omega1 / 2.0, 0.0);
    FourierSeries::scalar(omega2, [(-1, h), (1, h)])
}

/// Forced Wright equation on branch `N` with `β(t) = Ω₁ cos(Ω₂ t)`.
/// `Ω₁ = 0` yields the autonomous model with a zero quadratic term.
pub fn wright_model(n: u32, omega1: f64, omega2: f64) -> Result<Model> {
    let a = WrightBranch::new(n).a;
    if omega1 == 0.0 {
        return wright_model_with(a, &FourierSeries::scalar_constant(Complex64::new(0.0, 0.0)));
    }
    if !(omega2 > 0.0 && omega2.is_finite()) {
        return Err(Error::Invalid(format!("forcing frequency {omega2} must be positive")));
    }
    wright_model_with(a, &cosine_forcing(omega1, omega2)?)
}

/// Standard Wright equation (`β ≡ 1`) with parameter `a`.
pub fn autonomous_wright(a: f64) -> Model {
    wright_model_with(a, &FourierSeries::scalar_constant(Complex64::new(1.0, 0.0)))
        .expect("autonomous Wright model is well formed")
}

/// Truncated fold model `ẋ = β₁(x(t-1) - x(t)) + β₂(t) x(t-1)²` at `α₁ = 0`,
/// with the bilinear stencil `2β₂` on slots `(1, 1)`.
pub fn fold_model(beta1: f64, beta2: &FourierSeries) -> Result<Model> {
    if beta1 == -1.0 {
        return Err(Error::Invalid(
            "β₁ = -1: λ = 0 is a double root and b has a pole".into(),
        ));
    }
    if beta2.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: beta2.dim(),
        });
    }
    let forcing = if beta2.is_constant() {
        Forcing::Autonomous
    } else {
        Forcing::Periodic {
            period: 2.0 * PI / beta2.freq(),
        }
    };
    let lin = LinearPart::new(
        1,
        vec![
            (0.0, DMatrix::from_element(1, 1, -beta1)),
            (1.0, DMatrix::from_element(1, 1, beta1)),
        ],
    )?;
    let b = MultilinearStencil::new(
        2,
        1,
        vec![StencilTerm {
            coeff: beta2.scale(Complex64::new(2.0, 0.0)),
            slots: vec![Slot::new(1.0, 0), Slot::new(1.0, 0)],
        }],
    )?;
    Model::new(1, forcing, lin, Some(b), None, None)
}

/// Closed-form fold coefficient `β̄₂ / (1 + β₁)`.
pub fn fold_b_closed(beta1: f64, beta2: &FourierSeries) -> f64 {
    beta2.coeff(0)[0].re / (1.0 + beta1)
}

/// Printed autonomous value `-(9(-1)^N + 13ω_N) / (5(1 + ω_N²))`.
pub fn l1_autonomous_paper(n: u32) -> f64 {
    let b = WrightBranch::new(n);
    -(9.0 * b.parity() + 13.0 * b.omega) / (5.0 * (1.0 + b.omega * b.omega))
}

/// Autonomous value with `H₁₁` driven by `B(φ, φ̄)`:
/// `((-1)^N - 3ω_N) / (5(1 + ω_N²))`.
pub fn l1_autonomous_default(n: u32) -> f64 {
    let b = WrightBranch::new(n);
    (b.parity() - 3.0 * b.omega) / (5.0 * (1.0 + b.omega * b.omega))
}

/// Which right-hand side drives `H₁₁` in the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// `H₁₁` from `B(φ, φ̄)`, which vanishes for this model.
    Default,
    /// `H₁₁` from `B(φ, φ)`.
    Plain,
}

/// `l₁ = Σ_m Re[(1 - iω_N) β_{-m} β_m J_m X_m] / (2(1 + ω_N²))` for a general
/// scalar forcing `β`.
pub fn l1_general(n: u32, beta: &FourierSeries, variant: Variant) -> Result<f64> {
    let b = WrightBranch::new(n);
    let freq = beta.freq();
    let mut acc = 0.0;
    for (m, bm) in beta.modes() {
        let bmm = beta.coeff(-m)[0];
        if bmm == Complex64::new(0.0, 0.0) {
            continue;
        }
        let x = m as f64 * freq;
        let mut jm = b.j(2.0 * b.omega + x)?;
        if variant == Variant::Plain {
            jm -= b.j(x)? * 2.0;
        }
        let term = Complex64::new(1.0, -b.omega) * bmm * bm[0] * jm * b.x_factor(m, freq);
        acc += term.re;
    }
    Ok(acc / (2.0 * (1.0 + b.omega * b.omega)))
}

fn forced_j(b: &WrightBranch, omega2: f64, variant: Variant) -> Result<(Complex64, Complex64)> {
    let mut jm = b.j(2.0 * b.omega - omega2)?;
    let mut jp = b.j(2.0 * b.omega + omega2)?;
    if variant == Variant::Plain {
        jm -= b.j(-omega2)? * 2.0;
        jp -= b.j(omega2)? * 2.0;
    }
    Ok((jm, jp))
}

fn forced_closed(n: u32, omega1: f64, omega2: f64, variant: Variant) -> Result<f64> {
    let b = WrightBranch::new(n);
    let (jm, jp) = forced_j(&b, omega2, variant)?;
    let s = b.parity();
    let w = b.omega;
    let sum = jm + jp;
    let v = s * omega2.cos() * (sum.re + w * sum.im)
        + (1.0 - s * omega2.sin()) * (jm.im - w * jm.re)
        + (1.0 + s * omega2.sin()) * (jp.im - w * jp.re);
    Ok(omega1 * omega1 * v / (8.0 * (1.0 + w * w)))
}

/// Printed forced formula with `J_{±1} = J(2ω_N ± Ω₂) - 2J(±Ω₂)`, evaluated
/// literally.
pub fn l1_forced_paper(n: u32, omega1: f64, omega2: f64) -> Result<f64> {
    let b = WrightBranch::new(n);
    let (jm, jp) = forced_j(&b, omega2, Variant::Plain)?;
    let w = b.omega;
    let sum = jm + jp;
    let v = b.parity() * omega2.cos() * (sum.re + w * sum.im)
        + (1.0 - omega2.sin()) * (jm.im - w * jm.re)
        + (1.0 + omega2.sin()) * (jp.im - w * jp.re);
    Ok(omega1 * v / (4.0 * (1.0 + w * w)))
}

/// Forced value for `β = Ω₁ cos(Ω₂ t)` with `H₁₁` from `B(φ, φ)`, from the
/// general mode sum.
pub fn l1_forced_plain(n: u32, omega1: f64, omega2: f64) -> Result<f64> {
    forced_closed(n, omega1, omega2, Variant::Plain)
}

/// Forced value for `β = Ω₁ cos(Ω₂ t)` with `H₁₁` from `B(φ, φ̄)`.
pub fn l1_forced_default(n: u32, omega1: f64, omega2: f64) -> Result<f64> {
    forced_closed(n, omega1, omega2, Variant::Default)
}

/// `{ω_N r/s : 1 ≤ r ≤ r_max, 1 ≤ s ≤ s_max, gcd(r, s) = 1}`, sorted.
pub fn strong_resonance_points(n: u32, r_max: u32, s_max: u32) -> Vec<f64> {
    let b = WrightBranch::new(n);
    let mut out: Vec<f64> = (1..=r_max)
        .flat_map(|r| (1..=s_max).map(move |s| (r, s)))
        .filter(|&(r, s)| gcd(r, s) == 1)
        .map(|(r, s)| b.omega * r as f64 / s as f64)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BifKind {
    Hopf,
    StrongResonance,
    Pole,
    GeneralizedHopfCandidate,
}

impl BifKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BifKind::Hopf => "hopf",
            BifKind::StrongResonance => "strong_resonance",
            BifKind::Pole => "pole",
            BifKind::GeneralizedHopfCandidate => "generalized_hopf_candidate",
        }
    }
}

/// One row of the `(Ω₂, a)` bifurcation diagram data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BifRow {
    pub n: u32,
    pub omega_n: f64,
    pub a_n: f64,
    pub omega2: f64,
    pub kind: BifKind,
    pub l1_paper: Option<f64>,
    pub l1_default: Option<f64>,
}

impl BifRow {
    fn new(n: u32, omega2: f64, kind: BifKind, omega1: f64) -> Self {
        let b = WrightBranch::new(n);
        Self {
            n,
            omega_n: b.omega,
            a_n: b.a,
            omega2,
            kind,
            l1_paper: l1_forced_paper(n, omega1, omega2).ok(),
            l1_default: l1_forced_default(n, omega1, omega2).ok(),
        }
    }
}

/// Diagram rows for branches `0..=n_max`: Hopf rows on `grid`, strong
/// resonance points with `s ≤ s_max`, the pole at `Ω₂ = ω_N`, and sign
/// changes of either closed form (bisected) as generalized-Hopf candidates.
pub fn bifdiag_rows(n_max: u32, s_max: u32, omega1: f64, grid: &[f64]) -> Vec<BifRow> {
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let b = WrightBranch::new(n);
        for &o in grid {
            rows.push(BifRow::new(n, o, BifKind::Hopf, omega1));
        }
        for o in strong_resonance_points(n, 3, s_max) {
            let kind = if (o - b.omega).abs() <= 1e-12 * b.omega {
                BifKind::Pole
            } else {
                BifKind::StrongResonance
            };
            rows.push(BifRow::new(n, o, kind, omega1));
        }
        if s_max == 0 {
            rows.push(BifRow::new(n, b.omega, BifKind::Pole, omega1));
        }
        for f in [l1_forced_paper as fn(u32, f64, f64) -> Result<f64>, l1_forced_default] {
            for o in sign_changes(|x| f(n, omega1, x), grid) {
                rows.push(BifRow::new(n, o, BifKind::GeneralizedHopfCandidate, omega1));
            }
        }
    }
    rows
}

/// Zeros of `f` bracketed by consecutive grid points, excluding brackets
/// that straddle a pole (where `|f|` grows instead of shrinking).
pub fn sign_changes<F: Fn(f64) -> Result<f64>>(f: F, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (Ok(mut flo), Ok(fhi)) = (f(lo), f(hi)) else {
            continue;
        };
        if flo.signum() == fhi.signum() || flo == 0.0 {
            continue;
        }
        let bound = flo.abs().max(fhi.abs());
        let mut ok = true;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let Ok(fm) = f(mid) else {
                ok = false;
                break;
            };
            if fm.abs() > bound {
                ok = false;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        if ok {
            out.push(0.5 * (lo + hi));
        }
    }
    out
}
