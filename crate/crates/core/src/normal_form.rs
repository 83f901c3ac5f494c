//! Critical normal form coefficients: fold `b` and nonresonant Hopf `c`, `l₁`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::charmatrix::{delta, delta_prime, eigen_triple, EigenTriple};
use crate::error::{Error, Result};
use crate::model::{permutations, Model, MultilinearStencil};
use crate::periodic::{
    constant_row, eval_bilinear, eval_trilinear, fsc_residual, rational_approx, resonance_scan, solve_characteristic,
    HistoryField, ResonanceScan,
};
use crate::series::{CVec, FourierSeries};

/// Default tolerance of the rational classifier.
pub const RATIONAL_TOL: f64 = 1e-9;
/// Default denominator bound of the rational classifier.
pub const MAX_DENOMINATOR: i64 = 100;
/// Default number of modes checked on each side by the resonance scans.
pub const DEFAULT_MODE_CAP: u32 = 12;

/// Right-hand side used for the `ξξ̄` coefficient `H₁₁`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum H11Source {
    /// `B(φ, φ̄)`.
    #[default]
    Conjugate,
    /// `B(φ, φ)`.
    Plain,
}

impl H11Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            H11Source::Conjugate => "conjugate",
            H11Source::Plain => "plain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResonanceClass {
    Nonresonant {
        /// `ω_T / ω`, absent for autonomous models.
        ratio: Option<f64>,
    },
    Resonant {
        r: i64,
        s: i64,
        strength: Strength,
        error: f64,
    },
}

impl ResonanceClass {
    pub fn is_strong(&self) -> bool {
        matches!(
            self,
            ResonanceClass::Resonant {
                strength: Strength::Strong,
                ..
            }
        )
    }
}

/// Classify `ω_T / ω` as `r/s` (denominator ≤ `max_denominator`, tolerance
/// [`RATIONAL_TOL`]) or nonresonant. Strong when `r ≤ 3`.
pub fn classify_resonance(omega: f64, omega_t: f64, max_denominator: i64) -> ResonanceClass {
    if omega_t == 0.0 || omega == 0.0 {
        return ResonanceClass::Nonresonant { ratio: None };
    }
    let ratio = omega_t / omega.abs();
    let q = rational_approx(ratio, max_denominator);
    if q.error < RATIONAL_TOL * ratio.max(1.0) && q.r > 0 {
        ResonanceClass::Resonant {
            r: q.r,
            s: q.s,
            strength: if q.r <= 3 { Strength::Strong } else { Strength::Weak },
            error: q.error,
        }
    } else {
        ResonanceClass::Nonresonant { ratio: Some(ratio) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldReport {
    pub triple: EigenTriple,
    pub b: f64,
    /// `½⟨p, B(φ, φ)⟩_T` before taking the real part.
    pub b_raw: Complex64,
    /// `|Im b_raw|`.
    pub im_leakage: f64,
    /// `|⟨p, B(φ, φ) - 2b Δ'(0)q⟩_T|`.
    pub fsc_residual: f64,
    /// `b` vanishes (degenerate fold).
    pub cusp: bool,
}

/// Fold coefficient `b = ½ Re⟨p, B(φ, φ)⟩_T` at the simple root `λ = 0`.
pub fn fold_coefficient(model: &Model) -> Result<FoldReport> {
    let triple = eigen_triple(model, Complex64::new(0.0, 0.0))?;
    let b_form = model.bilinear().ok_or(Error::MissingStencil("bilinear"))?;
    let freq = model.freq();
    let h = model.max_delay();
    let phi = HistoryField::constant_profile(triple.lambda, triple.q.clone(), freq, h);
    let p = constant_row(&triple.p, freq);
    let g = eval_bilinear(b_form, &phi, &phi)?;
    let b_raw = fsc_residual(&p, &g)? * 0.5;
    let b = b_raw.re;
    let proj = constant_row(&(delta_prime(model, triple.lambda) * &triple.q), freq);
    let rhs = g.sub(&proj.scale(Complex64::new(2.0 * b, 0.0)))?;
    let fsc = fsc_residual(&p, &rhs)?.norm();
    let scale = 1.0 + g.max_abs();
    Ok(FoldReport {
        b,
        b_raw,
        im_leakage: b_raw.im.abs(),
        fsc_residual: fsc,
        cusp: b.abs() <= 1e-12 * scale,
        triple,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HopfOptions {
    pub h11_source: H11Source,
    /// Modes `|m| ≤ mode_cap` checked for resonance at `iω`, `2iω` and `0`.
    pub mode_cap: u32,
}

impl Default for HopfOptions {
    fn default() -> Self {
        Self {
            h11_source: H11Source::Conjugate,
            mode_cap: DEFAULT_MODE_CAP,
        }
    }
}

impl HopfOptions {
    pub fn with_source(h11_source: H11Source) -> Self {
        Self {
            h11_source,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopfReport {
    pub omega: f64,
    pub triple: EigenTriple,
    pub h20: HistoryField,
    pub h11: HistoryField,
    pub c: Complex64,
    pub l1: f64,
    pub resonance: ResonanceClass,
    /// Scans at `iω` (mode 0 excluded from the verdict), `2iω` and `0`.
    pub scans: [ResonanceScan; 3],
    pub options: HopfOptions,
    /// `|⟨p, rhs - 2c Δ'(iω)q⟩_T|`.
    pub fsc_residual: f64,
    /// Distance of `H₁₁`'s profile from a real-valued series.
    pub h11_real_defect: f64,
}

/// Hopf coefficient `c = ½⟨p, C(φ,φ,φ̄) + B(φ̄,H₂₀) + 2B(φ,H₁₁)⟩_T` and
/// `l₁ = Re c / |ω|` at the simple root `λ = iω`.
pub fn hopf_coefficients(model: &Model, omega: f64, options: HopfOptions) -> Result<HopfReport> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Invalid(format!("Hopf frequency {omega} must be nonzero")));
    }
    let i = Complex64::new(0.0, 1.0);
    let lambda = i * omega;
    let triple = eigen_triple(model, lambda)?;
    let b_form = model.bilinear().ok_or(Error::MissingStencil("bilinear"))?;

    let scans = [
        resonance_scan(model, lambda, options.mode_cap),
        resonance_scan(model, 2.0 * lambda, options.mode_cap),
        resonance_scan(model, Complex64::new(0.0, 0.0), options.mode_cap),
    ];
    for (k, scan) in scans.iter().enumerate() {
        let modes: Vec<i64> = scan.flagged.iter().copied().filter(|&m| k != 0 || m != 0).collect();
        if !modes.is_empty() {
            return Err(Error::ResonantMode { z: scan.z, modes });
        }
    }
    let resonance = classify_resonance(omega, model.freq(), MAX_DENOMINATOR);

    let freq = model.freq();
    let h = model.max_delay();
    let phi = HistoryField::constant_profile(lambda, triple.q.clone(), freq, h);
    let phi_bar = phi.conj();
    let p = constant_row(&triple.p, freq);

    let g20 = eval_bilinear(b_form, &phi, &phi)?;
    let g11 = match options.h11_source {
        H11Source::Conjugate => eval_bilinear(b_form, &phi, &phi_bar)?,
        H11Source::Plain => g20.clone(),
    };
    let h20 = HistoryField::new(2.0 * lambda, solve_characteristic(model, 2.0 * lambda, &g20)?, h);
    let zero = Complex64::new(0.0, 0.0);
    let h11 = HistoryField::new(zero, solve_characteristic(model, zero, &g11)?, h);

    let mut rhs = eval_bilinear(b_form, &phi_bar, &h20)?.add(&eval_bilinear(b_form, &phi, &h11)?.scale(2.0.into()))?;
    if let Some(c_form) = model.trilinear() {
        rhs = rhs.add(&eval_trilinear(c_form, &phi, &phi, &phi_bar)?)?;
    }
    let c = fsc_residual(&p, &rhs)? * 0.5;
    let l1 = c.re / omega.abs();

    let proj = constant_row(&(delta_prime(model, lambda) * &triple.q), freq);
    let fsc = fsc_residual(&p, &rhs.sub(&proj.scale(2.0 * c))?)?.norm();
    let h11_real_defect = h11.profile.real_defect();

    Ok(HopfReport {
        omega,
        triple,
        h20,
        h11,
        c,
        l1,
        resonance,
        scans,
        options,
        fsc_residual: fsc,
        h11_real_defect,
    })
}

/// Value of a constant-coefficient stencil on exponential arguments
/// `θ ↦ e^{z_k θ} v_k`.
fn eval_constant_stencil(stencil: &MultilinearStencil, args: &[(Complex64, &CVec)]) -> Result<CVec> {
    let perms = permutations(stencil.order());
    let mut out = CVec::zeros(stencil.dim());
    for term in stencil.terms() {
        if !term.coeff.is_constant() {
            return Err(Error::Invalid("stencil has time-dependent coefficients".into()));
        }
        let g = term.coeff.coeff(0);
        let mut avg = Complex64::new(0.0, 0.0);
        for p in &perms {
            let mut prod = Complex64::new(1.0, 0.0);
            for (k, &j) in p.iter().enumerate() {
                let slot = term.slots[j];
                let (z, v) = args[k];
                prod *= (-z * slot.delay).exp() * v[slot.component];
            }
            avg += prod;
        }
        out += g * (avg / perms.len() as f64);
    }
    Ok(out)
}

/// Autonomous Hopf coefficient with constant `H₂₀`, `H₁₁` computed directly
/// from constant matrices (no series machinery). Valid only when every
/// stencil coefficient is constant.
pub fn hopf_autonomous_direct(model: &Model, omega: f64, source: H11Source) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let lambda = i * omega;
    let t = eigen_triple(model, lambda)?;
    let b = model.bilinear().ok_or(Error::MissingStencil("bilinear"))?;
    let q = &t.q;
    let qb: CVec = q.map(|x| x.conj());
    let g20 = eval_constant_stencil(b, &[(lambda, q), (lambda, q)])?;
    let g11 = match source {
        H11Source::Conjugate => eval_constant_stencil(b, &[(lambda, q), (lambda.conj(), &qb)])?,
        H11Source::Plain => g20.clone(),
    };
    let solve = |z: Complex64, f: &CVec| -> Result<CVec> {
        delta(model, z)
            .lu()
            .solve(f)
            .ok_or(Error::ResonantMode { z, modes: vec![0] })
    };
    let h20 = solve(2.0 * lambda, &g20)?;
    let h11 = solve(Complex64::new(0.0, 0.0), &g11)?;
    let mut rhs = eval_constant_stencil(b, &[(lambda.conj(), &qb), (2.0 * lambda, &h20)])?
        + eval_constant_stencil(b, &[(lambda, q), (Complex64::new(0.0, 0.0), &h11)])? * Complex64::new(2.0, 0.0);
    if let Some(c) = model.trilinear() {
        rhs += eval_constant_stencil(c, &[(lambda, q), (lambda, q), (lambda.conj(), &qb)])?;
    }
    Ok(t.p.iter().zip(rhs.iter()).map(|(a, b)| a * b).sum::<Complex64>() * 0.5)
}

/// Autonomous fold coefficient `½ p B(q, q)` with constant matrices.
pub fn fold_autonomous_direct(model: &Model) -> Result<f64> {
    let t = eigen_triple(model, Complex64::new(0.0, 0.0))?;
    let b = model.bilinear().ok_or(Error::MissingStencil("bilinear"))?;
    let z = Complex64::new(0.0, 0.0);
    let g = eval_constant_stencil(b, &[(z, &t.q), (z, &t.q)])?;
    Ok((t.p.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<Complex64>() * 0.5).re)
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cvec_json(v: &DVector<Complex64>) -> Value {
    Value::Array(v.iter().map(|z| cjson(*z)).collect())
}

fn series_json(s: &FourierSeries) -> Value {
    Value::Array(
        s.modes()
            .map(|(m, v)| json!({ "m": m, "coeff": cvec_json(v) }))
            .collect(),
    )
}

fn field_json(f: &HistoryField) -> Value {
    json!({ "z": cjson(f.z), "profile": series_json(&f.profile) })
}

pub fn triple_json(t: &EigenTriple) -> Value {
    json!({
        "lambda": cjson(t.lambda),
        "q": cvec_json(&t.q),
        "p": cvec_json(&t.p),
        "right_residual": t.right_residual,
        "left_residual": t.left_residual,
    })
}

fn scan_json(s: &ResonanceScan) -> Value {
    let min = s.min_margin().map(|g| json!({ "m": g.m, "sigma_min": g.sigma_min, "threshold": g.threshold }));
    json!({
        "z": cjson(s.z),
        "mode_cap": s.mode_cap,
        "flagged": s.flagged,
        "min_margin": min,
        "rational": s.rational,
    })
}

impl FoldReport {
    pub fn to_json(&self) -> Value {
        json!({
            "b": self.b,
            "b_raw": cjson(self.b_raw),
            "im_leakage": self.im_leakage,
            "fsc_residual": self.fsc_residual,
            "cusp": self.cusp,
            "triple": triple_json(&self.triple),
            "tolerances": tolerances_json(),
        })
    }
}

impl HopfReport {
    pub fn to_json(&self) -> Value {
        json!({
            "omega": self.omega,
            "c": cjson(self.c),
            "l1": self.l1,
            "h11_source": self.options.h11_source.as_str(),
            "mode_cap": self.options.mode_cap,
            "resonance": self.resonance,
            "scans": {
                "i_omega": scan_json(&self.scans[0]),
                "two_i_omega": scan_json(&self.scans[1]),
                "zero": scan_json(&self.scans[2]),
            },
            "h20": field_json(&self.h20),
            "h11": field_json(&self.h11),
            "h11_real_defect": self.h11_real_defect,
            "fsc_residual": self.fsc_residual,
            "triple": triple_json(&self.triple),
            "tolerances": tolerances_json(),
        })
    }
}

fn tolerances_json() -> Value {
    json!({
        "root_sigma_rtol": crate::charmatrix::ROOT_SIGMA_RTOL,
        "simple_sigma_rtol": crate::charmatrix::SIMPLE_SIGMA_RTOL,
        "simple_pairing_tol": crate::charmatrix::SIMPLE_PAIRING_TOL,
        "resonance_rtol": 1e-8,
        "rational_tol": RATIONAL_TOL,
        "max_denominator": MAX_DENOMINATOR,
    })
}
