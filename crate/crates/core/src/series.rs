//! Finitely supported Fourier series of periodic vector-valued functions.
//!
//! A series stores `c_m ∈ ℂ^d` for finitely many integer modes `m` and
//! represents `f(t) = Σ_m c_m e^{i m ω_T t}`. A base frequency of zero marks a
//! time-independent series, which may only carry mode 0 and combines with any
//! periodic series.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVec = DVector<Complex64>;

const FREQ_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    freq: f64,
    dim: usize,
    modes: BTreeMap<i64, CVec>,
}

impl FourierSeries {
    /// The zero series.
    pub fn zero(dim: usize, freq: f64) -> Self {
        assert!(freq >= 0.0 && freq.is_finite(), "base frequency must be finite and >= 0");
        Self {
            freq,
            dim,
            modes: BTreeMap::new(),
        }
    }

    /// Time-independent series holding `v` as mode 0.
    pub fn constant(v: CVec) -> Self {
        let mut s = Self::zero(v.len(), 0.0);
        s.modes.insert(0, v);
        s
    }

    pub fn scalar_constant(c: Complex64) -> Self {
        Self::constant(CVec::from_element(1, c))
    }

    /// Build from `(mode, coefficient)` pairs; repeated modes are summed.
    pub fn from_modes<I>(dim: usize, freq: f64, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, CVec)>,
    {
        let mut s = Self::zero(dim, freq);
        for (m, c) in modes {
            s.add_to_mode(m, &c)?;
        }
        Ok(s)
    }

    /// Scalar series from `(mode, coefficient)` pairs.
    pub fn scalar<I>(freq: f64, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        Self::from_modes(
            1,
            freq,
            modes.into_iter().map(|(m, c)| (m, CVec::from_element(1, c))),
        )
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn period(&self) -> Option<f64> {
        (self.freq > 0.0).then(|| 2.0 * PI / self.freq)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.modes.values().all(|c| c.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    /// True when only mode 0 is present.
    pub fn is_constant(&self) -> bool {
        self.modes.keys().all(|&m| m == 0)
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &CVec)> {
        self.modes.iter().map(|(m, c)| (*m, c))
    }

    pub fn mode(&self, m: i64) -> Option<&CVec> {
        self.modes.get(&m)
    }

    /// Coefficient of mode `m`, zero when absent.
    pub fn coeff(&self, m: i64) -> CVec {
        self.modes
            .get(&m)
            .cloned()
            .unwrap_or_else(|| CVec::zeros(self.dim))
    }

    /// Largest |m| in the support.
    pub fn max_mode(&self) -> i64 {
        self.modes.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<i64> {
        self.modes.keys().copied().collect()
    }

    pub fn add_to_mode(&mut self, m: i64, c: &CVec) -> Result<()> {
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: c.len(),
            });
        }
        if m != 0 && self.freq == 0.0 {
            return Err(Error::Invalid(format!(
                "time-independent series cannot carry mode {m}"
            )));
        }
        match self.modes.get_mut(&m) {
            Some(existing) => *existing += c,
            None => {
                self.modes.insert(m, c.clone());
            }
        }
        Ok(())
    }

    /// Relabel the base frequency. Only valid for constant series or an
    /// identical frequency.
    pub fn with_freq(mut self, freq: f64) -> Result<Self> {
        if self.is_constant() || freq_eq(self.freq, freq) {
            self.freq = freq;
            Ok(self)
        } else {
            Err(Error::PeriodMismatch(self.freq, freq))
        }
    }

    /// Evaluate `f(t)`.
    pub fn eval(&self, t: f64) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for (m, c) in &self.modes {
            let phase = Complex64::from_polar(1.0, *m as f64 * self.freq * t);
            out += c * phase;
        }
        out
    }

    /// Series of `conj(f(t))`: mode `m` becomes `conj(c_{-m})`.
    pub fn conj(&self) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(m, c)| (-m, c.map(|z| z.conj())))
            .collect();
        Self {
            freq: self.freq,
            dim: self.dim,
            modes,
        }
    }

    /// Largest violation of `c_{-m} = conj(c_m)`.
    pub fn real_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (m, c) in &self.modes {
            let partner = self.coeff(-m);
            for (a, b) in c.iter().zip(partner.iter()) {
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.real_defect() <= tol
    }

    /// Check the real flag, reporting the first offending mode.
    pub fn check_real(&self, tol: f64) -> Result<()> {
        for (m, c) in &self.modes {
            let partner = self.coeff(-m);
            let bad = c
                .iter()
                .zip(partner.iter())
                .any(|(a, b)| (a - b.conj()).norm() > tol);
            if bad {
                return Err(Error::RealFlagViolation { mode: *m });
            }
        }
        Ok(())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let modes = self.modes.iter().map(|(m, c)| (*m, c * k)).collect();
        Self {
            freq: self.freq,
            dim: self.dim,
            modes,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let freq = self.joint_freq(other)?;
        let mut out = self.clone();
        out.freq = freq;
        for (m, c) in &other.modes {
            out.add_to_mode(*m, c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Scalar series of component `i`.
    pub fn component(&self, i: usize) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(m, c)| (*m, CVec::from_element(1, c[i])))
            .collect();
        Self {
            freq: self.freq,
            dim: 1,
            modes,
        }
    }

    /// Maximum modulus over all coefficients.
    pub fn max_abs(&self) -> f64 {
        self.modes
            .values()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// ℓ² norm of the coefficient sequence (the L² mean norm by Parseval).
    pub fn norm(&self) -> f64 {
        self.modes
            .values()
            .map(|c| c.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    fn joint_freq(&self, other: &Self) -> Result<f64> {
        common_freq(self.freq, self.is_constant(), other.freq, other.is_constant())
    }
}

fn freq_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= FREQ_RTOL * a.abs().max(b.abs())
}

fn common_freq(a: f64, a_const: bool, b: f64, b_const: bool) -> Result<f64> {
    if freq_eq(a, b) {
        Ok(a)
    } else if a_const {
        Ok(b)
    } else if b_const {
        Ok(a)
    } else {
        Err(Error::PeriodMismatch(a, b))
    }
}

/// Product of a scalar series `a` with a vector series `b` (coefficient
/// convolution).
pub fn fs_multiply(a: &FourierSeries, b: &FourierSeries) -> Result<FourierSeries> {
    if a.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: a.dim,
        });
    }
    let freq = a.joint_freq(b)?;
    let mut out = FourierSeries::zero(b.dim, freq);
    for (ma, ca) in &a.modes {
        let s = ca[0];
        if s == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (mb, cb) in &b.modes {
            out.add_to_mode(ma + mb, &(cb * s))?;
        }
    }
    Ok(out)
}

/// Mean of `p(t) f(t)` over one period: `Σ_m p_m · f_{-m}` (bilinear, no
/// conjugation).
pub fn fs_pairing(p: &FourierSeries, f: &FourierSeries) -> Result<Complex64> {
    p.check_dim(f)?;
    p.joint_freq(f)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, pm) in &p.modes {
        if let Some(fm) = f.modes.get(&-m) {
            acc += pm.iter().zip(fm.iter()).map(|(a, b)| a * b).sum::<Complex64>();
        }
    }
    Ok(acc)
}
