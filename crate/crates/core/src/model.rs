//! Model data: discrete-delay linear part, periodic multilinear stencils and
//! the JSON model document.
//!
//! Stencils store the full multilinear forms `B = D²F(t, x̄)` and
//! `C = D³F(t, x̄)`; the Taylor factors ½ and ⅙ are applied by whoever
//! evaluates the right-hand side.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{CVec, FourierSeries};

/// Tolerance for the `c_{-m} = conj(c_m)` check on real-flagged input.
pub const REAL_FLAG_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearPart {
    delays: Vec<f64>,
    matrices: Vec<DMatrix<f64>>,
}

impl LinearPart {
    /// Point-mass kernel `Σ_j A_j x(t - τ_j)`. Terms are sorted by delay;
    /// duplicate or negative delays are rejected.
    pub fn new(n: usize, terms: Vec<(f64, DMatrix<f64>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("linear part needs at least one delay".into()));
        }
        let mut terms = terms;
        for (tau, a) in &terms {
            if !tau.is_finite() || *tau < 0.0 {
                return Err(Error::Invalid(format!("delay {tau} must be finite and >= 0")));
            }
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: if a.nrows() != n { a.nrows() } else { a.ncols() },
                });
            }
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("delays must be distinct".into()));
        }
        let (delays, matrices) = terms.into_iter().unzip();
        Ok(Self { delays, matrices })
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &DMatrix<f64>)> {
        self.delays.iter().copied().zip(self.matrices.iter())
    }

    pub fn max_delay(&self) -> f64 {
        *self.delays.last().expect("non-empty by construction")
    }
}

/// One argument slot of a multilinear stencil: `ψ(-delay)[component]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub delay: f64,
    pub component: usize,
}

impl Slot {
    pub fn new(delay: f64, component: usize) -> Self {
        Self { delay, component }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.delay
            .total_cmp(&other.delay)
            .then(self.component.cmp(&other.component))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilTerm {
    /// `ℂ^n`-valued periodic coefficient `g(t)`.
    pub coeff: FourierSeries,
    pub slots: Vec<Slot>,
}

/// Symmetric multilinear form
/// `B(t; ψ_1, …, ψ_r) = Σ_terms g(t) · avg_σ Π_k ψ_k(-τ_{σ(k)})[c_{σ(k)}]`.
///
/// Terms are kept in canonical form: slots sorted, one term per slot
/// multiset. Evaluation averages over all assignments of arguments to slots,
/// so the form is symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearStencil {
    order: usize,
    dim: usize,
    terms: Vec<StencilTerm>,
}

impl MultilinearStencil {
    /// Build a stencil from raw terms `g(t) Π_k ψ_k(-τ_k)[c_k]`; the result is
    /// the symmetrization of their sum.
    pub fn new(order: usize, dim: usize, terms: Vec<StencilTerm>) -> Result<Self> {
        if !(2..=3).contains(&order) {
            return Err(Error::Invalid(format!("stencil order {order} not in {{2, 3}}")));
        }
        for t in &terms {
            if t.slots.len() != order {
                return Err(Error::OrderMismatch {
                    expected: order,
                    found: t.slots.len(),
                });
            }
            if t.coeff.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.coeff.dim(),
                });
            }
            if let Some(s) = t.slots.iter().find(|s| s.component >= dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.component + 1,
                });
            }
        }
        let raw = Self { order, dim, terms };
        raw.symmetrize()
    }

    pub fn empty(order: usize, dim: usize) -> Self {
        Self {
            order,
            dim,
            terms: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[StencilTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_zero())
    }

    /// Canonical symmetric form: sort each term's slots and merge terms that
    /// share a slot multiset. Idempotent.
    pub fn symmetrize(&self) -> Result<Self> {
        let mut merged: Vec<StencilTerm> = Vec::new();
        for t in &self.terms {
            let mut slots = t.slots.clone();
            slots.sort_by(Slot::cmp_key);
            match merged
                .iter_mut()
                .find(|m| m.slots.iter().zip(&slots).all(|(a, b)| a.cmp_key(b).is_eq()))
            {
                Some(m) => m.coeff = m.coeff.add(&t.coeff)?,
                None => merged.push(StencilTerm {
                    coeff: t.coeff.clone(),
                    slots,
                }),
            }
        }
        merged.sort_by(|a, b| {
            a.slots
                .iter()
                .zip(&b.slots)
                .map(|(x, y)| x.cmp_key(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
        Ok(Self {
            order: self.order,
            dim: self.dim,
            terms: merged,
        })
    }

    pub fn max_delay(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.slots.iter().map(|s| s.delay))
            .fold(0.0, f64::max)
    }

    pub fn delays(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| t.slots.iter().map(|s| s.delay))
            .collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }

    /// Largest |m| over all coefficient series.
    pub fn max_mode(&self) -> i64 {
        self.terms.iter().map(|t| t.coeff.max_mode()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| StencilTerm {
                coeff: t.coeff.scale(Complex64::new(k, 0.0)),
                slots: t.slots.clone(),
            })
            .collect();
        Self {
            order: self.order,
            dim: self.dim,
            terms,
        }
    }

    /// Pointwise evaluation at time `t` with real arguments given as
    /// functions of the delay: `args[k](τ)[c] = ψ_k(-τ)[c]`.
    pub fn eval_real_at(&self, t: f64, args: &[&dyn Fn(f64, usize) -> f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for term in &self.terms {
            let g = term.coeff.eval(t);
            let prod = permutation_average(&term.slots, |k, slot| args[k](slot.delay, slot.component));
            for (o, gi) in out.iter_mut().zip(g.iter()) {
                *o += gi.re * prod;
            }
        }
        out
    }
}

/// Average over all assignments of arguments to slots of
/// `Π_k value(k, slot_{σ(k)})`.
pub(crate) fn permutation_average<T, F>(slots: &[Slot], mut value: F) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<f64, Output = T>,
    F: FnMut(usize, &Slot) -> T,
{
    let perms = permutations(slots.len());
    let mut acc: Option<T> = None;
    for p in &perms {
        let mut prod: Option<T> = None;
        for (k, &j) in p.iter().enumerate() {
            let v = value(k, &slots[j]);
            prod = Some(match prod {
                Some(x) => x * v,
                None => v,
            });
        }
        let prod = prod.expect("order >= 1");
        acc = Some(match acc {
            Some(a) => a + prod,
            None => prod,
        });
    }
    acc.expect("at least one permutation") / perms.len() as f64
}

pub(crate) fn permutations(r: usize) -> Vec<Vec<usize>> {
    match r {
        0 => vec![vec![]],
        _ => {
            let mut out = Vec::new();
            for p in permutations(r - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, r - 1);
                    out.push(q);
                }
            }
            out.sort();
            out
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Forcing {
    Autonomous,
    Periodic { period: f64 },
}

impl Forcing {
    /// Base frequency `ω_T = 2π/T`, zero for autonomous models.
    pub fn freq(&self) -> f64 {
        match self {
            Forcing::Autonomous => 0.0,
            Forcing::Periodic { period } => 2.0 * PI / period,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    n: usize,
    forcing: Forcing,
    linear: LinearPart,
    bilinear: Option<MultilinearStencil>,
    trilinear: Option<MultilinearStencil>,
    equilibrium: Vec<f64>,
}

impl Model {
    pub fn new(
        n: usize,
        forcing: Forcing,
        linear: LinearPart,
        bilinear: Option<MultilinearStencil>,
        trilinear: Option<MultilinearStencil>,
        equilibrium: Option<Vec<f64>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("state dimension must be positive".into()));
        }
        if let Forcing::Periodic { period } = forcing {
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::Invalid(format!("forcing period {period} must be > 0")));
            }
        }
        let equilibrium = equilibrium.unwrap_or_else(|| vec![0.0; n]);
        if equilibrium.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: equilibrium.len(),
            });
        }
        if let Some(a) = linear.matrices().first() {
            if a.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.nrows(),
                });
            }
        }
        let h = linear.max_delay();
        let freq = forcing.freq();
        let check = |s: Option<MultilinearStencil>, order: usize| -> Result<Option<MultilinearStencil>> {
            let Some(s) = s else { return Ok(None) };
            if s.order() != order {
                return Err(Error::OrderMismatch {
                    expected: order,
                    found: s.order(),
                });
            }
            if s.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.dim(),
                });
            }
            let mut terms = Vec::with_capacity(s.terms().len());
            for t in s.terms() {
                for slot in &t.slots {
                    if !(slot.delay >= 0.0 && slot.delay <= h) {
                        return Err(Error::DelayOutOfRange {
                            delay: slot.delay,
                            max_delay: h,
                        });
                    }
                }
                if forcing == Forcing::Autonomous && !t.coeff.is_constant() {
                    return Err(Error::Invalid(
                        "autonomous models carry only mode-0 coefficients".into(),
                    ));
                }
                let coeff = t.coeff.clone().with_freq(freq)?;
                terms.push(StencilTerm {
                    coeff,
                    slots: t.slots.clone(),
                });
            }
            Ok(Some(MultilinearStencil::new(order, n, terms)?))
        };
        let bilinear = check(bilinear, 2)?;
        let trilinear = check(trilinear, 3)?;
        Ok(Self {
            n,
            forcing,
            linear,
            bilinear,
            trilinear,
            equilibrium,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forcing(&self) -> Forcing {
        self.forcing
    }

    /// `ω_T`, zero for autonomous models.
    pub fn freq(&self) -> f64 {
        self.forcing.freq()
    }

    pub fn linear(&self) -> &LinearPart {
        &self.linear
    }

    pub fn bilinear(&self) -> Option<&MultilinearStencil> {
        self.bilinear.as_ref()
    }

    pub fn trilinear(&self) -> Option<&MultilinearStencil> {
        self.trilinear.as_ref()
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.equilibrium
    }

    pub fn max_delay(&self) -> f64 {
        self.linear.max_delay()
    }

    /// Same model with every linear matrix replaced.
    pub fn with_linear(&self, linear: LinearPart) -> Result<Self> {
        Self::new(
            self.n,
            self.forcing,
            linear,
            self.bilinear.clone(),
            self.trilinear.clone(),
            Some(self.equilibrium.clone()),
        )
    }

    pub fn with_bilinear(&self, b: Option<MultilinearStencil>) -> Result<Self> {
        Self::new(
            self.n,
            self.forcing,
            self.linear.clone(),
            b,
            self.trilinear.clone(),
            Some(self.equilibrium.clone()),
        )
    }

    /// True when no stencil coefficient depends on time.
    pub fn has_constant_coefficients(&self) -> bool {
        [self.bilinear.as_ref(), self.trilinear.as_ref()]
            .into_iter()
            .flatten()
            .all(|s| s.terms().iter().all(|t| t.coeff.is_constant()))
    }
}

// ---------------------------------------------------------------------------
// Model document

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ForcingDoc {
    Autonomous,
    Periodic {
        #[serde(rename = "T")]
        period: f64,
    },
}

/// `[m, re, im]`
type ModeEntry = (i64, f64, f64);

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    slots: Vec<Slot>,
    /// One mode list per state component.
    coeff: Vec<Vec<ModeEntry>>,
    #[serde(default = "default_true")]
    real: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    n: usize,
    forcing: ForcingDoc,
    delays: Vec<f64>,
    matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    bilinear: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    trilinear: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equilibrium: Option<Vec<f64>>,
}

fn series_from_doc(n: usize, freq: f64, coeff: &[Vec<ModeEntry>]) -> Result<FourierSeries> {
    if coeff.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: coeff.len(),
        });
    }
    let mut s = FourierSeries::zero(n, freq);
    for (i, modes) in coeff.iter().enumerate() {
        for &(m, re, im) in modes {
            let mut v = CVec::zeros(n);
            v[i] = Complex64::new(re, im);
            s.add_to_mode(m, &v)?;
        }
    }
    Ok(s)
}

fn series_to_doc(s: &FourierSeries) -> Vec<Vec<ModeEntry>> {
    (0..s.dim())
        .map(|i| {
            s.modes()
                .filter(|(_, c)| c[i] != Complex64::new(0.0, 0.0))
                .map(|(m, c)| (m, c[i].re, c[i].im))
                .collect()
        })
        .collect()
}

fn stencil_from_doc(order: usize, n: usize, freq: f64, terms: &[TermDoc]) -> Result<Option<MultilinearStencil>> {
    if terms.is_empty() {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let coeff = series_from_doc(n, freq, &t.coeff)?;
        if t.real {
            coeff.check_real(REAL_FLAG_TOL)?;
        }
        out.push(StencilTerm {
            coeff,
            slots: t.slots.clone(),
        });
    }
    MultilinearStencil::new(order, n, out).map(Some)
}

fn stencil_to_doc(s: Option<&MultilinearStencil>) -> Vec<TermDoc> {
    s.map(|s| {
        s.terms()
            .iter()
            .map(|t| TermDoc {
                slots: t.slots.clone(),
                coeff: series_to_doc(&t.coeff),
                real: t.coeff.is_real(REAL_FLAG_TOL),
            })
            .collect()
    })
    .unwrap_or_default()
}

/// Parse and validate a JSON model document.
pub fn parse_model(text: &str) -> Result<Model> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = doc.n;
    let forcing = match doc.forcing {
        ForcingDoc::Autonomous => Forcing::Autonomous,
        ForcingDoc::Periodic { period } => Forcing::Periodic { period },
    };
    if let Forcing::Periodic { period } = forcing {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Invalid(format!("forcing period {period} must be > 0")));
        }
    }
    if doc.delays.len() != doc.matrices.len() {
        return Err(Error::Parse(format!(
            "{} delays but {} matrices",
            doc.delays.len(),
            doc.matrices.len()
        )));
    }
    let mut terms = Vec::with_capacity(doc.delays.len());
    for (tau, rows) in doc.delays.iter().zip(&doc.matrices) {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        terms.push((*tau, a));
    }
    let linear = LinearPart::new(n, terms)?;
    let freq = forcing.freq();
    let bilinear = stencil_from_doc(2, n, freq, &doc.bilinear)?;
    let trilinear = stencil_from_doc(3, n, freq, &doc.trilinear)?;
    Model::new(n, forcing, linear, bilinear, trilinear, doc.equilibrium)
}

/// Serialize to the JSON model document (pretty-printed).
pub fn serialize_model(model: &Model) -> String {
    let doc = ModelDoc {
        n: model.n,
        forcing: match model.forcing {
            Forcing::Autonomous => ForcingDoc::Autonomous,
            Forcing::Periodic { period } => ForcingDoc::Periodic { period },
        },
        delays: model.linear.delays().to_vec(),
        matrices: model
            .linear
            .matrices()
            .iter()
            .map(|a| (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect())
            .collect(),
        bilinear: stencil_to_doc(model.bilinear()),
        trilinear: stencil_to_doc(model.trilinear()),
        equilibrium: model.equilibrium.iter().any(|x| *x != 0.0).then(|| model.equilibrium.clone()),
    };
    serde_json::to_string_pretty(&doc).expect("model document is always serializable")
}

/// Symmetrize a stencil (free-function form of [`MultilinearStencil::symmetrize`]).
pub fn symmetrize(stencil: &MultilinearStencil) -> Result<MultilinearStencil> {
    stencil.symmetrize()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR_SCALAR: &str = r#"{
        "n": 1,
        "forcing": {"type": "autonomous"},
        "delays": [1.0],
        "matrices": [[[-0.7]]]
    }"#;

    #[test]
    fn parses_linear_scalar_model() {
        let m = parse_model(LINEAR_SCALAR).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.linear().delays(), &[1.0]);
        assert_eq!(m.linear().matrices()[0][(0, 0)], -0.7);
        assert!(m.bilinear().is_none());
        assert_eq!(m.freq(), 0.0);
    }

    #[test]
    fn rejects_stencil_delay_beyond_max_delay() {
        let doc = r#"{
            "n": 1,
            "forcing": {"type": "autonomous"},
            "delays": [1.0],
            "matrices": [[[-0.7]]],
            "bilinear": [{"slots": [{"delay": 0.0, "component": 0}, {"delay": 2.0, "component": 0}],
                          "coeff": [[[0, 1.0, 0.0]]]}]
        }"#;
        let err = parse_model(doc).unwrap_err();
        assert!(matches!(err, Error::DelayOutOfRange { delay, .. } if delay == 2.0));
        assert!(err.to_string().contains("delay out of range"));
    }

    #[test]
    fn rejects_real_flag_violation() {
        let doc = r#"{
            "n": 1,
            "forcing": {"type": "periodic", "T": 6.283185307179586},
            "delays": [0.0, 1.0],
            "matrices": [[[0.0]], [[-1.0]]],
            "bilinear": [{"slots": [{"delay": 0.0, "component": 0}, {"delay": 1.0, "component": 0}],
                          "coeff": [[[1, 0.5, 0.0], [-1, 0.4, 0.0]]]}]
        }"#;
        assert!(matches!(parse_model(doc), Err(Error::RealFlagViolation { .. })));
    }

    #[test]
    fn rejects_dimension_mismatch_and_garbage() {
        let doc = r#"{"n": 2, "forcing": {"type": "autonomous"}, "delays": [1.0], "matrices": [[[1.0]]]}"#;
        assert!(matches!(parse_model(doc), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(parse_model("{not json"), Err(Error::Parse(_))));
        let dup = r#"{"n": 1, "forcing": {"type": "autonomous"}, "delays": [1.0, 1.0], "matrices": [[[1.0]], [[2.0]]]}"#;
        assert!(parse_model(dup).is_err());
    }

    #[test]
    fn rejects_periodic_coefficients_in_autonomous_model() {
        let doc = r#"{
            "n": 1,
            "forcing": {"type": "autonomous"},
            "delays": [1.0],
            "matrices": [[[-1.0]]],
            "bilinear": [{"slots": [{"delay": 0.0, "component": 0}, {"delay": 1.0, "component": 0}],
                          "coeff": [[[1, 0.5, 0.0], [-1, 0.5, 0.0]]]}]
        }"#;
        assert!(parse_model(doc).is_err());
    }

    #[test]
    fn symmetrize_averages_two_slot_permutations() {
        let g = FourierSeries::scalar_constant(Complex64::new(3.0, 0.0));
        let raw = MultilinearStencil {
            order: 2,
            dim: 1,
            terms: vec![StencilTerm {
                coeff: g.clone(),
                slots: vec![Slot::new(1.0, 0), Slot::new(0.0, 0)],
            }],
        };
        let s = raw.symmetrize().unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].slots, vec![Slot::new(0.0, 0), Slot::new(1.0, 0)]);
        // ψ1 = (ψ(0) = 2, ψ(-1) = 5), ψ2 = (7, 11): ½·3·(2·11 + 5·7) = 85.5
        let u = |tau: f64, _c: usize| if tau == 0.0 { 2.0 } else { 5.0 };
        let w = |tau: f64, _c: usize| if tau == 0.0 { 7.0 } else { 11.0 };
        let val = s.eval_real_at(0.0, &[&u, &w]);
        assert_eq!(val[0], 85.5);
        assert_eq!(s.eval_real_at(0.0, &[&w, &u])[0], 85.5);
        assert_eq!(s.symmetrize().unwrap(), s);
    }

    #[test]
    fn permutations_of_three() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let doc = r#"{
            "n": 2,
            "forcing": {"type": "periodic", "T": 2.718281828459045},
            "delays": [0.0, 0.3, 1.1],
            "matrices": [[[0.1, 0.2], [0.3, 0.4]], [[-1.0, 0.0], [0.0, 0.5]], [[0.123456789012345, 1e-7], [2.0, -3.0]]],
            "bilinear": [{"slots": [{"delay": 0.3, "component": 1}, {"delay": 0.0, "component": 0}],
                          "coeff": [[[1, 0.1, 0.2], [-1, 0.1, -0.2]], [[0, 0.7, 0.0]]]}],
            "trilinear": [{"slots": [{"delay": 1.1, "component": 0}, {"delay": 0.0, "component": 1}, {"delay": 0.0, "component": 1}],
                           "coeff": [[[0, -0.33, 0.0]], [[2, 0.5, 0.5], [-2, 0.5, -0.5]]]}],
            "equilibrium": [0.25, -1.5]
        }"#;
        let m = parse_model(doc).unwrap();
        let text = serialize_model(&m);
        let m2 = parse_model(&text).unwrap();
        assert_eq!(m, m2);
        assert_eq!(serialize_model(&m2), text);
    }
}
