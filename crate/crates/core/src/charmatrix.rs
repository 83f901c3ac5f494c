//! Characteristic matrix `Δ(z) = zI - Σ_j A_j e^{-zτ_j}`, its roots and
//! normalized eigen-triples.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;

pub type CMat = DMatrix<Complex64>;

/// σ_min threshold for accepting a root, relative to [`char_scale`].
pub const ROOT_SIGMA_RTOL: f64 = 1e-8;
/// Lower bound on the second-smallest singular value for a simple root.
pub const SIMPLE_SIGMA_RTOL: f64 = 1e-4;
/// Lower bound on `|pΔ'(λ)q|` (unit p, q) before rescaling.
pub const SIMPLE_PAIRING_TOL: f64 = 1e-8;

/// `Δ(z)`.
pub fn delta(model: &Model, z: Complex64) -> CMat {
    let n = model.n();
    let mut d = CMat::identity(n, n) * z;
    for (tau, a) in model.linear().terms() {
        let e = (-z * tau).exp();
        d -= a.map(|x| Complex64::new(x, 0.0)) * e;
    }
    d
}

/// `Δ'(z) = I + Σ_j τ_j A_j e^{-zτ_j}`.
pub fn delta_prime(model: &Model, z: Complex64) -> CMat {
    let n = model.n();
    let mut d = CMat::identity(n, n);
    for (tau, a) in model.linear().terms() {
        if tau == 0.0 {
            continue;
        }
        let e = (-z * tau).exp() * tau;
        d += a.map(|x| Complex64::new(x, 0.0)) * e;
    }
    d
}

/// Natural magnitude of `Δ(z)`: `1 + |z| + Σ_j ‖A_j‖ |e^{-zτ_j}|`. Used as the
/// reference scale for relative thresholds, since `‖Δ(λ)‖` itself vanishes at
/// a root of a scalar model.
pub fn char_scale(model: &Model, z: Complex64) -> f64 {
    1.0 + z.norm()
        + model
            .linear()
            .terms()
            .map(|(tau, a)| a.norm() * (-z.re * tau).exp())
            .sum::<f64>()
}

pub fn det(m: &CMat) -> Complex64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    m.clone().lu().determinant()
}

/// `det Δ(z)`.
pub fn char_det(model: &Model, z: Complex64) -> Complex64 {
    det(&delta(model, z))
}

/// `d/dz det Δ(z)` by multilinearity in the columns.
pub fn char_det_prime(model: &Model, z: Complex64) -> Complex64 {
    let d = delta(model, z);
    let dp = delta_prime(model, z);
    if d.nrows() == 1 {
        return dp[(0, 0)];
    }
    (0..d.ncols())
        .map(|j| {
            let mut m = d.clone();
            m.set_column(j, &dp.column(j));
            det(&m)
        })
        .sum()
}

/// Axis-aligned rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
    }

    fn grow(&self, by: f64) -> Self {
        Self::new(self.re_min - by, self.re_max + by, self.im_min - by, self.im_max + by)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// `|det Δ(λ)|`.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RootList {
    pub roots: Vec<Root>,
    /// Argument-principle winding number of `det Δ` around the rectangle.
    pub winding: i64,
}

impl RootList {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// CSV rows `re,im,multiplicity,residual` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,multiplicity,residual\n");
        for r in &self.roots {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{},{:.6e}",
                r.value.re, r.value.im, r.multiplicity, r.residual
            );
        }
        s
    }
}

/// Winding number of `f` along the polyline through `points` (closed),
/// refining each segment until the phase increment is below π/4.
pub fn winding_number<F>(f: &F, points: &[Complex64]) -> Option<i64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let mut total = 0.0;
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        total += segment_phase(f, a, b, f(a), f(b), 0)?;
    }
    Some((total / (2.0 * PI)).round() as i64)
}

fn segment_phase<F>(f: &F, a: Complex64, b: Complex64, fa: Complex64, fb: Complex64, depth: u32) -> Option<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    if fa == Complex64::new(0.0, 0.0) || fb == Complex64::new(0.0, 0.0) || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let dphi = (fb / fa).arg();
    if dphi.abs() < PI / 4.0 || depth >= 40 {
        return if depth >= 40 { None } else { Some(dphi) };
    }
    let mid = (a + b) * 0.5;
    let fm = f(mid);
    Some(segment_phase(f, a, mid, fa, fm, depth + 1)? + segment_phase(f, mid, b, fm, fb, depth + 1)?)
}

fn boundary_points(rect: &Rect, per_side: usize) -> Vec<Complex64> {
    let c = rect.corners();
    let mut pts = Vec::with_capacity(4 * per_side);
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        for j in 0..per_side {
            pts.push(a + (b - a) * (j as f64 / per_side as f64));
        }
    }
    pts
}

fn circle_points(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / count as f64))
        .collect()
}

/// Newton iteration on `det Δ` from `z0`. Returns `None` when it fails to
/// converge or leaves `bounds`.
pub fn refine_root(model: &Model, z0: Complex64, bounds: Option<&Rect>) -> Option<Complex64> {
    let mut z = z0;
    let mut last_step = f64::INFINITY;
    for _ in 0..80 {
        let f = char_det(model, z);
        let fp = char_det_prime(model, z);
        if f == Complex64::new(0.0, 0.0) {
            return Some(z);
        }
        if fp == Complex64::new(0.0, 0.0) || !fp.is_finite() || !f.is_finite() {
            return None;
        }
        let step = f / fp;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if let Some(b) = bounds {
            if !b.contains(z) {
                return None;
            }
        }
        let s = step.norm();
        if s <= 4.0 * f64::EPSILON * (1.0 + z.norm()) || (s >= last_step && s < 1e-9 * (1.0 + z.norm())) {
            return Some(z);
        }
        last_step = s;
    }
    let scale = char_scale(model, z).powi(model.n() as i32);
    (char_det(model, z).norm() < 1e-8 * scale).then_some(z)
}

/// All roots of `det Δ` inside `rect` with multiplicities, cross-checked
/// against the argument-principle winding number of the boundary.
pub fn find_roots(model: &Model, rect: Rect, tol: f64) -> Result<RootList> {
    if rect.is_degenerate() {
        return Ok(RootList::default());
    }
    let f = |z: Complex64| char_det(model, z);
    let size = rect.width().max(rect.height());

    // Nudge the contour outward if it passes through a root.
    let mut contour = rect;
    let mut winding = None;
    for attempt in 0..6 {
        winding = winding_number(&f, &boundary_points(&contour, 64));
        if winding.is_some() {
            break;
        }
        contour = rect.grow(size * 1e-7 * 10f64.powi(attempt));
    }
    let winding = winding.ok_or_else(|| Error::Degenerate("cannot resolve winding on rectangle boundary".into()))?;

    let mut pitch = (size / 40.0).min(rect.width()).min(rect.height());
    let mut best = RootList::default();
    for _ in 0..5 {
        let roots = scan_roots(model, &contour, pitch, tol);
        let found = RootList { roots, winding };
        if found.total_multiplicity() as i64 == winding {
            return Ok(found);
        }
        best = found;
        pitch *= 0.5;
    }
    Err(Error::WindingMismatch {
        found: best.total_multiplicity(),
        winding,
        partial: best,
    })
}

fn scan_roots(model: &Model, rect: &Rect, pitch: f64, tol: f64) -> Vec<Root> {
    let nx = ((rect.width() / pitch).ceil() as usize).max(1) + 1;
    let ny = ((rect.height() / pitch).ceil() as usize).max(1) + 1;
    let search = rect.grow(0.5 * rect.width().max(rect.height()));
    let starts: Vec<Complex64> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                Complex64::new(
                    rect.re_min + rect.width() * i as f64 / (nx - 1) as f64,
                    rect.im_min + rect.height() * j as f64 / (ny - 1) as f64,
                )
            })
        })
        .collect();
    let candidates: Vec<Option<Complex64>> = starts
        .par_iter()
        .map(|&z0| refine_root(model, z0, Some(&search)))
        .collect();

    let dedup_radius = |z: Complex64| (1e3 * tol).max(1e-6) * (1.0 + z.norm());

    // Canonical representatives: real roots exactly real, complex roots in the
    // upper half plane whenever the conjugate is inside the rectangle.
    let mut reps: Vec<Complex64> = Vec::new();
    for z in candidates.into_iter().flatten() {
        let z = if z.im.abs() <= dedup_radius(z) {
            refine_root(model, Complex64::new(z.re, 0.0), None).unwrap_or(Complex64::new(z.re, 0.0))
        } else if z.im < 0.0 && rect.contains(z.conj()) {
            z.conj()
        } else {
            z
        };
        if !rect.contains(z) {
            continue;
        }
        if reps.iter().all(|r| (r - z).norm() > dedup_radius(z)) {
            reps.push(z);
        }
    }
    let mut all: Vec<Complex64> = Vec::with_capacity(2 * reps.len());
    for z in &reps {
        all.push(*z);
        if z.im > 0.0 && rect.contains(z.conj()) {
            all.push(z.conj());
        }
    }
    all.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));

    let f = |z: Complex64| char_det(model, z);
    all.iter()
        .map(|&z| {
            let nearest = all
                .iter()
                .filter(|w| **w != z)
                .map(|w| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = (0.25 * nearest).min(1e-3 * (1.0 + z.norm()));
            let multiplicity = winding_number(&f, &circle_points(z, radius, 16))
                .map(|w| w.max(1) as usize)
                .unwrap_or(1);
            Root {
                value: z,
                multiplicity,
                residual: f(z).norm(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenTriple {
    pub lambda: Complex64,
    /// Right null vector, `Δ(λ)q = 0`.
    pub q: DVector<Complex64>,
    /// Left null vector (as a column of the row entries), `pΔ(λ) = 0`.
    pub p: DVector<Complex64>,
    /// `‖Δ(λ)q‖ / ‖q‖`.
    pub right_residual: f64,
    /// `‖pΔ(λ)‖ / ‖p‖`.
    pub left_residual: f64,
}

impl EigenTriple {
    /// `pΔ'(λ)q`, equal to one for a normalized triple.
    pub fn normalization(&self, model: &Model) -> Complex64 {
        row_mat_col(&self.p, &delta_prime(model, self.lambda), &self.q)
    }
}

pub(crate) fn row_mat_col(p: &DVector<Complex64>, m: &CMat, q: &DVector<Complex64>) -> Complex64 {
    (m * q).iter().zip(p.iter()).map(|(a, b)| a * b).sum()
}

/// Right singular vector of `Δ^T` for its smallest singular value.
fn left_null_vector(d: &CMat) -> DVector<Complex64> {
    let svd = d.transpose().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let sv = &svd.singular_values;
    let k = (0..sv.len()).min_by(|&a, &b| sv[a].total_cmp(&sv[b])).unwrap_or(0);
    DVector::from_fn(d.nrows(), |i, _| v_t[(k, i)].conj())
}

/// Null vectors of `Δ(λ)` at a simple root, normalized by `pΔ'(λ)q = 1` with
/// the largest-magnitude component of `q` real and positive.
pub fn eigen_triple(model: &Model, lambda: Complex64) -> Result<EigenTriple> {
    let d = delta(model, lambda);
    let n = d.nrows();
    let scale = char_scale(model, lambda);
    let svd = d.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let k = order[0];
    let threshold = ROOT_SIGMA_RTOL * scale;
    if sv[k] >= threshold {
        return Err(Error::NotARoot {
            sigma_min: sv[k],
            threshold,
        });
    }
    if n > 1 && sv[order[1]] <= SIMPLE_SIGMA_RTOL * scale {
        return Err(Error::NotSimple(format!(
            "second singular value {:e} is small (geometric multiplicity > 1)",
            sv[order[1]]
        )));
    }

    let mut q = DVector::from_fn(n, |i, _| v_t[(k, i)].conj());
    let mut p = left_null_vector(&d);

    let mut lead = 0;
    for i in 1..n {
        if q[i].norm() > q[lead].norm() * (1.0 + 1e-12) {
            lead = i;
        }
    }
    let phase = q[lead].conj() / q[lead].norm();
    q *= phase;
    let qn = q.norm();
    q /= Complex64::new(qn, 0.0);
    q[lead] = Complex64::new(q[lead].re, 0.0);
    p /= Complex64::new(p.norm(), 0.0);

    let s = row_mat_col(&p, &delta_prime(model, lambda), &q);
    if s.norm() <= SIMPLE_PAIRING_TOL {
        return Err(Error::NotSimple(format!(
            "pΔ'(λ)q = {s} vanishes (algebraic multiplicity > 1)"
        )));
    }
    p /= s;

    let right_residual = (&d * &q).norm() / q.norm();
    let left_residual = (d.transpose() * &p).norm() / p.norm();
    Ok(EigenTriple {
        lambda,
        q,
        p,
        right_residual,
        left_residual,
    })
}

/// `dλ/dμ = -p (∂Δ/∂μ) q` for a normalized triple.
pub fn root_sensitivity(triple: &EigenTriple, d_delta: &CMat) -> Complex64 {
    -row_mat_col(&triple.p, d_delta, &triple.q)
}
