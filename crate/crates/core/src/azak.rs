//! Heisenberg approximate lattices built from `ℤ[√2]`, their hull, and the
//! aperiodic Zak transform (n = 1).
//!
//! `Γ = {(γ, γ*) : γ ∈ Heis(ℤ[√2])} ⊂ G × G` with `*` the Galois conjugation
//! applied componentwise. A hull point is `x = Γ(g1, g2)`, with `g.x = Γ(g1 g⁻¹, g2)`
//! and `P_x = {γ g1 : γ* g2 ∈ W}` for the box window `W = [±c_U] × [±c_Z] × [±c_V]`.
//! The base point `Γ(e, e)` gives `Λ = Λ_U × Λ_Z × Λ_V`.
//!
//! With `H = U × Z`, the hitting set is `Y_x = {c + v1 : c ∈ ℤ[√2], |c* + v2| ≤ c_V}`.
//! A point `y = l.x ∈ Y` is stored as `Γ((h_u, h_t, 0), (w_u, w_t, w_v))`.

use std::collections::BTreeSet;
use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cps::PointSet;
use crate::eigen::{Eigenfunction, HCharacter, ReturnTimes};
use crate::error::{Error, Result};
use crate::heisenberg::{heis_inv, mul, HeisPoint};
use crate::numerics::{mc_map, mc_stats, Aabb, RngStream, TestFunction, Tolerances};
use crate::siegel::{key, siegel_constant, SiegelConstantMode, SiegelReport};

/// `a + b√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZSqrt2 {
    pub a: i64,
    pub b: i64,
}

impl ZSqrt2 {
    pub fn new(a: i64, b: i64) -> Self {
        ZSqrt2 { a, b }
    }

    pub fn value(self) -> f64 {
        self.a as f64 + self.b as f64 * SQRT_2
    }

    pub fn conj(self) -> f64 {
        self.a as f64 - self.b as f64 * SQRT_2
    }

    pub fn mul(self, o: ZSqrt2) -> ZSqrt2 {
        ZSqrt2 { a: self.a * o.a + 2 * self.b * o.b, b: self.a * o.b + self.b * o.a }
    }
}

const ENUM_TOL: f64 = 1e-12;

/// `{x ∈ ℤ[√2] : x ∈ [lo, hi], x* ∈ [clo, chi]}`, sorted by value.
pub fn zsqrt2_window(lo: f64, hi: f64, clo: f64, chi: f64) -> Result<Vec<ZSqrt2>> {
    if !(lo <= hi && clo <= chi) {
        return Ok(vec![]);
    }
    let (amin, amax) = (((lo + clo) / 2.0 - ENUM_TOL).ceil() as i64, ((hi + chi) / 2.0 + ENUM_TOL).floor() as i64);
    if (amax - amin) as u128 > crate::cps::ENUMERATION_CAP {
        return Err(Error::EnumerationCap { needed: (amax - amin) as u128, cap: crate::cps::ENUMERATION_CAP });
    }
    let mut out = Vec::new();
    for a in amin..=amax {
        let af = a as f64;
        let blo = (lo - af).max(af - chi) / SQRT_2;
        let bhi = (hi - af).min(af - clo) / SQRT_2;
        for b in (blo - ENUM_TOL).ceil() as i64..=(bhi + ENUM_TOL).floor() as i64 {
            let z = ZSqrt2 { a, b };
            let (x, xs) = (z.value(), z.conj());
            if x >= lo - ENUM_TOL && x <= hi + ENUM_TOL && xs >= clo - ENUM_TOL && xs <= chi + ENUM_TOL {
                out.push(z);
            }
        }
    }
    out.sort_by(|p, q| p.value().total_cmp(&q.value()));
    Ok(out)
}

/// Component windows `c_U, c_Z, c_V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisWindow {
    pub c_u: f64,
    pub c_z: f64,
    pub c_v: f64,
}

impl HeisWindow {
    pub fn new(c_u: f64, c_z: f64, c_v: f64) -> Result<Self> {
        for (name, c) in [("c_U", c_u), ("c_Z", c_z), ("c_V", c_v)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {c}")));
            }
        }
        Ok(HeisWindow { c_u, c_z, c_v })
    }

    pub fn unit() -> Self {
        HeisWindow { c_u: 1.0, c_z: 1.0, c_v: 1.0 }
    }

    /// Bound on `|δ_t*|` for differences `δ` of return times.
    pub fn delta_t_bound(&self) -> f64 {
        2.0 * self.c_z + 2.0 * self.c_u * self.c_v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisApproxLattice {
    pub window: HeisWindow,
    pub trunc: f64,
    pub lambda_u: Vec<ZSqrt2>,
    pub lambda_z: Vec<ZSqrt2>,
    pub lambda_v: Vec<ZSqrt2>,
    /// `Λ ∩ [−trunc, trunc]³` in coordinates `(u, t, v)`.
    pub points: PointSet,
}

/// Builds `Λ_U × Λ_Z × Λ_V` on `[−trunc, trunc]³` after checking `⟨Λ_U, Λ_V⟩ ⊂ Λ_Z` on every
/// truncated pair.
pub fn build_heis_lambda(c_u: f64, c_z: f64, c_v: f64, trunc: f64) -> Result<HeisApproxLattice> {
    let window = HeisWindow::new(c_u, c_z, c_v)?;
    if !(trunc > 0.0) {
        return Err(Error::InvalidParameter(format!("truncation must be positive, got {trunc}")));
    }
    let set = |c: f64| zsqrt2_window(-trunc, trunc, -c, c);
    let (lambda_u, lambda_z, lambda_v) = (set(c_u)?, set(c_z)?, set(c_v)?);
    if lambda_u.is_empty() || lambda_z.is_empty() || lambda_v.is_empty() {
        return Err(Error::InvalidParameter("empty component window".into()));
    }
    let mut worst: Option<(ZSqrt2, ZSqrt2, f64)> = None;
    for &u in &lambda_u {
        for &v in &lambda_v {
            let c = u.mul(v).conj().abs();
            if c > c_z + ENUM_TOL && worst.is_none_or(|w| c > w.2) {
                worst = Some((u, v, c));
            }
        }
    }
    if let Some((u, v, conj_abs)) = worst {
        return Err(Error::ProductCondition { u: u.value(), v: v.value(), conj_abs, c_z });
    }
    let mut pts = Vec::with_capacity(lambda_u.len() * lambda_z.len() * lambda_v.len());
    for u in &lambda_u {
        for t in &lambda_z {
            for v in &lambda_v {
                pts.push(vec![u.value(), t.value(), v.value()]);
            }
        }
    }
    let points = PointSet::new(Aabb::new(vec![-trunc; 3], vec![trunc + ENUM_TOL; 3])?, pts)?;
    Ok(HeisApproxLattice { window, trunc, lambda_u, lambda_z, lambda_v, points })
}

/// Coefficients `(a, b)` of `(x, x*) = a(1, 1) + b(√2, −√2)`.
pub fn pair_coefficients(x: f64, xs: f64) -> (f64, f64) {
    ((x + xs) / 2.0, (x - xs) / (2.0 * SQRT_2))
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Translates `(x, x*)` by `(α, α*)`, `α ∈ ℤ[√2]`, into the unit coefficient box; returns
/// `(α, α*, x', x*')`.
fn reduce_pair(x: f64, xs: f64) -> (f64, f64, f64, f64) {
    let (a, b) = pair_coefficients(x, xs);
    let (fa, fb) = (frac(a), frac(b));
    let (da, db) = (fa - a, fb - b);
    (da + db * SQRT_2, da - db * SQRT_2, fa + fb * SQRT_2, fa - fb * SQRT_2)
}

/// Hull point `Γ(g1, g2)` in reduced Mal'cev coordinates: `g1 = (u, t, v)` is the physical
/// component, `g2 = (u*, t*, v*)` the internal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisHullPoint {
    pub u: f64,
    pub u_star: f64,
    pub v: f64,
    pub v_star: f64,
    pub t: f64,
    pub t_star: f64,
}

impl HeisHullPoint {
    /// Reduces along the lower central series: u-pair by `(α, 0, 0)`, v-pair by `(0, 0, κ)`,
    /// then the central t-pair by `(0, β, 0)`.
    pub fn reduce(g1: &HeisPoint, g2: &HeisPoint) -> Self {
        let (mut t1, mut t2) = (g1.t, g2.t);
        let (al, als, u1, u2) = reduce_pair(g1.u[0], g2.u[0]);
        t1 += al * g1.v[0];
        t2 += als * g2.v[0];
        let (ka, kas, v1, v2) = reduce_pair(g1.v[0], g2.v[0]);
        t1 -= u1 * ka;
        t2 -= u2 * kas;
        let (_, _, t1, t2) = reduce_pair(t1, t2);
        HeisHullPoint { u: u1, u_star: u2, v: v1, v_star: v2, t: t1, t_star: t2 }
    }

    pub fn from_coefficients(c: [f64; 6]) -> Self {
        let p = |a: f64, b: f64| (a + b * SQRT_2, a - b * SQRT_2);
        let (u, u_star) = p(c[0], c[1]);
        let (v, v_star) = p(c[2], c[3]);
        let (t, t_star) = p(c[4], c[5]);
        HeisHullPoint { u, u_star, v, v_star, t, t_star }
    }

    /// Pair coefficients in the order (u, v, t); the fundamental box is `[0, 1)⁶`.
    pub fn coefficients(&self) -> [f64; 6] {
        let (a, b) = pair_coefficients(self.u, self.u_star);
        let (c, d) = pair_coefficients(self.v, self.v_star);
        let (e, f) = pair_coefficients(self.t, self.t_star);
        [a, b, c, d, e, f]
    }

    pub fn in_fundamental_box(&self) -> bool {
        self.coefficients().iter().all(|c| (-1e-12..1.0 + 1e-12).contains(c))
    }

    pub fn g1(&self) -> HeisPoint {
        HeisPoint::new1(self.u, self.t, self.v)
    }

    pub fn g2(&self) -> HeisPoint {
        HeisPoint::new1(self.u_star, self.t_star, self.v_star)
    }
}

/// Haar sample of `Γ\(G × G)`.
pub fn sample_heis_hull(stream: &mut RngStream) -> HeisHullPoint {
    let c = stream.uniform(6);
    let x = HeisHullPoint::from_coefficients([c[0], c[1], c[2], c[3], c[4], c[5]]);
    HeisHullPoint::reduce(&x.g1(), &x.g2())
}

/// `g.x = Γ(g1 g⁻¹, g2)`.
pub fn act(g: &HeisPoint, x: &HeisHullPoint) -> HeisHullPoint {
    HeisHullPoint::reduce(&mul(&x.g1(), &heis_inv(g)), &x.g2())
}

/// `Γ_heis` and `Δ = Γ_heis ∩ (H × H*)` covolumes as determinants of their `ℤ[√2]`-bases.
pub fn heis_covolumes() -> (f64, f64) {
    let block = |pairs: usize| {
        let mut m = DMatrix::zeros(2 * pairs, 2 * pairs);
        for p in 0..pairs {
            let (r, c) = (2 * p, 2 * p);
            m[(r, c)] = 1.0;
            m[(r, c + 1)] = SQRT_2;
            m[(r + 1, c)] = 1.0;
            m[(r + 1, c + 1)] = -SQRT_2;
        }
        m.determinant().abs()
    };
    (block(3), block(2))
}

/// `σ(Y) = vol(π₂W)·covol(Δ)/covol(Γ)` with `π₂W = [−c_V, c_V]`.
pub fn sigma_y(w: &HeisWindow) -> Result<f64> {
    let (gamma, delta) = heis_covolumes();
    siegel_constant(&SiegelConstantMode::CompatiblePair {
        projected_window_volume: 2.0 * w.c_v,
        covol_delta: delta,
        covol_gamma: Some(gamma),
    })
}

/// `P_x ∩ region` with `region` a half-open box in `(u, t, v)`.
pub fn realize_pointset(w: &HeisWindow, x: &HeisHullPoint, region: &Aabb) -> Result<PointSet> {
    if region.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: region.dim() });
    }
    let (g1, g2) = (x.g1(), x.g2());
    let (u1, t1, v1) = (g1.u[0], g1.t, g1.v[0]);
    let (u2, t2, v2) = (g2.u[0], g2.t, g2.v[0]);
    let (lo, hi) = (&region.lo, &region.hi);
    let mut pts = Vec::new();
    for c in zsqrt2_window(lo[2] - v1, hi[2] - v1, -w.c_v - v2, w.c_v - v2)? {
        for a in zsqrt2_window(lo[0] - u1, hi[0] - u1, -w.c_u - u2, w.c_u - u2)? {
            // γ g1 = (a + u1, b + t1 + a v1 − u1 c, c + v1); γ* g2 has t-part b* + t2 + a* v2 − u2 c*.
            let sh = t1 + a.value() * v1 - u1 * c.value();
            let shs = t2 + a.conj() * v2 - u2 * c.conj();
            for b in zsqrt2_window(lo[1] - sh, hi[1] - sh, -w.c_z - shs, w.c_z - shs)? {
                let p = vec![a.value() + u1, b.value() + sh, c.value() + v1];
                if region.contains(&p) {
                    pts.push(p);
                }
            }
        }
    }
    PointSet::new(region.clone(), pts)
}

/// A point `y = Γ((h_u, h_t, 0), (w_u, w_t, w_v))` of the cross section `Y`, reached as `l.x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YPoint {
    pub l: f64,
    pub h_u: f64,
    pub h_t: f64,
    pub w_u: f64,
    pub w_t: f64,
    pub w_v: f64,
}

impl YPoint {
    pub fn to_hull(&self) -> HeisHullPoint {
        HeisHullPoint::reduce(&HeisPoint::new1(self.h_u, self.h_t, 0.0), &HeisPoint::new1(self.w_u, self.w_t, self.w_v))
    }
}

/// `Y_x ∩ [lo, hi)` with the translated points `l.x`, read off directly from the hull coordinates.
pub fn hitting_set(w: &HeisWindow, x: &HeisHullPoint, lo: f64, hi: f64) -> Result<Vec<YPoint>> {
    let (g1, g2) = (x.g1(), x.g2());
    let (u1, t1, v1) = (g1.u[0], g1.t, g1.v[0]);
    let (u2, t2, v2) = (g2.u[0], g2.t, g2.v[0]);
    Ok(zsqrt2_window(lo - v1, hi - v1, -w.c_v - v2, w.c_v - v2)?
        .into_iter()
        .filter_map(|c| {
            let l = c.value() + v1;
            // (0,0,c)·g1·(0,0,l)⁻¹ and (0,0,c*)·g2.
            (lo..hi).contains(&l).then(|| YPoint {
                l,
                h_u: u1,
                h_t: t1 - u1 * (l + c.value()),
                w_u: u2,
                w_t: t2 - u2 * c.conj(),
                w_v: v2 + c.conj(),
            })
        })
        .collect())
}

fn padding(c: f64) -> f64 {
    4.0 + 4.0 / c
}

/// `Y_x ∩ [lo, hi)` as the V-projection of a realized patch of `P_x`.
pub fn hitting_set_by_projection(w: &HeisWindow, x: &HeisHullPoint, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let (ru, rt) = (padding(w.c_u), padding(w.c_z) + padding(w.c_u) * (hi.abs().max(lo.abs()) + 1.0));
    let region = Aabb::new(vec![-ru, -rt, lo], vec![ru, rt, hi])?;
    let ps = realize_pointset(w, x, &region)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in &ps.points {
        if seen.insert(key(&p[2..])) {
            out.push(p[2]);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// The candidates `l` for which `P_{l.x}` meets `H`, with `l.x` computed by hull translation.
pub fn hitting_set_by_translation(w: &HeisWindow, x: &HeisHullPoint, candidates: &[f64]) -> Result<Vec<f64>> {
    let tol = 1e-9;
    let (ru, rt) = (padding(w.c_u), padding(w.c_z));
    let region = Aabb::new(vec![-ru, -rt, -tol], vec![ru, rt, tol])?;
    let mut out = Vec::new();
    for &l in candidates {
        let y = act(&HeisPoint::new1(0.0, 0.0, l), x);
        if !realize_pointset(w, &y, &region)?.is_empty() {
            out.push(l);
        }
    }
    Ok(out)
}

/// A superset of `Y_x ∩ [lo, hi)`: points `c + v1` with `c*` in an enlarged window.
pub fn hitting_candidates(w: &HeisWindow, x: &HeisHullPoint, lo: f64, hi: f64, enlarge: f64) -> Result<Vec<f64>> {
    let (v1, v2) = (x.v, x.v_star);
    Ok(zsqrt2_window(lo - v1, hi - v1, -w.c_v - enlarge - v2, w.c_v + enlarge - v2)?
        .into_iter()
        .map(|c| c.value() + v1)
        .filter(|l| (lo..hi).contains(l))
        .collect())
}

/// Return times `P_y ∩ H = {(a + h_u, b + h_t) : |a* + w_u| ≤ c_U, |b* + w_t + a* w_v| ≤ c_Z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisReturnTimes {
    pub window: HeisWindow,
}

impl ReturnTimes for HeisReturnTimes {
    type Point = YPoint;

    fn h_dim(&self) -> usize {
        2
    }

    fn return_times(&self, y: &YPoint, bx: &Aabb) -> Result<Vec<Vec<f64>>> {
        let w = &self.window;
        let mut out = Vec::new();
        for a in zsqrt2_window(bx.lo[0] - y.h_u, bx.hi[0] - y.h_u, -w.c_u - y.w_u, w.c_u - y.w_u)? {
            let sh = y.w_t + a.conj() * y.w_v;
            for b in zsqrt2_window(bx.lo[1] - y.h_t, bx.hi[1] - y.h_t, -w.c_z - sh, w.c_z - sh)? {
                out.push(vec![a.value() + y.h_u, b.value() + y.h_t]);
            }
        }
        Ok(out)
    }

    fn shifted(&self, y: &YPoint, h: &[f64]) -> YPoint {
        YPoint { h_u: y.h_u + h[0], h_t: y.h_t + h[1], ..*y }
    }
}

/// The exact eigenfunction `ψ(y) = exp(2πi(s·h_t + r·(w_t − w_u w_v)))` for the central
/// character `ξ_s`, where `(s, r) = ((m + k/√2)/2, (m − k/√2)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualEigenfunction {
    pub m: i64,
    pub k: i64,
    pub s: f64,
    pub r: f64,
}

impl DualEigenfunction {
    pub fn new(m: i64, k: i64) -> Self {
        let q = k as f64 / SQRT_2;
        DualEigenfunction { m, k, s: (m as f64 + q) / 2.0, r: (m as f64 - q) / 2.0 }
    }

    /// Recovers `(m, k)` from a dual-lattice frequency `s`.
    pub fn from_frequency(s: f64) -> Option<Self> {
        let kmax = (3.0 * s.abs() + 10.0) as i64;
        (-kmax..=kmax).find_map(|k| {
            let m = (2.0 * s - k as f64 / SQRT_2).round() as i64;
            let e = DualEigenfunction::new(m, k);
            ((e.s - s).abs() < 1e-9).then_some(e)
        })
    }

    pub fn xi(&self) -> HCharacter {
        HCharacter::new(vec![0.0, self.s])
    }

    /// `sup_δ |ξ(δ) − 1|` over return-time differences.
    pub fn delta_defect(&self, w: &HeisWindow) -> f64 {
        let x = (self.r.abs() * w.delta_t_bound()).min(0.5);
        2.0 * (PI * x).sin()
    }
}

impl Eigenfunction<YPoint> for DualEigenfunction {
    fn eval(&self, y: &YPoint) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, 2.0 * PI * (self.s * y.h_t + self.r * (y.w_t - y.w_u * y.w_v))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub s: f64,
    pub checked: usize,
    /// Nonzero `l` whose translate fixes the character.
    pub fixed: Vec<f64>,
    pub pass: bool,
}

/// Checks `l.(1⊗ξ_s) ≠ 1⊗ξ_s` for each nonzero `l`, evaluating both at `(u, 0)` with
/// `u = 1/(4|s l|)`, where the ratio is `e^{−4πi s u l} = −1`.
pub fn check_stabilizer(s: f64, lambda_v: &[f64]) -> StabilizerReport {
    let mut fixed = Vec::new();
    let mut checked = 0;
    for &l in lambda_v.iter().filter(|l| **l != 0.0) {
        checked += 1;
        if s == 0.0 {
            fixed.push(l);
            continue;
        }
        let u = 1.0 / (4.0 * (s * l).abs());
        let translated = Complex64::from_polar(1.0, 2.0 * PI * s * (0.0 - 2.0 * u * l));
        if translated == Complex64::new(1.0, 0.0) {
            fixed.push(l);
        }
    }
    StabilizerReport { s, checked, pass: s != 0.0 && fixed.is_empty(), fixed }
}

fn support_interval(f: &TestFunction) -> Result<(f64, f64)> {
    if f.dimension != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dimension });
    }
    let b = f.support_box();
    Ok((b.lo[0], b.hi[0]))
}

/// `S_ψ f(x) = Σ_{l ∈ Y_x ∩ region} f(l) ψ(l.x)`.
pub fn aperiodic_zak<E: Eigenfunction<YPoint>>(
    f: &TestFunction,
    psi: &E,
    w: &HeisWindow,
    x: &HeisHullPoint,
    region: (f64, f64),
) -> Result<Complex64> {
    let (slo, shi) = support_interval(f)?;
    if !f.is_zero() && (slo < region.0 || shi > region.1) {
        return Err(Error::UnderCovered);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for y in hitting_set(w, x, region.0, region.1)? {
        let fv = f.eval_unchecked(&[y.l]);
        if fv == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = psi.eval(&y).map_err(|e| Error::EigenfunctionUndefined(format!("l = {}: {e}", y.l)))?;
        acc += fv * p;
    }
    Ok(acc)
}

/// `S_ψ f(g.x)` evaluated from the hitting set of `x`:
/// `Σ_{l ∈ Y_x} f(l − v) e^{−2πis(t − 2ul + uv)} ψ(l.x)` for `g = (u, t, v)`.
pub fn aperiodic_zak_reindexed<E: Eigenfunction<YPoint>>(
    f: &TestFunction,
    psi: &E,
    s: f64,
    w: &HeisWindow,
    x: &HeisHullPoint,
    g: &HeisPoint,
) -> Result<Complex64> {
    let (u, t, v) = (g.u[0], g.t, g.v[0]);
    let (slo, shi) = support_interval(f)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for y in hitting_set(w, x, slo + v, shi + v)? {
        let fv = f.eval_unchecked(&[y.l - v]);
        let phase = Complex64::from_polar(1.0, -2.0 * PI * s * (t - 2.0 * u * y.l + u * v));
        acc += fv * phase * psi.eval(&y)?;
    }
    Ok(acc)
}

/// The first `l ≥ 0` in `Y_x` and its translate `l.x`.
pub fn first_hit(w: &HeisWindow, x: &HeisHullPoint) -> Result<YPoint> {
    let mut hi = 4.0;
    while hi < 1e6 {
        if let Some(y) = hitting_set(w, x, 0.0, hi)?.into_iter().next() {
            return Ok(y);
        }
        hi *= 2.0;
    }
    Err(Error::NotInTransversal)
}

/// Counts `|Y_x ∩ [0, length)| / length` over Haar samples against `σ(Y)`.
pub fn mc_hitting_intensity(w: &HeisWindow, length: f64, n: usize, seed: u64, tol: &Tolerances) -> Result<SiegelReport> {
    let sigma = sigma_y(w)?;
    let samples = mc_map(seed, n, |_, s| {
        let x = sample_heis_hull(s);
        Ok(Complex64::new(hitting_set(w, &x, 0.0, length)?.len() as f64 / length, 0.0))
    })?;
    SiegelReport::from_samples("heis_hitting_intensity", seed, &samples, Complex64::new(sigma, 0.0), tol, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub experiment: String,
    pub seed: u64,
    pub n_samples: usize,
    pub s: f64,
    pub epsilon: f64,
    pub psi_defect: f64,
    pub sigma_y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folner_box: Option<f64>,
    pub norm_sq: f64,
    /// `E|S^norm f|²`.
    pub second_moment: f64,
    pub second_moment_stderr: f64,
    pub ratio: f64,
    pub ratio_tolerance: f64,
    pub isometry_pass: bool,
    /// Mean of `S_ψ f`, which vanishes for nontrivial `ξ`.
    pub mean_re: f64,
    pub mean_im: f64,
    pub mean_stderr: f64,
    pub mean_pass: bool,
    pub pass: bool,
}

/// Options for [`mc_isometry`] that only enter the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryMeta {
    pub epsilon: f64,
    pub psi_defect: f64,
    pub folner_box: Option<f64>,
}

/// Monte-Carlo estimate of `E|σ(Y)^{-1/2} S_ψ f|²` against `‖f‖²`; the isometry tolerance is
/// `max(5%, 4δ)` for the residual defect `δ` of `ψ`.
#[allow(clippy::too_many_arguments)]
pub fn mc_isometry<E: Eigenfunction<YPoint>>(
    f: &TestFunction,
    s: f64,
    psi: &E,
    meta: IsometryMeta,
    w: &HeisWindow,
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<IsometryReport> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("isometry check needs at least 1000 samples, got {n}")));
    }
    let (lo, hi) = support_interval(f)?;
    let lambda_v: Vec<f64> = zsqrt2_window(lo - hi, hi - lo, -2.0 * w.c_v, 2.0 * w.c_v)?.iter().map(|z| z.value()).collect();
    let stab = check_stabilizer(s, &lambda_v);
    if !stab.pass && s != 0.0 {
        return Err(Error::InvalidParameter(format!("character fixed by translations {:?}", stab.fixed)));
    }
    let sigma = sigma_y(w)?;
    let samples = mc_map(seed, n, |_, st| aperiodic_zak(f, psi, w, &sample_heis_hull(st), (lo, hi)))?;
    let scale = sigma.sqrt().recip();
    let sq: Vec<Complex64> = samples.iter().map(|z| Complex64::new((z * scale).norm_sqr(), 0.0)).collect();
    let (m2, m2_err) = mc_stats(&sq)?;
    let (mean, mean_err) = mc_stats(&samples)?;
    let norm_sq = f.l2_norm_sq();
    let ratio = m2.re / norm_sq;
    let ratio_tolerance = 0.05f64.max(4.0 * meta.psi_defect);
    let isometry_pass = (ratio - 1.0).abs() <= ratio_tolerance;
    let mean_pass = s == 0.0 || mean.norm() <= tol.z_multiplier * mean_err;
    Ok(IsometryReport {
        experiment: "aperiodic_zak_isometry".into(),
        seed,
        n_samples: n,
        s,
        epsilon: meta.epsilon,
        psi_defect: meta.psi_defect,
        sigma_y: sigma,
        folner_box: meta.folner_box,
        norm_sq,
        second_moment: m2.re,
        second_moment_stderr: m2_err,
        ratio,
        ratio_tolerance,
        isometry_pass,
        mean_re: mean.re,
        mean_im: mean.im,
        mean_stderr: mean_err,
        mean_pass,
        pass: isometry_pass && mean_pass,
    })
}

/// Largest `|ψ(h⁻¹.y) − ξ(h)ψ(y)|` over sampled `y = l.x` and `h ∈ [−1, 1]²`.
pub fn residual_defect<E: Eigenfunction<YPoint>>(psi: &E, xi: &HCharacter, w: &HeisWindow, n: usize, seed: u64) -> Result<f64> {
    let sys = HeisReturnTimes { window: *w };
    let d = mc_map(seed, n, |_, st| {
        let y = first_hit(w, &sample_heis_hull(st))?;
        let h = st.uniform_in(-1.0, 1.0);
        let h2 = st.uniform_in(-1.0, 1.0);
        crate::eigen::eigen_defect(&sys, psi, xi, &y, &[h, h2])
    })?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{build_section, folner_average, UnitEigenfunction};

    #[test]
    fn zsqrt2_window_brute_force() {
        let got = zsqrt2_window(-5.0, 5.0, -1.0, 1.0).unwrap();
        let mut brute = Vec::new();
        for a in -20..=20i64 {
            for b in -20..=20i64 {
                let z = ZSqrt2::new(a, b);
                if z.value().abs() <= 5.0 && z.conj().abs() <= 1.0 {
                    brute.push(z);
                }
            }
        }
        brute.sort_by(|p, q| p.value().total_cmp(&q.value()));
        assert_eq!(got, brute);
        let z = ZSqrt2::new(3, -2);
        assert!((z.mul(ZSqrt2::new(1, 5)).value() - z.value() * (1.0 + 5.0 * SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn build_examples() {
        let lat = build_heis_lambda(1.0, 1.0, 1.0, 5.0).unwrap();
        assert_eq!(lat.points.len(), lat.lambda_u.len() * lat.lambda_z.len() * lat.lambda_v.len());
        assert!(lat.points.separation() > 0.0);
        match build_heis_lambda(1.0, 0.5, 1.0, 5.0) {
            Err(Error::ProductCondition { conj_abs, .. }) => assert!(conj_abs > 0.5),
            other => panic!("{other:?}"),
        }
        assert!(build_heis_lambda(0.0, 1.0, 1.0, 5.0).is_err());
        // The base point realizes Λ.
        let x0 = HeisHullPoint::reduce(&HeisPoint::identity(1), &HeisPoint::identity(1));
        let ps = realize_pointset(&lat.window, &x0, &lat.points.region).unwrap();
        assert_eq!(ps.points.len(), lat.points.len());
        for (a, b) in ps.points.iter().zip(&lat.points.points) {
            assert!(a.iter().zip(b).all(|(p, q)| (p - q).abs() < 1e-9));
        }
    }

    #[test]
    fn reduction_is_a_fundamental_domain() {
        let mut s = RngStream::new(61, 0);
        let w = HeisWindow::unit();
        let region = Aabb::new(vec![-3.0, -3.0, -3.0], vec![3.0, 3.0, 3.0]).unwrap();
        for _ in 0..50 {
            let x = sample_heis_hull(&mut s);
            assert!(x.in_fundamental_box());
            // Moving (g1, g2) by a lattice element leaves the reduced point fixed.
            let g = ZSqrt2::new(s.uniform_in(-5.0, 5.0) as i64, s.uniform_in(-5.0, 5.0) as i64);
            let h = ZSqrt2::new(s.uniform_in(-5.0, 5.0) as i64, s.uniform_in(-5.0, 5.0) as i64);
            let k = ZSqrt2::new(s.uniform_in(-5.0, 5.0) as i64, s.uniform_in(-5.0, 5.0) as i64);
            let gam = HeisPoint::new1(g.value(), h.value(), k.value());
            let gam_s = HeisPoint::new1(g.conj(), h.conj(), k.conj());
            let y = HeisHullPoint::reduce(&mul(&gam, &x.g1()), &mul(&gam_s, &x.g2()));
            let (cx, cy) = (x.coefficients(), y.coefficients());
            assert!(cx.iter().zip(&cy).all(|(a, b)| (a - b).abs() < 1e-7 || (a - b).abs() > 1.0 - 1e-7), "{cx:?} {cy:?}");
            // P_{g.x} = P_x g⁻¹.
            let g = HeisPoint::new1(s.uniform_in(-1.0, 1.0), s.uniform_in(-1.0, 1.0), s.uniform_in(-1.0, 1.0));
            let moved = realize_pointset(&w, &act(&g, &x), &region).unwrap();
            let big = Aabb::new(vec![-8.0, -12.0, -8.0], vec![8.0, 12.0, 8.0]).unwrap();
            let expect: Vec<Vec<f64>> = realize_pointset(&w, &x, &big)
                .unwrap()
                .points
                .iter()
                .map(|p| mul(&HeisPoint::from_slice(p).unwrap(), &heis_inv(&g)).to_vec())
                .filter(|p| region.contains(p))
                .collect();
            assert_eq!(moved.len(), expect.len());
        }
        let mut a = RngStream::new(62, 3);
        let mut b = RngStream::new(62, 3);
        assert_eq!(sample_heis_hull(&mut a), sample_heis_hull(&mut b));
    }

    #[test]
    fn covolumes_and_sigma() {
        let (g, d) = heis_covolumes();
        assert!((g - 16.0 * SQRT_2).abs() < 1e-9);
        assert!((d - 8.0).abs() < 1e-9);
        assert!((sigma_y(&HeisWindow::unit()).unwrap() - 1.0 / SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn three_hitting_set_paths_agree() {
        let w = HeisWindow::unit();
        let mut s = RngStream::new(63, 0);
        for _ in 0..40 {
            let x = sample_heis_hull(&mut s);
            let direct: Vec<f64> = hitting_set(&w, &x, -6.0, 6.0).unwrap().iter().map(|y| y.l).collect();
            let proj = hitting_set_by_projection(&w, &x, -6.0, 6.0).unwrap();
            let cands = hitting_candidates(&w, &x, -6.0, 6.0, 0.5).unwrap();
            assert!(cands.len() > direct.len());
            let trans = hitting_set_by_translation(&w, &x, &cands).unwrap();
            assert_eq!(direct.len(), proj.len());
            assert_eq!(direct.len(), trans.len());
            for ((a, b), c) in direct.iter().zip(&proj).zip(&trans) {
                assert!((a - b).abs() < 1e-9 && (a - c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn y_points_have_return_time_at_identity() {
        let w = HeisWindow::unit();
        let sys = HeisReturnTimes { window: w };
        let mut s = RngStream::new(64, 0);
        for _ in 0..50 {
            let x = sample_heis_hull(&mut s);
            for y in hitting_set(&w, &x, -4.0, 4.0).unwrap() {
                let r = sys.return_times(&y, &Aabb::cube(2, 4.0)).unwrap();
                // Matches the generic hull path.
                let hull = y.to_hull();
                let ps = realize_pointset(&w, &hull, &Aabb::new(vec![-4.0, -4.0, -1e-9], vec![4.0, 4.0, 1e-9]).unwrap()).unwrap();
                assert_eq!(r.len(), ps.len());
                assert!(build_section(&sys, &y).is_ok());
            }
        }
    }

    #[test]
    fn dual_eigenfunction_is_exact() {
        let w = HeisWindow::unit();
        let sys = HeisReturnTimes { window: w };
        let psi = DualEigenfunction::new(12, 17);
        assert_eq!(DualEigenfunction::from_frequency(psi.s), Some(psi));
        let mut s = RngStream::new(65, 0);
        for _ in 0..100 {
            let x = sample_heis_hull(&mut s);
            let y = first_hit(&w, &x).unwrap();
            // Invariant under reparametrization of the same hull point.
            let y2 = hitting_set(&w, &y.to_hull(), -1e-9, 1e-9).unwrap()[0];
            assert!((psi.eval(&y).unwrap() - psi.eval(&y2).unwrap()).norm() < 1e-9);
            let h = [s.uniform_in(-3.0, 3.0), s.uniform_in(-3.0, 3.0)];
            assert!(crate::eigen::eigen_defect(&sys, &psi, &psi.xi(), &y, &h).unwrap() < 1e-9);
        }
    }

    #[test]
    fn stabilizer_examples() {
        let r = check_stabilizer(0.3, &[0.0, 1.0, -SQRT_2]);
        assert!(r.pass);
        assert_eq!(r.checked, 2);
        // At (1, 0) the characters e^{2πi·0.3·(−2)} and 1 differ.
        assert!((Complex64::from_polar(1.0, 2.0 * PI * 0.3 * (-2.0)) - 1.0).norm() > 0.1);
        let r0 = check_stabilizer(0.0, &[1.0]);
        assert!(!r0.pass);
        assert_eq!(r0.fixed, vec![1.0]);
    }

    #[test]
    fn aperiodic_zak_examples() {
        let w = HeisWindow::unit();
        let psi = DualEigenfunction::new(12, 17);
        let f = TestFunction::standard_gaussian(1);
        let (lo, hi) = support_interval(&f).unwrap();
        let mut s = RngStream::new(66, 0);
        let x = sample_heis_hull(&mut s);
        assert_eq!(aperiodic_zak(&TestFunction::zero(1), &psi, &w, &x, (lo, hi)).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(aperiodic_zak(&f, &psi, &w, &x, (0.0, 1.0)), Err(Error::UnderCovered)));
        for _ in 0..100 {
            let x = sample_heis_hull(&mut s);
            let g = HeisPoint::new1(s.uniform_in(-2.0, 2.0), s.uniform_in(-2.0, 2.0), s.uniform_in(-2.0, 2.0));
            let direct = aperiodic_zak(&f, &psi, &w, &act(&g, &x), (lo, hi)).unwrap();
            let re = aperiodic_zak_reindexed(&f, &psi, psi.s, &w, &x, &g).unwrap();
            assert!((direct - re).norm() < 1e-10, "{direct} {re}");
        }
    }

    #[test]
    fn untwisted_reduction_matches_siegel_formula() {
        let w = HeisWindow::unit();
        let f = TestFunction::standard_gaussian(1);
        let (lo, hi) = support_interval(&f).unwrap();
        let tol = Tolerances::default();
        let samples = mc_map(67, 4000, |_, st| aperiodic_zak(&f, &UnitEigenfunction, &w, &sample_heis_hull(st), (lo, hi))).unwrap();
        let rep = SiegelReport::from_samples("t", 67, &samples, Complex64::new(sigma_y(&w).unwrap() * f.integral(), 0.0), &tol, 0.0).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn hitting_intensity_small() {
        let rep = mc_hitting_intensity(&HeisWindow::unit(), 10.0, 2000, 68, &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn folner_on_heisenberg_cross_section() {
        let w = HeisWindow::unit();
        let sys = HeisReturnTimes { window: w };
        let psi = DualEigenfunction::new(29, 41);
        let eps = psi.delta_defect(&w);
        assert!(eps < 0.12);
        let mut s = RngStream::new(69, 0);
        for _ in 0..50 {
            let y = first_hit(&w, &sample_heis_hull(&mut s)).unwrap();
            let v = folner_average(&sys, &psi.xi(), &y, 4.0, 16).unwrap();
            assert!(v.value.norm() >= 1.0 - eps - 1e-12 && v.value.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn isometry_small() {
        let w = HeisWindow::unit();
        let psi = DualEigenfunction::new(29, 41);
        let f = TestFunction::standard_gaussian(1);
        let meta = IsometryMeta { epsilon: 0.5, psi_defect: 0.0, folner_box: None };
        let rep = mc_isometry(&f, psi.s, &psi, meta, &w, 2000, 70, &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(mc_isometry(&f, psi.s, &psi, meta, &w, 10, 70, &Tolerances::default()).is_err());
    }
}
