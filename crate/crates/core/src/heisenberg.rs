//! The Heisenberg group `G = U × Z × V`, its Schrödinger representation in the
//! induced model `L²(V)`, and the classical twisted Zak transform.
//!
//! Group law: `(u,t,v)(u',t',v') = (u+u', t+t' + ⟨u,v'⟩ − ⟨u',v⟩, v+v')`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{midpoint, Aabb, TestFunction};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisPoint {
    pub u: Vec<f64>,
    pub t: f64,
    pub v: Vec<f64>,
}

impl HeisPoint {
    pub fn new(u: Vec<f64>, t: f64, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
        }
        Ok(HeisPoint { u, t, v })
    }

    /// `n = 1` shorthand.
    pub fn new1(u: f64, t: f64, v: f64) -> Self {
        HeisPoint { u: vec![u], t, v: vec![v] }
    }

    pub fn identity(n: usize) -> Self {
        HeisPoint { u: vec![0.0; n], t: 0.0, v: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// Flat coordinates `(u, t, v)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.u.clone();
        x.push(self.t);
        x.extend_from_slice(&self.v);
        x
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!("Heisenberg coordinates need odd length, got {}", x.len())));
        }
        let n = x.len() / 2;
        Ok(HeisPoint { u: x[..n].to_vec(), t: x[n], v: x[n + 1..].to_vec() })
    }

    pub fn max_abs_diff(&self, other: &HeisPoint) -> f64 {
        self.to_vec().iter().zip(other.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub fn heis_mul(a: &HeisPoint, b: &HeisPoint) -> Result<HeisPoint> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    Ok(mul(a, b))
}

/// Unchecked product.
pub fn mul(a: &HeisPoint, b: &HeisPoint) -> HeisPoint {
    HeisPoint { u: add(&a.u, &b.u), t: a.t + b.t + dot(&a.u, &b.v) - dot(&b.u, &a.v), v: add(&a.v, &b.v) }
}

pub fn heis_inv(g: &HeisPoint) -> HeisPoint {
    HeisPoint { u: g.u.iter().map(|x| -x).collect(), t: -g.t, v: g.v.iter().map(|x| -x).collect() }
}

/// Element `(u, t)` of the normal abelian subgroup `H = U × Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HElem {
    pub u: Vec<f64>,
    pub t: f64,
}

impl HElem {
    pub fn to_point(&self) -> HeisPoint {
        HeisPoint { u: self.u.clone(), t: self.t, v: vec![0.0; self.u.len()] }
    }

    pub fn mul(&self, other: &HElem) -> HElem {
        HElem { u: add(&self.u, &other.u), t: self.t + other.t }
    }
}

/// `(u,t).v = (u, t − 2⟨u,v⟩)`.
pub fn h_action(h: &HElem, v: &[f64]) -> HElem {
    HElem { u: h.u.clone(), t: h.t - 2.0 * dot(&h.u, v) }
}

/// Section `s(Hv) = (0, 0, v)`.
pub fn section(v: &[f64]) -> HeisPoint {
    HeisPoint { u: vec![0.0; v.len()], t: 0.0, v: v.to_vec() }
}

/// `h(g)` in `g = h(g)·s(Hg)`.
pub fn h_part(g: &HeisPoint) -> HElem {
    HElem { u: g.u.clone(), t: g.t - dot(&g.u, &g.v) }
}

/// `α(g, Hv0) = s(v0)·g·s(v0 + v)^{-1} = (u, t − ⟨u,v⟩ − 2⟨u,v0⟩)`.
pub fn cocycle_alpha(g: &HeisPoint, v0: &[f64]) -> HElem {
    HElem { u: g.u.clone(), t: g.t - dot(&g.u, &g.v) - 2.0 * dot(&g.u, v0) }
}

/// The defining product for [`cocycle_alpha`].
pub fn cocycle_alpha_by_definition(g: &HeisPoint, v0: &[f64]) -> HElem {
    let p = mul(&mul(&section(v0), g), &heis_inv(&section(&add(v0, &g.v))));
    HElem { u: p.u, t: p.t }
}

/// Character `(u, t) ↦ exp(2πi(s·t + ⟨u_freq, u⟩))` of `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub s: f64,
    pub u_freq: Vec<f64>,
}

impl Character {
    /// `1 ⊗ ξ_s`.
    pub fn central(s: f64, n: usize) -> Self {
        Character { s, u_freq: vec![0.0; n] }
    }

    pub fn eval(&self, h: &HElem) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * (self.s * h.t + dot(&self.u_freq, &h.u)))
    }

    /// Frequency vector on flat `(u, t)` coordinates.
    pub fn frequency(&self) -> Vec<f64> {
        let mut f = self.u_freq.clone();
        f.push(self.s);
        f
    }
}

/// A function on `V`.
pub trait VFunction: Sync {
    fn eval_v(&self, v: &[f64]) -> Complex64;
}

impl VFunction for TestFunction {
    fn eval_v(&self, v: &[f64]) -> Complex64 {
        self.eval_unchecked(v)
    }
}

/// `π(g_1)⋯π(g_k) φ` in the Schrödinger model with central frequency `s`:
/// `π(g)φ(v0) = exp(2πis(t − ⟨u,v⟩ − 2⟨u,v0⟩))·φ(v0 + v)`.
pub struct SchrodingerImage<'a> {
    pub base: &'a dyn VFunction,
    pub ops: Vec<HeisPoint>,
    pub s: f64,
}

impl SchrodingerImage<'_> {
    /// `π(g)` applied on the left of the existing operators.
    pub fn then(mut self, g: HeisPoint) -> Self {
        self.ops.insert(0, g);
        self
    }
}

impl VFunction for SchrodingerImage<'_> {
    fn eval_v(&self, v0: &[f64]) -> Complex64 {
        let mut phase = 0.0;
        let mut v = v0.to_vec();
        for g in &self.ops {
            phase += g.t - dot(&g.u, &g.v) - 2.0 * dot(&g.u, &v);
            v = add(&v, &g.v);
        }
        Complex64::from_polar(1.0, 2.0 * PI * self.s * phase) * self.base.eval_v(&v)
    }
}

pub fn schrodinger_action<'a>(g: &HeisPoint, phi: &'a dyn VFunction, xi: &Character) -> Result<SchrodingerImage<'a>> {
    if xi.s == 0.0 {
        return Err(Error::ZeroCentralFrequency);
    }
    Ok(SchrodingerImage { base: phi, ops: vec![g.clone()], s: xi.s })
}

/// Smallest per-axis truncation `|k_i| ≤ K` such that every `v + k` in the support of `f` is summed.
pub fn zak_truncation(f: &TestFunction, v: &[f64]) -> i64 {
    let r = f.truncation_radius();
    v.iter().zip(&f.center).map(|(vi, ci)| ((vi - ci).abs() + r).ceil() as i64 + 1).max().unwrap_or(0)
}

/// `Zf(u,t,v) = e^{2πim(t−⟨u,v⟩)} Σ_{k∈ℤ^n} f(v+k) e^{−4πim⟨u,k⟩}` for the lattice `Heis(ℤ)`.
pub fn classical_zak(f: &TestFunction, m: i64, x: &HeisPoint, k_trunc: i64) -> Result<Complex64> {
    let n = x.n();
    if f.dimension != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.dimension });
    }
    if m == 0 {
        return Err(Error::ZeroCentralFrequency);
    }
    if k_trunc < zak_truncation(f, &x.v) - 1 {
        return Err(Error::TailBound { k_trunc });
    }
    Ok(zak_sum(f, m, x, k_trunc))
}

fn zak_sum(f: &TestFunction, m: i64, x: &HeisPoint, k_trunc: i64) -> Complex64 {
    let n = x.n();
    let m = m as f64;
    let pre = Complex64::from_polar(1.0, 2.0 * PI * m * (x.t - dot(&x.u, &x.v)));
    let mut k = vec![-k_trunc; n];
    let mut vk = vec![0.0; n];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        for i in 0..n {
            vk[i] = x.v[i] + k[i] as f64;
        }
        let fv = f.eval_unchecked(&vk);
        if fv != Complex64::new(0.0, 0.0) {
            let ph: f64 = (0..n).map(|i| x.u[i] * k[i] as f64).sum();
            acc += fv * Complex64::from_polar(1.0, -4.0 * PI * m * ph);
        }
        let mut i = 0;
        loop {
            if i == n {
                return pre * acc;
            }
            k[i] += 1;
            if k[i] <= k_trunc {
                break;
            }
            k[i] = -k_trunc;
            i += 1;
        }
    }
}

/// Zak transform with the truncation chosen automatically.
pub fn zak(f: &TestFunction, m: i64, x: &HeisPoint) -> Result<Complex64> {
    classical_zak(f, m, x, zak_truncation(f, &x.v))
}

/// Zak transform of an arbitrary function on `V` (n = 1), truncated at `|k| ≤ k_trunc`.
pub fn zak_of(f: &dyn VFunction, m: i64, x: &HeisPoint, k_trunc: i64) -> Complex64 {
    let m = m as f64;
    let pre = Complex64::from_polar(1.0, 2.0 * PI * m * (x.t - dot(&x.u, &x.v)));
    let mut acc = Complex64::new(0.0, 0.0);
    for k in -k_trunc..=k_trunc {
        let vk: Vec<f64> = x.v.iter().map(|v| v + k as f64).collect();
        let ph: f64 = x.u.iter().map(|u| u * k as f64).sum();
        acc += f.eval_v(&vk) * Complex64::from_polar(1.0, -4.0 * PI * m * ph);
    }
    pre * acc
}

/// Midpoint quadrature of `Zf1 · conj(Zf2)` over the fundamental cube `[0,1)^{2n+1}`.
pub fn zak_inner_product(f1: &TestFunction, f2: &TestFunction, m: i64, grid_per_axis: usize) -> Result<Complex64> {
    if grid_per_axis < 16 {
        return Err(Error::InvalidParameter(format!("grid must have at least 16 points per axis, got {grid_per_axis}")));
    }
    zak_inner_product_unchecked(f1, f2, m, grid_per_axis)
}

/// As [`zak_inner_product`] without the minimum-resolution guard (used for refinement studies).
pub fn zak_inner_product_unchecked(f1: &TestFunction, f2: &TestFunction, m: i64, grid: usize) -> Result<Complex64> {
    let n = f1.dimension;
    if f2.dimension != n {
        return Err(Error::DimensionMismatch { expected: n, got: f2.dimension });
    }
    if m == 0 {
        return Err(Error::ZeroCentralFrequency);
    }
    let k1 = zak_truncation(f1, &vec![1.0; n]);
    let k2 = zak_truncation(f2, &vec![1.0; n]);
    let cube = Aabb::new(vec![0.0; 2 * n + 1], vec![1.0; 2 * n + 1])?;
    Ok(midpoint(&cube, grid, |c| {
        let x = HeisPoint::from_slice(c).expect("odd length");
        zak_sum(f1, m, &x, k1) * zak_sum(f2, m, &x, k2).conj()
    }))
}
