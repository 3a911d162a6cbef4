//! Numeric substrate shared by every experiment: axis boxes, symbolic test
//! functions with closed-form integrals, tensor quadrature, reproducible RNG
//! substreams and Monte-Carlo statistics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value below which a Gaussian is treated as zero.
pub const GAUSSIAN_CUTOFF: f64 = 1e-12;

/// Explicit tolerance defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub z_multiplier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quadrature: 1e-6, z_multiplier: 3.0 }
    }
}

/// Axis-aligned box `[lo, hi)` (half-open when used as a region).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter(format!("box {lo:?}..{hi:?} is not bounded and ordered")));
        }
        Ok(Aabb { lo, hi })
    }

    /// The cube `[-r, r)^dim`.
    pub fn cube(dim: usize, r: f64) -> Self {
        Aabb { lo: vec![-r; dim], hi: vec![r; dim] }
    }

    /// A zero-dimensional box; contains the unique point of R^0 and has volume 1.
    pub fn point0() -> Self {
        Aabb { lo: vec![], hi: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Half-open membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v < *b)
    }

    /// Closed membership.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.dim() == other.dim()
            && self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| a >= b)
    }

    pub fn translate(&self, by: &[f64]) -> Aabb {
        Aabb {
            lo: self.lo.iter().zip(by).map(|(a, d)| a + d).collect(),
            hi: self.hi.iter().zip(by).map(|(a, d)| a + d).collect(),
        }
    }

    pub fn inflate(&self, r: f64) -> Aabb {
        Aabb { lo: self.lo.iter().map(|a| a - r).collect(), hi: self.hi.iter().map(|a| a + r).collect() }
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.iter().chain(&other.lo).copied().collect(),
            hi: self.hi.iter().chain(&other.hi).copied().collect(),
        }
    }

    pub fn select(&self, axes: &[usize]) -> Aabb {
        Aabb { lo: axes.iter().map(|&i| self.lo[i]).collect(), hi: axes.iter().map(|&i| self.hi[i]).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Gaussian,
    Box,
    Triangle,
    ModulatedGaussian,
}

/// Symbolic test function with closed-form integral and L² norm.
///
/// * `Gaussian`: `a · exp(-π |x - c|² / s²)`
/// * `Box`: `a · 1{|x_i - c_i| <= s for all i}`
/// * `Triangle`: `a · Π max(0, 1 - |x_i - c_i| / s)`
/// * `ModulatedGaussian`: the Gaussian times `exp(2πi ⟨ω, x - c⟩)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: TestKind,
    pub dimension: usize,
    pub center: Vec<f64>,
    pub scale: f64,
    #[serde(default)]
    pub frequency: Vec<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl TestFunction {
    pub fn new(kind: TestKind, center: Vec<f64>, scale: f64, frequency: Vec<f64>) -> Result<Self> {
        let dimension = center.len();
        if dimension == 0 {
            return Err(Error::InvalidParameter("test function dimension must be positive".into()));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        match kind {
            TestKind::ModulatedGaussian if frequency.len() != dimension => {
                return Err(Error::DimensionMismatch { expected: dimension, got: frequency.len() })
            }
            TestKind::ModulatedGaussian => {}
            _ if !frequency.is_empty() => {
                return Err(Error::InvalidParameter("frequency is only used by the modulated kind".into()))
            }
            _ => {}
        }
        Ok(TestFunction { kind, dimension, center, scale, frequency, amplitude: 1.0 })
    }

    pub fn gaussian(center: Vec<f64>, scale: f64) -> Result<Self> {
        Self::new(TestKind::Gaussian, center, scale, vec![])
    }

    /// Standard Gaussian `exp(-π|x|²)` in `dim` dimensions.
    pub fn standard_gaussian(dim: usize) -> Self {
        Self::gaussian(vec![0.0; dim], 1.0).expect("valid")
    }

    pub fn box_indicator(center: Vec<f64>, half_width: f64) -> Result<Self> {
        Self::new(TestKind::Box, center, half_width, vec![])
    }

    pub fn triangle(center: Vec<f64>, half_width: f64) -> Result<Self> {
        Self::new(TestKind::Triangle, center, half_width, vec![])
    }

    pub fn modulated_gaussian(center: Vec<f64>, scale: f64, frequency: Vec<f64>) -> Result<Self> {
        Self::new(TestKind::ModulatedGaussian, center, scale, frequency)
    }

    /// The zero function of the given dimension.
    pub fn zero(dim: usize) -> Self {
        Self::standard_gaussian(dim).scaled(0.0)
    }

    pub fn scaled(mut self, amplitude: f64) -> Self {
        self.amplitude *= amplitude;
        self
    }

    pub fn is_real(&self) -> bool {
        self.kind != TestKind::ModulatedGaussian
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the dimension check; hot loops only.
    pub fn eval_unchecked(&self, x: &[f64]) -> Complex64 {
        let s = self.scale;
        let a = self.amplitude;
        match self.kind {
            TestKind::Gaussian => Complex64::new(a * (-PI * self.dist_sq(x) / (s * s)).exp(), 0.0),
            TestKind::Box => {
                let inside = x.iter().zip(&self.center).all(|(v, c)| (v - c).abs() <= s);
                Complex64::new(if inside { a } else { 0.0 }, 0.0)
            }
            TestKind::Triangle => {
                let v: f64 = x.iter().zip(&self.center).map(|(v, c)| (1.0 - (v - c).abs() / s).max(0.0)).product();
                Complex64::new(a * v, 0.0)
            }
            TestKind::ModulatedGaussian => {
                let env = a * (-PI * self.dist_sq(x) / (s * s)).exp();
                let phase: f64 =
                    2.0 * PI * x.iter().zip(&self.center).zip(&self.frequency).map(|((v, c), w)| (v - c) * w).sum::<f64>();
                Complex64::from_polar(env, phase)
            }
        }
    }

    /// Real part of the value; exact for the real kinds.
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x).re
    }

    fn dist_sq(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(v, c)| (v - c) * (v - c)).sum()
    }

    /// `∫ f` in closed form.
    pub fn integral(&self) -> f64 {
        let d = self.dimension as i32;
        let s = self.scale;
        let a = self.amplitude;
        match self.kind {
            TestKind::Gaussian => a * s.powi(d),
            TestKind::Box => a * (2.0 * s).powi(d),
            TestKind::Triangle => a * s.powi(d),
            TestKind::ModulatedGaussian => {
                let w2: f64 = self.frequency.iter().map(|w| w * w).sum();
                a * s.powi(d) * (-PI * s * s * w2).exp()
            }
        }
    }

    /// `∫ |f|²` in closed form.
    pub fn l2_norm_sq(&self) -> f64 {
        let d = self.dimension as i32;
        let s = self.scale;
        let a2 = self.amplitude * self.amplitude;
        match self.kind {
            TestKind::Gaussian | TestKind::ModulatedGaussian => a2 * (s / 2f64.sqrt()).powi(d),
            TestKind::Box => a2 * (2.0 * s).powi(d),
            TestKind::Triangle => a2 * (2.0 * s / 3.0).powi(d),
        }
    }

    /// Radius (per axis) beyond which the function vanishes, or drops below
    /// [`GAUSSIAN_CUTOFF`] for the Gaussian kinds.
    pub fn truncation_radius(&self) -> f64 {
        match self.kind {
            TestKind::Gaussian | TestKind::ModulatedGaussian => {
                self.scale * (GAUSSIAN_CUTOFF.recip().ln() / PI).sqrt()
            }
            TestKind::Box | TestKind::Triangle => self.scale,
        }
    }

    /// Bounding box of the (truncated) support.
    pub fn support_box(&self) -> Aabb {
        let r = self.truncation_radius();
        Aabb {
            lo: self.center.iter().map(|c| c - r).collect(),
            hi: self.center.iter().map(|c| c + r).collect(),
        }
    }
}

/// Tensor midpoint rule with `n` cells per axis.
pub fn midpoint<F>(bx: &Aabb, n: usize, f: F) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    tensor_rule(bx, n, &[0.5], &[1.0], f)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre rule with `cells` cells per axis.
/// Exact for piecewise polynomials of degree ≤ 9 whose breakpoints lie on cell faces.
pub fn gauss_legendre<F>(bx: &Aabb, cells: usize, f: F) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let nodes: Vec<f64> = GL5_NODES.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights: Vec<f64> = GL5_WEIGHTS.iter().map(|w| 0.5 * w).collect();
    tensor_rule(bx, cells, &nodes, &weights, f)
}

/// Tensor product of a unit-cell rule `(nodes, weights)` on `[0,1]`, replicated over `n` cells per axis.
fn tensor_rule<F>(bx: &Aabb, n: usize, nodes: &[f64], weights: &[f64], f: F) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let d = bx.dim();
    if d == 0 {
        return f(&[]);
    }
    let h: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(a, b)| (b - a) / n as f64).collect();
    let per_axis = n * nodes.len();
    let axis_pts: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|i| {
            (0..n)
                .flat_map(|c| {
                    let hi = h[i];
                    let lo = bx.lo[i];
                    nodes.iter().zip(weights).map(move |(x, w)| (lo + (c as f64 + x) * hi, w * hi))
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut w = 1.0;
        for i in 0..d {
            let (xi, wi) = axis_pts[i][idx[i]];
            x[i] = xi;
            w *= wi;
        }
        acc += f(&x) * w;
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return acc;
            }
        }
    }
}

/// Counter-based reproducible stream: `(seed, index)` fully determines the sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RngStream { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Independent child stream keyed by `tag`.
    pub fn fork(&self, tag: u64) -> RngStream {
        RngStream::new(splitmix64(self.seed ^ splitmix64(self.index.wrapping_add(0x9E37_79B9_7F4A_7C15))), tag)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_f64()).collect()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

pub fn rng_uniform(stream: &mut RngStream, n: usize) -> Vec<f64> {
    stream.uniform(n)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample mean and standard error `s / sqrt(n)` (unbiased `s`). A single sample has stderr 0.
pub fn mc_stats(samples: &[Complex64]) -> Result<(Complex64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<Complex64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = samples.iter().map(|z| (z - mean).norm_sqr()).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt() / n.sqrt()))
}

pub fn mc_stats_real(samples: &[f64]) -> Result<(f64, f64)> {
    let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let (m, s) = mc_stats(&c)?;
    Ok((m.re, s))
}

/// Monte-Carlo comparison of a sample mean against a reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n_samples: usize,
    pub mean: Complex64,
    pub stderr: f64,
    pub reference_value: Complex64,
    pub z_score: f64,
    pub tolerance_multiplier: f64,
    /// Additive slack on top of `tolerance_multiplier · stderr`.
    pub slack: f64,
    pub pass: bool,
}

impl McReport {
    pub fn compare(samples: &[Complex64], reference: Complex64, multiplier: f64, slack: f64) -> Result<Self> {
        let (mean, stderr) = mc_stats(samples)?;
        Ok(Self::from_stats(samples.len(), mean, stderr, reference, multiplier, slack))
    }

    pub fn compare_real(samples: &[f64], reference: f64, multiplier: f64, slack: f64) -> Result<Self> {
        let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::compare(&c, Complex64::new(reference, 0.0), multiplier, slack)
    }

    pub fn from_stats(
        n_samples: usize,
        mean: Complex64,
        stderr: f64,
        reference: Complex64,
        multiplier: f64,
        slack: f64,
    ) -> Self {
        let diff = (mean - reference).norm();
        let z_score = if stderr > 0.0 {
            diff / stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        McReport {
            n_samples,
            mean,
            stderr,
            reference_value: reference,
            z_score,
            tolerance_multiplier: multiplier,
            slack,
            pass: diff <= multiplier * stderr + slack,
        }
    }
}

/// Deterministic parallel map over sample indices; sample `i` draws from `RngStream::new(seed, i)`.
/// Output order is the index order regardless of scheduling.
pub fn mc_map<T, F>(seed: u64, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut RngStream) -> Result<T> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = RngStream::new(seed, i);
            f(i, &mut s)
        })
        .collect()
}
