//! Euclidean cut-and-project schemes: lattice enumeration, model sets, the
//! torus hull and Meyer-property checks.
//!
//! Conventions: a hull point is `x = Γ(g1, g2)`, the group acts by
//! `g.x = Γ(g1 - g, g2)` and `P_x = {γ1 + g1 : γ2 + g2 ∈ W}`, so that
//! `P_{g.x} = P_x - g`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Aabb, RngStream};

/// Default cap on the number of outer coefficient tuples visited by an enumeration.
pub const ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CutProjectScheme {
    pub phys_dim: usize,
    pub internal_dim: usize,
    /// Columns generate Γ ⊂ ℝ^d × ℝ^m; the first `phys_dim` rows are physical.
    pub basis: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub covolume: f64,
}

impl CutProjectScheme {
    pub fn new(phys_dim: usize, internal_dim: usize, basis: DMatrix<f64>) -> Result<Self> {
        let n = phys_dim + internal_dim;
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: basis.nrows().max(basis.ncols()) });
        }
        let covolume = basis.determinant().abs();
        if !(covolume > 1e-12) || !covolume.is_finite() {
            return Err(Error::SingularBasis);
        }
        let inverse = basis.clone().try_inverse().ok_or(Error::SingularBasis)?;
        Ok(CutProjectScheme { phys_dim, internal_dim, basis, inverse, covolume })
    }

    /// `Γ = {(a + b√2, a − b√2)}` in ℝ × ℝ.
    pub fn zsqrt2() -> Self {
        let r = 2f64.sqrt();
        Self::new(1, 1, DMatrix::from_row_slice(2, 2, &[1.0, r, 1.0, -r])).expect("valid basis")
    }

    /// `Γ = {(γ, γ*) : γ ∈ ℤ[√2]²}` with coordinates ordered `(x1, x2, x1*, x2*)`.
    pub fn zsqrt2_squared() -> Self {
        let r = 2f64.sqrt();
        #[rustfmt::skip]
        let b = DMatrix::from_row_slice(4, 4, &[
            1.0, r,   0.0, 0.0,
            0.0, 0.0, 1.0, r,
            1.0, -r,  0.0, 0.0,
            0.0, 0.0, 1.0, -r,
        ]);
        Self::new(2, 2, b).expect("valid basis")
    }

    /// `ℤ^d` with trivial internal space.
    pub fn integer(d: usize) -> Self {
        Self::new(d, 0, DMatrix::identity(d, d)).expect("valid basis")
    }

    /// The dual scheme, generated by the columns of `B^{-T}`.
    pub fn dual(&self) -> Self {
        Self::new(self.phys_dim, self.internal_dim, self.inverse.transpose()).expect("dual of a valid basis")
    }

    pub fn total_dim(&self) -> usize {
        self.phys_dim + self.internal_dim
    }

    /// Lattice vector `B n`.
    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let n = self.total_dim();
        (0..n).map(|r| (0..n).map(|c| self.basis[(r, c)] * coeffs[c] as f64).sum()).collect()
    }

    /// Lattice coordinates `B^{-1} x`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let n = self.total_dim();
        (0..n).map(|r| (0..n).map(|c| self.inverse[(r, c)] * x[c]).sum()).collect()
    }

    /// All `(coefficients, point)` of Γ inside the closed box `bx ⊂ ℝ^{d+m}`.
    pub fn lattice_points_in_box(&self, bx: &Aabb, cap: u128) -> Result<Vec<(Vec<i64>, Vec<f64>)>> {
        let n = self.total_dim();
        if bx.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: bx.dim() });
        }
        if n == 0 {
            return Ok(vec![(vec![], vec![])]);
        }
        // Coefficient ranges from the images of the box corners, inflated by 1.
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        let mut corner = vec![0.0; n];
        for mask in 0u32..(1 << n) {
            for i in 0..n {
                corner[i] = if mask >> i & 1 == 1 { bx.hi[i] } else { bx.lo[i] };
            }
            for (i, c) in self.coordinates(&corner).into_iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let lo: Vec<i64> = lo.iter().map(|v| v.floor() as i64 - 1).collect();
        let hi: Vec<i64> = hi.iter().map(|v| v.ceil() as i64 + 1).collect();
        // The widest coefficient is solved as an interval for each choice of the others.
        let solve = (0..n).max_by_key(|&i| hi[i] - lo[i]).unwrap_or(0);
        let outer: u128 = (0..n).filter(|&i| i != solve).map(|i| (hi[i] - lo[i] + 1) as u128).product();
        if outer > cap {
            return Err(Error::EnumerationCap { needed: outer, cap });
        }
        let col = |c: usize| -> Vec<f64> { (0..n).map(|r| self.basis[(r, c)]).collect() };
        let bj = col(solve);
        let cols: Vec<Vec<f64>> = (0..n).map(col).collect();

        let mut out = Vec::new();
        let mut coeffs: Vec<i64> = lo.clone();
        coeffs[solve] = 0;
        let others: Vec<usize> = (0..n).filter(|&i| i != solve).collect();
        let mut x0 = vec![0.0; n];
        loop {
            x0.iter_mut().for_each(|v| *v = 0.0);
            for &i in &others {
                let k = coeffs[i] as f64;
                for r in 0..n {
                    x0[r] += k * cols[i][r];
                }
            }
            let (mut tlo, mut thi) = (lo[solve] as f64, hi[solve] as f64);
            for r in 0..n {
                let b = bj[r];
                if b.abs() < 1e-14 {
                    if x0[r] < bx.lo[r] - 1e-9 || x0[r] > bx.hi[r] + 1e-9 {
                        thi = f64::NEG_INFINITY;
                    }
                    continue;
                }
                let (a0, a1) = ((bx.lo[r] - x0[r]) / b, (bx.hi[r] - x0[r]) / b);
                tlo = tlo.max(a0.min(a1));
                thi = thi.min(a0.max(a1));
            }
            if tlo <= thi + 2.0 {
                for k in (tlo.floor() as i64 - 1)..=(thi.ceil() as i64 + 1) {
                    let x: Vec<f64> = (0..n).map(|r| x0[r] + k as f64 * bj[r]).collect();
                    if bx.contains_closed(&x) {
                        let mut c = coeffs.clone();
                        c[solve] = k;
                        out.push((c, x));
                    }
                }
            }
            // Odometer over the outer coefficients.
            let mut advanced = false;
            for &i in &others {
                coeffs[i] += 1;
                if coeffs[i] <= hi[i] {
                    advanced = true;
                    break;
                }
                coeffs[i] = lo[i];
            }
            if !advanced {
                break;
            }
        }
        Ok(out)
    }

    fn split(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (x[..self.phys_dim].to_vec(), x[self.phys_dim..].to_vec())
    }
}

/// Finite union of disjoint closed boxes in the internal space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub dim: usize,
    pub boxes: Vec<Aabb>,
}

impl Window {
    pub fn new(dim: usize, boxes: Vec<Aabb>) -> Result<Self> {
        for b in &boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
            }
            if b.volume() <= 0.0 && dim > 0 {
                return Err(Error::InvalidParameter("window boxes must have non-empty interior".into()));
            }
        }
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                let overlap = (0..dim).all(|k| a.lo[k] < b.hi[k] && b.lo[k] < a.hi[k]);
                if overlap {
                    return Err(Error::InvalidParameter("window boxes overlap".into()));
                }
            }
        }
        Ok(Window { dim, boxes })
    }

    pub fn from_box(b: Aabb) -> Result<Self> {
        Self::new(b.dim(), vec![b])
    }

    /// The centred cube `[-r, r]^dim`.
    pub fn cube(dim: usize, r: f64) -> Self {
        Self::new(dim, vec![Aabb::cube(dim, r)]).expect("valid cube")
    }

    /// Window of a trivial internal space (selects every lattice point).
    pub fn trivial() -> Self {
        Window { dim: 0, boxes: vec![Aabb::point0()] }
    }

    pub fn empty(dim: usize) -> Self {
        Window { dim, boxes: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(Aabb::volume).sum()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains_closed(w))
    }

    /// Minkowski difference `W − W` of a single-box window.
    pub fn difference(&self) -> Result<Window> {
        match self.boxes.as_slice() {
            [] => Ok(self.clone()),
            [b] => Window::from_box(Aabb {
                lo: b.lo.iter().zip(&b.hi).map(|(l, h)| l - h).collect(),
                hi: b.hi.iter().zip(&b.lo).map(|(h, l)| h - l).collect(),
            }),
            _ => Err(Error::UnsupportedMode("difference window of a multi-box window".into())),
        }
    }
}

/// Finite point set in a declared half-open region, points sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub region: Aabb,
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

impl PointSet {
    pub fn new(region: Aabb, mut points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = region.dim();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if !region.contains(p) {
                return Err(Error::PointOutsideRegion(p.clone()));
            }
        }
        points.sort_by(|a, b| lex(a, b));
        Ok(PointSet { dim, points, region })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimal pairwise Euclidean distance (`+∞` for fewer than two points).
    pub fn separation(&self) -> f64 {
        min_gap(&self.points)
    }

    pub fn translate(&self, by: &[f64]) -> PointSet {
        PointSet {
            dim: self.dim,
            points: self.points.iter().map(|p| p.iter().zip(by).map(|(a, b)| a + b).collect()).collect(),
            region: self.region.translate(by),
        }
    }

    /// Points inside a sub-box (half-open), keeping the sub-box as region.
    pub fn restrict(&self, bx: &Aabb) -> PointSet {
        PointSet {
            dim: self.dim,
            points: self.points.iter().filter(|p| bx.contains(p)).cloned().collect(),
            region: bx.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = (1..=self.dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        s.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Minimal pairwise distance by a sweep along the first coordinate.
pub fn min_gap(points: &[Vec<f64>]) -> f64 {
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[j][0] - pts[i][0] >= best {
                break;
            }
            let d = pts[i].iter().zip(pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Torus coordinates of a hull point `Γ(g1, g2)` with respect to the lattice basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPoint {
    pub coefficients: Vec<f64>,
}

impl HullPoint {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(Error::InvalidParameter(format!("hull coefficients {coefficients:?} not in [0,1)")));
        }
        Ok(HullPoint { coefficients })
    }

    pub fn origin(dim: usize) -> Self {
        HullPoint { coefficients: vec![0.0; dim] }
    }

    /// Reduce arbitrary real coordinates into the half-open unit cube.
    pub fn reduce(coeffs: Vec<f64>) -> Self {
        HullPoint { coefficients: coeffs.into_iter().map(frac).collect() }
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `{γ1 : γ ∈ Γ, γ1 ∈ region, γ2 ∈ W}` as (physical, internal) pairs.
pub fn enumerate_gamma(
    scheme: &CutProjectScheme,
    phys_region: &Aabb,
    window: &Window,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let zero = vec![0.0; scheme.internal_dim];
    let out = enumerate_shifted(scheme, phys_region, window, &vec![0.0; scheme.phys_dim], &zero, ENUMERATION_CAP)?;
    Ok(out.into_iter().map(|(_, g1, g2)| (g1, g2)).collect())
}

/// Lattice points γ with `γ1 + g1 ∈ region` (half-open) and `γ2 + g2 ∈ W`,
/// returned as (coefficients, γ1, γ2), deduplicated and sorted by γ1.
pub fn enumerate_shifted(
    scheme: &CutProjectScheme,
    region: &Aabb,
    window: &Window,
    g1: &[f64],
    g2: &[f64],
    cap: u128,
) -> Result<Vec<(Vec<i64>, Vec<f64>, Vec<f64>)>> {
    if region.dim() != scheme.phys_dim || g1.len() != scheme.phys_dim {
        return Err(Error::DimensionMismatch { expected: scheme.phys_dim, got: region.dim() });
    }
    if window.dim != scheme.internal_dim || g2.len() != scheme.internal_dim {
        return Err(Error::DimensionMismatch { expected: scheme.internal_dim, got: window.dim });
    }
    let neg1: Vec<f64> = g1.iter().map(|v| -v).collect();
    let neg2: Vec<f64> = g2.iter().map(|v| -v).collect();
    let phys = region.translate(&neg1);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for wb in &window.boxes {
        let bx = phys.product(&wb.translate(&neg2));
        for (c, x) in scheme.lattice_points_in_box(&bx, cap)? {
            let (y1, y2) = scheme.split(&x);
            let p: Vec<f64> = y1.iter().zip(g1).map(|(a, b)| a + b).collect();
            let w: Vec<f64> = y2.iter().zip(g2).map(|(a, b)| a + b).collect();
            if region.contains(&p) && window.contains(&w) && seen.insert(c.clone()) {
                out.push((c, y1, y2));
            }
        }
    }
    out.sort_by(|a, b| lex(&a.1, &b.1));
    Ok(out)
}

/// `P(W, g1, g2) ∩ region = {γ1 + g1 : γ2 + g2 ∈ W} ∩ region`.
pub fn cut_and_project(
    scheme: &CutProjectScheme,
    window: &Window,
    g1: &[f64],
    g2: &[f64],
    region: &Aabb,
) -> Result<PointSet> {
    let pts = enumerate_shifted(scheme, region, window, g1, g2, ENUMERATION_CAP)?;
    let points = pts.into_iter().map(|(_, y1, _)| y1.iter().zip(g1).map(|(a, b)| a + b).collect()).collect();
    PointSet::new(region.clone(), points)
}

/// Haar sample of the torus `Γ\(ℝ^d × ℝ^m)`.
pub fn sample_hull(scheme: &CutProjectScheme, stream: &mut RngStream) -> HullPoint {
    HullPoint { coefficients: stream.uniform(scheme.total_dim()) }
}

/// `(g1, g2) = B c`.
pub fn hull_coordinates(scheme: &CutProjectScheme, h: &HullPoint) -> (Vec<f64>, Vec<f64>) {
    let n = scheme.total_dim();
    let x: Vec<f64> = (0..n).map(|r| (0..n).map(|c| scheme.basis[(r, c)] * h.coefficients[c]).sum()).collect();
    scheme.split(&x)
}

/// Hull point `Γ(g1, g2)`.
pub fn hull_point_of(scheme: &CutProjectScheme, g1: &[f64], g2: &[f64]) -> HullPoint {
    let x: Vec<f64> = g1.iter().chain(g2).copied().collect();
    HullPoint::reduce(scheme.coordinates(&x))
}

pub fn pointset_of_hull(scheme: &CutProjectScheme, window: &Window, h: &HullPoint, region: &Aabb) -> Result<PointSet> {
    if h.coefficients.len() != scheme.total_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.total_dim(), got: h.coefficients.len() });
    }
    let (g1, g2) = hull_coordinates(scheme, h);
    cut_and_project(scheme, window, &g1, &g2, region)
}

/// `g.x = Γ(g1 − g, g2)`; satisfies `P_{g.x} = P_x − g`.
pub fn act(scheme: &CutProjectScheme, g: &[f64], h: &HullPoint) -> HullPoint {
    let (g1, g2) = hull_coordinates(scheme, h);
    let g1: Vec<f64> = g1.iter().zip(g).map(|(a, b)| a - b).collect();
    hull_point_of(scheme, &g1, &g2)
}

pub fn density(ps: &PointSet) -> Result<f64> {
    let v = ps.region.volume();
    if !(v > 0.0) {
        return Err(Error::ZeroVolume);
    }
    Ok(ps.len() as f64 / v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeyerReport {
    pub uniformly_discrete: bool,
    pub min_gap: f64,
    pub difference_set_min_gap: f64,
    pub difference_set_size: usize,
    pub meyer: bool,
}

/// Minimal gaps of `ps` and of its (deduplicated) difference set `ps − ps`.
pub fn check_meyer(ps: &PointSet, r_test: f64) -> Result<MeyerReport> {
    const MAX_POINTS: usize = 4000;
    if ps.len() > MAX_POINTS {
        return Err(Error::InvalidParameter(format!(
            "difference set of {} points exceeds the {MAX_POINTS}-point limit",
            ps.len()
        )));
    }
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(ps.len() * ps.len());
    for p in &ps.points {
        for q in &ps.points {
            diffs.push(p.iter().zip(q).map(|(a, b)| a - b).collect());
        }
    }
    diffs.sort_by(|a, b| lex(a, b));
    diffs.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-9));
    let min_gap = ps.separation();
    let dgap = min_gap_of(&diffs);
    Ok(MeyerReport {
        uniformly_discrete: min_gap > r_test,
        min_gap,
        difference_set_min_gap: dgap,
        difference_set_size: diffs.len(),
        meyer: min_gap > r_test && dgap > r_test,
    })
}

fn min_gap_of(points: &[Vec<f64>]) -> f64 {
    if points.first().is_some_and(|p| p.len() == 1) {
        let mut v: Vec<f64> = points.iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        return v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    }
    min_gap(points)
}

/// A character of the torus `Γ\(ℝ^d×ℝ^m)`: `x ↦ exp(2πi ⟨k, c(x)⟩)` for an integer vector `k`.
/// It is an exact eigenfunction of the translation action with frequency given by
/// [`TorusCharacter::phys_frequency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusCharacter {
    pub k: Vec<i64>,
}

impl TorusCharacter {
    pub fn eval(&self, h: &HullPoint) -> num_complex::Complex64 {
        let phase: f64 = self.k.iter().zip(&h.coefficients).map(|(k, c)| *k as f64 * c).sum();
        num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
    }

    /// Dual-lattice vector `B^{-T} k`; its physical part ω satisfies
    /// `χ(g.x) = exp(−2πi⟨ω, g⟩) χ(x)`.
    pub fn dual_vector(&self, scheme: &CutProjectScheme) -> Vec<f64> {
        scheme.dual().point(&self.k)
    }

    pub fn phys_frequency(&self, scheme: &CutProjectScheme) -> Vec<f64> {
        self.dual_vector(scheme)[..scheme.phys_dim].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQ2: f64 = std::f64::consts::SQRT_2;

    fn w1() -> Window {
        Window::cube(1, 1.0)
    }

    fn brute_zsqrt2(region: (f64, f64), w: (f64, f64), g1: f64, g2: f64) -> Vec<f64> {
        let mut v = vec![];
        for a in -60i64..=60 {
            for b in -60i64..=60 {
                let x = a as f64 + b as f64 * SQ2 + g1;
                let y = a as f64 - b as f64 * SQ2 + g2;
                if region.0 <= x && x < region.1 && w.0 <= y && y <= w.1 {
                    v.push(x);
                }
            }
        }
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn zsqrt2_covolume() {
        assert_relative_eq!(CutProjectScheme::zsqrt2().covolume, 2.0 * SQ2, max_relative = 1e-14);
        assert_relative_eq!(CutProjectScheme::zsqrt2_squared().covolume, 8.0, max_relative = 1e-14);
        assert!(matches!(CutProjectScheme::new(1, 1, DMatrix::zeros(2, 2)), Err(Error::SingularBasis)));
    }

    #[test]
    fn enumerate_contains_known_point() {
        let s = CutProjectScheme::zsqrt2();
        let pts = enumerate_gamma(&s, &Aabb::cube(1, 3.0), &w1()).unwrap();
        assert!(pts.iter().any(|(p, q)| (p[0] - (1.0 + SQ2)).abs() < 1e-12 && (q[0] - (1.0 - SQ2)).abs() < 1e-12));
        let brute = brute_zsqrt2((-3.0, 3.0), (-1.0, 1.0), 0.0, 0.0);
        let got: Vec<f64> = pts.iter().map(|p| p.0[0]).collect();
        assert_eq!(got.len(), brute.len());
        for (a, b) in got.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn enumerate_empty_and_symmetric() {
        let s = CutProjectScheme::zsqrt2();
        assert!(enumerate_gamma(&s, &Aabb::cube(1, 3.0), &Window::empty(1)).unwrap().is_empty());
        let pts = enumerate_gamma(&s, &Aabb::new(vec![-5.0], vec![5.0 + 1e-9]).unwrap(), &w1()).unwrap();
        for (p, q) in &pts {
            assert!(pts.iter().any(|(a, b)| (a[0] + p[0]).abs() < 1e-12 && (b[0] + q[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let s = CutProjectScheme::zsqrt2_squared();
        let r = Aabb::cube(2, 1e5);
        let err = enumerate_gamma(&s, &r, &Window::cube(2, 1e3)).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { .. }));
    }

    #[test]
    fn cut_and_project_translation_covariance() {
        let s = CutProjectScheme::zsqrt2();
        let region = Aabb::new(vec![-20.0], vec![20.0]).unwrap();
        let base = cut_and_project(&s, &w1(), &[0.0], &[0.3], &region).unwrap();
        let shifted = cut_and_project(&s, &w1(), &[0.77], &[0.3], &region).unwrap();
        let inner = Aabb::new(vec![-15.0], vec![15.0]).unwrap();
        let a = shifted.restrict(&inner);
        let b = base.translate(&[0.77]).restrict(&inner);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p[0] - q[0]).abs() < 1e-12);
        }
        // A g2-shift is a window shift.
        let brute = brute_zsqrt2((-20.0, 20.0), (-1.3, 0.7), 0.0, 0.0);
        assert_eq!(base.len(), brute.len());
    }

    #[test]
    fn hull_origin_and_equivariance() {
        let s = CutProjectScheme::zsqrt2();
        let region = Aabb::new(vec![-10.0], vec![10.0]).unwrap();
        let p0 = pointset_of_hull(&s, &w1(), &HullPoint::origin(2), &region).unwrap();
        let direct = cut_and_project(&s, &w1(), &[0.0], &[0.0], &region).unwrap();
        assert_eq!(p0, direct);
        let mut st = RngStream::new(1, 0);
        let h = sample_hull(&s, &mut st);
        let g = [1.234];
        let moved = act(&s, &g, &h);
        let a = pointset_of_hull(&s, &w1(), &moved, &region).unwrap();
        let b = pointset_of_hull(&s, &w1(), &h, &region.translate(&g)).unwrap().translate(&[-g[0]]);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p[0] - q[0]).abs() < 1e-9);
        }
        assert!(pointset_of_hull(&s, &Window::empty(1), &h, &region).unwrap().is_empty());
    }

    #[test]
    fn hull_samples_in_unit_cube() {
        let s = CutProjectScheme::zsqrt2_squared();
        let mut st = RngStream::new(2, 5);
        for _ in 0..1000 {
            let h = sample_hull(&s, &mut st);
            assert!(HullPoint::new(h.coefficients).is_ok());
        }
        assert_eq!(sample_hull(&s, &mut RngStream::new(4, 4)), sample_hull(&s, &mut RngStream::new(4, 4)));
    }

    #[test]
    fn density_examples() {
        let s = CutProjectScheme::zsqrt2();
        let region = Aabb::new(vec![-1e4], vec![1e4]).unwrap();
        let ps = cut_and_project(&s, &w1(), &[0.0], &[0.0], &region).unwrap();
        let d = density(&ps).unwrap();
        assert!((d - 1.0 / SQ2).abs() / (1.0 / SQ2) < 5e-3, "{d}");

        let z = CutProjectScheme::integer(1);
        let ps = cut_and_project(&z, &Window::trivial(), &[0.0], &[], &Aabb::new(vec![0.0], vec![1e3]).unwrap())
            .unwrap();
        assert_eq!(ps.len(), 1000);
        assert_eq!(density(&ps).unwrap(), 1.0);
        let flat = PointSet::new(Aabb::new(vec![0.0], vec![0.0]).unwrap(), vec![]).unwrap();
        assert_eq!(density(&flat), Err(Error::ZeroVolume));
    }

    #[test]
    fn meyer_examples() {
        let z = CutProjectScheme::integer(1);
        let ps = cut_and_project(&z, &Window::trivial(), &[0.0], &[], &Aabb::new(vec![0.0], vec![50.0]).unwrap())
            .unwrap();
        let r = check_meyer(&ps, 0.5).unwrap();
        assert_eq!((r.min_gap, r.difference_set_min_gap), (1.0, 1.0));
        assert!(r.meyer);

        let s = CutProjectScheme::zsqrt2();
        let region = Aabb::new(vec![-30.0], vec![30.0]).unwrap();
        let ps = cut_and_project(&s, &w1(), &[0.0], &[0.0], &region).unwrap();
        let r = check_meyer(&ps, 0.1).unwrap();
        assert!(r.meyer && r.difference_set_min_gap > 0.1);
        // The difference set is the window set of W − W.
        let diff_w = w1().difference().unwrap();
        let wide = cut_and_project(&s, &diff_w, &[0.0], &[0.0], &Aabb::new(vec![-10.0], vec![10.0]).unwrap()).unwrap();
        let mut d: Vec<f64> = ps.points.iter().flat_map(|p| ps.points.iter().map(move |q| p[0] - q[0])).collect();
        d.retain(|x| (-10.0..10.0).contains(x));
        d.sort_by(f64::total_cmp);
        d.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(d.len(), wide.len());

        let pts: Vec<Vec<f64>> = (2..=100).map(|n| vec![n as f64 + 1.0 / n as f64]).collect();
        let ps = PointSet::new(Aabb::new(vec![0.0], vec![200.0]).unwrap(), pts).unwrap();
        let r = check_meyer(&ps, 1e-3).unwrap();
        assert!(r.uniformly_discrete && !r.meyer, "{r:?}");
    }

    #[test]
    fn csv_format() {
        let ps = PointSet::new(Aabb::cube(2, 2.0), vec![vec![1.0, 0.5], vec![-1.0, 0.0]]).unwrap();
        let csv = ps.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x1,x2");
        assert_eq!(lines[1], "-1.0000000000000000e0,0.0000000000000000e0");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn torus_character_is_an_eigenfunction() {
        let s = CutProjectScheme::zsqrt2_squared();
        let chi = TorusCharacter { k: vec![1, -2, 0, 3] };
        let w = chi.phys_frequency(&s);
        let mut st = RngStream::new(8, 0);
        for _ in 0..50 {
            let h = sample_hull(&s, &mut st);
            let g = [st.uniform_in(-5.0, 5.0), st.uniform_in(-5.0, 5.0)];
            let lhs = chi.eval(&act(&s, &g, &h));
            let phase = -2.0 * std::f64::consts::PI * (w[0] * g[0] + w[1] * g[1]);
            let rhs = num_complex::Complex64::from_polar(1.0, phase) * chi.eval(&h);
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}
