//! ε-duals, sections of return-time systems, approximate eigenfunctions and
//! their Følner averages.
//!
//! A return-time system describes, for each `y` in a cross section `Y`, the
//! set `R(y) = P_y ∩ H` of return times in an abelian group `H ≅ ℝ^k`, with
//! `R(h^{-1}.y) = R(y) + h`. The approximate eigenfunction is
//! `φ_ξ(y) = ξ(p(y))`, `p(y)` the minimal-norm return time.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cps::{self, CutProjectScheme, HullPoint, Window};
use crate::error::{Error, Result};
use crate::numerics::Aabb;

/// Character `h ↦ exp(2πi⟨freq, h⟩)` of `ℝ^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HCharacter {
    pub freq: Vec<f64>,
}

impl HCharacter {
    pub fn new(freq: Vec<f64>) -> Self {
        HCharacter { freq }
    }

    pub fn trivial(k: usize) -> Self {
        HCharacter { freq: vec![0.0; k] }
    }

    pub fn eval(&self, h: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.freq.iter().zip(h).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn is_trivial(&self) -> bool {
        self.freq.iter().all(|f| *f == 0.0)
    }
}

/// `max_λ |ξ(λ) − 1|` over a finite set.
pub fn defect(freq: &[f64], points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|l| 2.0 * (PI * freq.iter().zip(l).map(|(a, b)| a * b).sum::<f64>()).sin().abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsDualQuery {
    pub lambda_points: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub candidates: Vec<Vec<f64>>,
    pub truncation_radius: f64,
}

impl EpsDualQuery {
    pub fn new(lambda_points: Vec<Vec<f64>>, epsilon: f64, candidates: Vec<Vec<f64>>, truncation_radius: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        if let Some(p) = lambda_points.iter().find(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt() > truncation_radius + 1e-9) {
            return Err(Error::PointOutsideRegion(p.clone()));
        }
        Ok(EpsDualQuery { lambda_points, epsilon, candidates, truncation_radius })
    }
}

/// An ε-dual member certified up to `truncation_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsDualMember {
    pub frequency: Vec<f64>,
    pub defect: f64,
    pub truncation_radius: f64,
}

pub fn epsilon_dual(q: &EpsDualQuery) -> Vec<EpsDualMember> {
    let mut out: Vec<EpsDualMember> = q
        .candidates
        .iter()
        .filter_map(|c| {
            let d = defect(c, &q.lambda_points);
            (d <= q.epsilon).then(|| EpsDualMember { frequency: c.clone(), defect: d, truncation_radius: q.truncation_radius })
        })
        .collect();
    out.sort_by(|a, b| {
        a.defect.total_cmp(&b.defect).then_with(|| {
            a.frequency.iter().zip(&b.frequency).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    out
}

/// Physical parts of dual-lattice vectors `(x, y)` with `x ∈ [lo, hi]` and `|y| ≤ y_max`
/// (1+1-dimensional schemes). For a window inside `[−ρ, ρ]`, `ξ = x` has defect at most
/// `2 sin(π ρ |y|)`.
pub fn dual_candidates(scheme: &CutProjectScheme, lo: f64, hi: f64, y_max: f64) -> Result<Vec<Vec<f64>>> {
    if scheme.phys_dim != 1 || scheme.internal_dim != 1 {
        return Err(Error::UnsupportedMode("dual candidates need a 1+1-dimensional scheme".into()));
    }
    let dual = scheme.dual();
    let bx = Aabb::new(vec![lo, -y_max], vec![hi, y_max])?;
    let mut v: Vec<Vec<f64>> = dual.lattice_points_in_box(&bx, cps::ENUMERATION_CAP)?.into_iter().map(|(_, x)| vec![x[0]]).collect();
    v.sort_by(|a, b| a[0].total_cmp(&b[0]));
    Ok(v)
}

/// Uniform grid `lo, lo + spacing, …, ≤ hi`.
pub fn grid_candidates(lo: f64, hi: f64, spacing: f64) -> Vec<Vec<f64>> {
    let n = ((hi - lo) / spacing).floor() as usize;
    (0..=n).map(|i| vec![lo + i as f64 * spacing]).collect()
}

/// Golden-section minimisation of the defect on `[a, b]` (1-D frequencies).
pub fn polish_golden(points: &[Vec<f64>], mut a: f64, mut b: f64, iterations: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| defect(&[x], points);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid search at `spacing`: each run of consecutive grid points with defect ≤ ε is
/// reported once, at its golden-section polished minimum.
pub fn grid_eps_dual(points: &[Vec<f64>], lo: f64, hi: f64, spacing: f64, epsilon: f64, truncation_radius: f64) -> Vec<EpsDualMember> {
    let grid = grid_candidates(lo, hi, spacing);
    let d: Vec<f64> = grid.iter().map(|x| defect(x, points)).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if d[i] > epsilon {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid.len() && d[i + 1] <= epsilon {
            i += 1;
        }
        let (x, dx) = polish_golden(points, grid[start][0] - spacing, grid[i][0] + spacing, 60);
        let (x, dx) = if dx <= epsilon { (x, dx) } else { (grid[start][0], d[start]) };
        out.push(EpsDualMember { frequency: vec![x], defect: dx, truncation_radius });
        i += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub max_gap: f64,
    pub gap_bound: f64,
    /// Location `(left, right)` of the widest gap.
    pub widest: (f64, f64),
    pub count: usize,
    pub pass: bool,
}

/// Largest gap between consecutive frequencies in `[lo, hi]`, window edges included.
pub fn check_relative_density(freqs: &[f64], lo: f64, hi: f64, gap_bound: f64) -> GapReport {
    let mut v: Vec<f64> = freqs.iter().copied().filter(|x| (lo..=hi).contains(x)).collect();
    v.sort_by(f64::total_cmp);
    let mut edges = vec![lo];
    edges.extend(&v);
    edges.push(hi);
    let mut widest = (lo, hi);
    let mut max_gap = 0.0;
    for w in edges.windows(2) {
        if w[1] - w[0] > max_gap {
            max_gap = w[1] - w[0];
            widest = (w[0], w[1]);
        }
    }
    GapReport { max_gap, gap_bound, widest, count: v.len(), pass: max_gap <= gap_bound }
}

/// CSV with columns `xi1..xik,defect,truncation_radius`.
pub fn eps_dual_csv(members: &[EpsDualMember]) -> String {
    let k = members.first().map_or(1, |m| m.frequency.len());
    let mut s: Vec<String> = (1..=k).map(|i| format!("xi{i}")).collect();
    s.push("defect".into());
    s.push("truncation_radius".into());
    let mut out = s.join(",");
    out.push('\n');
    for m in members {
        let mut row: Vec<String> = m.frequency.iter().map(|v| format!("{v:.16e}")).collect();
        row.push(format!("{:.16e}", m.defect));
        row.push(format!("{:.16e}", m.truncation_radius));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Cross section with return times in an abelian `H ≅ ℝ^k`.
pub trait ReturnTimes: Sync {
    type Point: Clone + Send + Sync;

    fn h_dim(&self) -> usize;

    /// `R(y) ∩ bx`.
    fn return_times(&self, y: &Self::Point, bx: &Aabb) -> Result<Vec<Vec<f64>>>;

    /// A representative of `h^{-1}.y`, so that `R(h^{-1}.y) = R(y) + h`.
    fn shifted(&self, y: &Self::Point, h: &[f64]) -> Self::Point;
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Greater)
}

const TIE_TOL: f64 = 1e-12;

/// The section value `p(y)`: minimal-norm return time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub element: Vec<f64>,
    pub norm: f64,
    /// Another return time had the same norm and was beaten by the lexicographic rule.
    pub tie_broken: bool,
    pub search_radius: f64,
}

/// Minimal-norm element, ties toward the lexicographically larger element.
pub fn select_min_norm(points: &[Vec<f64>]) -> Option<(Vec<f64>, f64, bool)> {
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for p in points {
        let n = norm(p);
        best = match best {
            None => Some((p.clone(), n, false)),
            Some((b, bn, tie)) => {
                if n < bn - TIE_TOL {
                    Some((p.clone(), n, false))
                } else if n <= bn + TIE_TOL {
                    if lex_greater(p, &b) {
                        Some((p.clone(), n.min(bn), true))
                    } else {
                        Some((b, bn, true))
                    }
                } else {
                    Some((b, bn, tie))
                }
            }
        };
    }
    best
}

/// Expanding search for `p(y)`; balls of radius `r` are searched inside cubes `[−r, r]^k`.
pub fn build_section<S: ReturnTimes>(sys: &S, y: &S::Point) -> Result<Section> {
    let k = sys.h_dim();
    let mut r = 1.0;
    while r <= 256.0 {
        let pts = sys.return_times(y, &Aabb::cube(k, r).inflate(TIE_TOL))?;
        let inside: Vec<Vec<f64>> = pts.into_iter().filter(|p| norm(p) <= r).collect();
        if let Some((element, n, tie)) = select_min_norm(&inside) {
            return Ok(Section { element, norm: n, tie_broken: tie, search_radius: r });
        }
        r *= 2.0;
    }
    Err(Error::NotInTransversal)
}

/// Equivariance defect `p(h^{-1}.y) − h − p(y)`, which lies in the difference set of `R(y)`.
pub fn section_defect<S: ReturnTimes>(sys: &S, y: &S::Point, h: &[f64]) -> Result<Vec<f64>> {
    let a = build_section(sys, &sys.shifted(y, h))?.element;
    let b = build_section(sys, y)?.element;
    Ok(a.iter().zip(h).zip(&b).map(|((a, h), b)| a - h - b).collect())
}

pub trait Eigenfunction<P>: Sync {
    fn eval(&self, y: &P) -> Result<Complex64>;
}

/// `φ_ξ(y) = ξ(p(y))`.
pub struct ApproxEigenfunction<'a, S> {
    pub sys: &'a S,
    pub xi: HCharacter,
}

impl<S: ReturnTimes> Eigenfunction<S::Point> for ApproxEigenfunction<'_, S> {
    fn eval(&self, y: &S::Point) -> Result<Complex64> {
        approx_eigenfunction(self.sys, &self.xi, y)
    }
}

pub fn approx_eigenfunction<S: ReturnTimes>(sys: &S, xi: &HCharacter, y: &S::Point) -> Result<Complex64> {
    Ok(xi.eval(&build_section(sys, y)?.element))
}

/// Constant eigenfunction of the trivial character.
pub struct UnitEigenfunction;

impl<P> Eigenfunction<P> for UnitEigenfunction {
    fn eval(&self, _: &P) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0))
    }
}

/// `|ψ(h^{-1}.y) − ξ(h) ψ(y)|`.
pub fn eigen_defect<S: ReturnTimes, E: Eigenfunction<S::Point>>(
    sys: &S,
    psi: &E,
    xi: &HCharacter,
    y: &S::Point,
    h: &[f64],
) -> Result<f64> {
    Ok((psi.eval(&sys.shifted(y, h))? - xi.eval(h) * psi.eval(y)?).norm())
}

/// Bucket grid for nearest-point queries.
struct NearestIndex<'a> {
    points: &'a [Vec<f64>],
    lo: Vec<f64>,
    cell: f64,
    dims: Vec<usize>,
    buckets: Vec<Vec<usize>>,
}

impl<'a> NearestIndex<'a> {
    fn new(points: &'a [Vec<f64>], bx: &Aabb, cell: f64) -> Self {
        let dims: Vec<usize> = bx.lo.iter().zip(&bx.hi).map(|(l, h)| (((h - l) / cell).ceil() as usize).max(1)).collect();
        let mut buckets = vec![Vec::new(); dims.iter().product()];
        let mut idx = NearestIndex { points, lo: bx.lo.clone(), cell, dims, buckets: vec![] };
        for (i, p) in points.iter().enumerate() {
            let c = idx.cell_of(p);
            buckets[idx.flat(&c)].push(i);
        }
        idx.buckets = buckets;
        idx
    }

    fn cell_of(&self, p: &[f64]) -> Vec<i64> {
        p.iter()
            .zip(&self.lo)
            .zip(&self.dims)
            .map(|((x, l), &d)| (((x - l) / self.cell).floor() as i64).clamp(0, d as i64 - 1))
            .collect()
    }

    fn flat(&self, c: &[i64]) -> usize {
        let mut f = 0;
        for (ci, &d) in c.iter().zip(&self.dims).rev() {
            f = f * d + *ci as usize;
        }
        f
    }

    fn scan(&self, center: &[i64], r: i64, z: &[f64], best: &mut Option<(usize, f64)>) {
        let k = center.len();
        let lo: Vec<i64> = center.iter().map(|c| (c - r).max(0)).collect();
        let hi: Vec<i64> = center.iter().zip(&self.dims).map(|(c, &d)| (c + r).min(d as i64 - 1)).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return;
        }
        let mut c = lo.clone();
        loop {
            for &i in &self.buckets[self.flat(&c)] {
                let p = &self.points[i];
                let d = p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                *best = match *best {
                    None => Some((i, d)),
                    Some((j, bd)) => {
                        if d < bd - TIE_TOL || (d <= bd + TIE_TOL && lex_greater(p, &self.points[j])) {
                            Some((i, d.min(bd)))
                        } else {
                            Some((j, bd))
                        }
                    }
                };
            }
            let mut a = 0;
            loop {
                if a == k {
                    return;
                }
                c[a] += 1;
                if c[a] <= hi[a] {
                    break;
                }
                c[a] = lo[a];
                a += 1;
            }
        }
    }

    /// Nearest point to `z` (ties toward the lexicographically larger point).
    fn nearest(&self, z: &[f64]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let center = self.cell_of(z);
        let max_r = *self.dims.iter().max().unwrap_or(&1) as i64;
        let mut best = None;
        let mut r = 1;
        while best.is_none() && r <= max_r {
            self.scan(&center, r, z, &mut best);
            r += 1;
        }
        let (_, d) = best?;
        let reach = (d / self.cell).ceil() as i64 + 1;
        if reach >= r {
            best = None;
            self.scan(&center, reach, z, &mut best);
        }
        best
    }
}

/// Følner average `ψ^{(F)}(y) = (1/|F|) ∫_F conj ξ(h) φ_ξ(h^{-1}.y) dh` over the centred cube
/// of side `side`, by the midpoint rule with `grid` nodes per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolnerValue {
    pub value: Complex64,
    pub excluded_fraction: f64,
    pub nodes: usize,
}

/// Distance beyond the Følner box within which return times are enumerated.
pub const FOLNER_MARGIN: f64 = 3.0;

pub fn folner_average<S: ReturnTimes>(sys: &S, xi: &HCharacter, y: &S::Point, side: f64, grid: usize) -> Result<FolnerValue> {
    if grid < 8 {
        return Err(Error::InvalidParameter(format!("Følner grid needs at least 8 nodes per axis, got {grid}")));
    }
    let k = sys.h_dim();
    let half = side / 2.0;
    let bx = Aabb::cube(k, half + FOLNER_MARGIN);
    let pts = sys.return_times(y, &bx)?;
    let index = NearestIndex::new(&pts, &bx, 1.0);
    let h = side / grid as f64;
    let total = grid.pow(k as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut used = 0usize;
    let mut node = vec![0.0; k];
    for flat in 0..total {
        let mut r = flat;
        for a in 0..k {
            // z = −h for the node h.
            node[a] = half - (r % grid) as f64 * h - 0.5 * h;
            r /= grid;
        }
        // p(h^{-1}.y) = q + h with q the return time nearest to −h, and conj ξ(h)·ξ(q + h) = ξ(q).
        if let Some((i, d)) = index.nearest(&node) {
            if d <= FOLNER_MARGIN {
                acc += xi.eval(&pts[i]);
                used += 1;
            }
        }
    }
    let excluded_fraction = 1.0 - used as f64 / total as f64;
    if excluded_fraction >= 0.01 {
        return Err(Error::FolnerExcluded { fraction: excluded_fraction });
    }
    Ok(FolnerValue { value: acc / used as f64, excluded_fraction, nodes: total })
}

/// The averaged eigenfunction for a fixed Følner cube.
pub struct FolnerEigenfunction<'a, S> {
    pub sys: &'a S,
    pub xi: HCharacter,
    pub side: f64,
    pub grid: usize,
}

impl<S: ReturnTimes> Eigenfunction<S::Point> for FolnerEigenfunction<'_, S> {
    fn eval(&self, y: &S::Point) -> Result<Complex64> {
        Ok(folner_average(self.sys, &self.xi, y, self.side, self.grid)?.value)
    }
}

/// Cut-and-project return times with `H = G = ℝ^d`: `R(x) = P_x`, so `Y` is the whole hull.
#[derive(Debug, Clone)]
pub struct CpsReturnTimes {
    pub scheme: CutProjectScheme,
    pub window: Window,
}

impl ReturnTimes for CpsReturnTimes {
    type Point = HullPoint;

    fn h_dim(&self) -> usize {
        self.scheme.phys_dim
    }

    fn return_times(&self, y: &HullPoint, bx: &Aabb) -> Result<Vec<Vec<f64>>> {
        Ok(cps::pointset_of_hull(&self.scheme, &self.window, y, bx)?.points)
    }

    fn shifted(&self, y: &HullPoint, h: &[f64]) -> HullPoint {
        let neg: Vec<f64> = h.iter().map(|v| -v).collect();
        cps::act(&self.scheme, &neg, y)
    }
}

/// A finite return-time set translated by `h`; used for tests and small examples.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteReturnTimes {
    pub k: usize,
    pub points: Vec<Vec<f64>>,
}

impl ReturnTimes for FiniteReturnTimes {
    type Point = Vec<f64>;

    fn h_dim(&self) -> usize {
        self.k
    }

    fn return_times(&self, y: &Vec<f64>, bx: &Aabb) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .points
            .iter()
            .map(|p| p.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<f64>>())
            .filter(|p| bx.contains_closed(p))
            .collect())
    }

    fn shifted(&self, y: &Vec<f64>, h: &[f64]) -> Vec<f64> {
        y.iter().zip(h).map(|(a, b)| a + b).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn zsqrt2_set(r: f64) -> Vec<Vec<f64>> {
        let s = CutProjectScheme::zsqrt2();
        cps::cut_and_project(&s, &Window::cube(1, 1.0), &[0.0], &[0.0], &Aabb::new(vec![-r], vec![r]).unwrap()).unwrap().points
    }

    #[test]
    fn integer_frequencies_are_exact() {
        let pts: Vec<Vec<f64>> = (-50..=50).map(|m| vec![m as f64]).collect();
        let cands: Vec<Vec<f64>> = (-5..=5).map(|k| vec![k as f64]).collect();
        let q = EpsDualQuery::new(pts, 0.01, cands.clone(), 50.0).unwrap();
        let d = epsilon_dual(&q);
        assert_eq!(d.len(), cands.len());
        assert!(d.iter().all(|m| m.defect < 1e-9));
        assert!(EpsDualQuery::new(vec![vec![60.0]], 0.1, vec![], 50.0).is_err());
        assert!(EpsDualQuery::new(vec![], 1.5, vec![], 50.0).is_err());
    }

    #[test]
    fn zsqrt2_has_nontrivial_dual_frequency() {
        let pts = zsqrt2_set(50.0);
        let cands = dual_candidates(&CutProjectScheme::zsqrt2(), -10.0, 10.0, 0.25).unwrap();
        let q = EpsDualQuery::new(pts.clone(), 0.5, cands, 50.0).unwrap();
        let d = epsilon_dual(&q);
        let nontrivial: Vec<&EpsDualMember> = d.iter().filter(|m| m.frequency[0].abs() > 0.5).collect();
        assert!(!nontrivial.is_empty());
        // Brute-force sup over the enumerated set.
        for m in nontrivial {
            let brute = pts.iter().map(|l| (Complex64::from_polar(1.0, 2.0 * PI * m.frequency[0] * l[0]) - 1.0).norm()).fold(0.0, f64::max);
            assert!((brute - m.defect).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_set_keeps_only_zero() {
        let mut s = RngStream::new(51, 0);
        let pts: Vec<Vec<f64>> = (-100..=100).map(|m| vec![m as f64 + 0.3 * (s.next_f64() - 0.5)]).collect();
        let cands = grid_candidates(-3.0, 3.0, 1.0 / 256.0);
        let q = EpsDualQuery::new(pts, 0.05, cands, 101.0).unwrap();
        let d = epsilon_dual(&q);
        assert!(d.iter().all(|m| m.frequency[0].abs() < 0.01), "{d:?}");
        assert!(!d.is_empty());
    }

    #[test]
    fn monotone_and_subadditive() {
        let pts = zsqrt2_set(30.0);
        let cands = grid_candidates(-6.0, 6.0, 1.0 / 64.0);
        let q1 = EpsDualQuery::new(pts.clone(), 0.3, cands.clone(), 30.0).unwrap();
        let q2 = EpsDualQuery::new(pts.clone(), 0.6, cands, 30.0).unwrap();
        let (d1, d2) = (epsilon_dual(&q1), epsilon_dual(&q2));
        assert!(d1.iter().all(|m| d2.iter().any(|n| n.frequency == m.frequency)));
        for a in &d1 {
            for b in &d1 {
                let s = defect(&[a.frequency[0] + b.frequency[0]], &pts);
                assert!(s <= a.defect + b.defect + 1e-12);
            }
        }
    }

    #[test]
    fn relative_density_examples() {
        let z: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
        assert!(check_relative_density(&z, -10.0, 10.0, 1.0).pass);
        assert!(!check_relative_density(&[0.0], -5.0, 5.0, 1.0).pass);
    }

    #[test]
    fn golden_polish_finds_minimum() {
        let pts = zsqrt2_set(40.0);
        let c = dual_candidates(&CutProjectScheme::zsqrt2(), 1.5, 2.5, 0.1).unwrap();
        let best = c.iter().map(|x| (x[0], defect(x, &pts))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let (_, d) = polish_golden(&pts, best.0 - 1e-3, best.0 + 1e-3, 80);
        assert!(d <= best.1 + 1e-12);
    }

    #[test]
    fn csv_header() {
        let m = EpsDualMember { frequency: vec![1.0], defect: 0.0, truncation_radius: 5.0 };
        let csv = eps_dual_csv(&[m]);
        assert!(csv.starts_with("xi1,defect,truncation_radius\n"));
    }

    #[test]
    fn section_examples() {
        let sys = FiniteReturnTimes { k: 1, points: vec![vec![0.0], vec![3.0]] };
        assert_eq!(build_section(&sys, &vec![0.0]).unwrap().element, vec![0.0]);
        let sys = FiniteReturnTimes { k: 1, points: vec![vec![-1.0], vec![1.0]] };
        let s = build_section(&sys, &vec![0.0]).unwrap();
        assert_eq!(s.element, vec![1.0]);
        assert!(s.tie_broken);
        let empty = FiniteReturnTimes { k: 1, points: vec![] };
        assert_eq!(build_section(&empty, &vec![0.0]), Err(Error::NotInTransversal));
        let xi = HCharacter::new(vec![0.3]);
        let at0 = FiniteReturnTimes { k: 1, points: vec![vec![0.0]] };
        assert_eq!(approx_eigenfunction(&at0, &xi, &vec![0.0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cps_section_defect_lies_in_difference_set() {
        let scheme = CutProjectScheme::zsqrt2();
        let sys = CpsReturnTimes { scheme: scheme.clone(), window: Window::cube(1, 1.0) };
        let diff = cps::cut_and_project(&scheme, &Window::cube(1, 2.0), &[0.0], &[0.0], &Aabb::cube(1, 30.0)).unwrap();
        let mut s = RngStream::new(52, 0);
        for _ in 0..300 {
            let y = cps::sample_hull(&scheme, &mut s);
            let h = [s.uniform_in(-5.0, 5.0)];
            let d = section_defect(&sys, &y, &h).unwrap();
            assert!(diff.points.iter().any(|p| (p[0] - d[0]).abs() < 1e-9), "{d:?}");
        }
    }

    #[test]
    fn approximate_eigenfunction_bound() {
        let scheme = CutProjectScheme::zsqrt2();
        let sys = CpsReturnTimes { scheme: scheme.clone(), window: Window::cube(1, 1.0) };
        let delta = cps::cut_and_project(&scheme, &Window::cube(1, 2.0), &[0.0], &[0.0], &Aabb::cube(1, 40.0)).unwrap();
        let cands = dual_candidates(&scheme, 1.0, 40.0, 0.05).unwrap();
        let q = EpsDualQuery::new(delta.points.clone(), 0.5, cands, 40.0).unwrap();
        let best = epsilon_dual(&q).into_iter().next().unwrap();
        let xi = HCharacter::new(best.frequency.clone());
        let phi = ApproxEigenfunction { sys: &sys, xi: xi.clone() };
        let mut s = RngStream::new(53, 0);
        for _ in 0..1000 {
            let y = cps::sample_hull(&scheme, &mut s);
            assert!((phi.eval(&y).unwrap().norm() - 1.0).abs() < 1e-12);
            let h = [s.uniform_in(-10.0, 10.0)];
            assert!(eigen_defect(&sys, &phi, &xi, &y, &h).unwrap() <= best.defect + 1e-9);
        }
    }

    #[test]
    fn folner_average_bounds_and_trend() {
        let scheme = CutProjectScheme::zsqrt2();
        let sys = CpsReturnTimes { scheme: scheme.clone(), window: Window::cube(1, 1.0) };
        let delta = cps::cut_and_project(&scheme, &Window::cube(1, 2.0), &[0.0], &[0.0], &Aabb::cube(1, 40.0)).unwrap();
        let cands = dual_candidates(&scheme, 1.0, 40.0, 0.05).unwrap();
        let q = EpsDualQuery::new(delta.points, 0.5, cands, 40.0).unwrap();
        let best = epsilon_dual(&q).into_iter().next().unwrap();
        let xi = HCharacter::new(best.frequency.clone());
        let trivial = folner_average(&sys, &HCharacter::trivial(1), &HullPoint::origin(2), 4.0, 16).unwrap();
        assert!((trivial.value - 1.0).norm() < 1e-15);
        let mut s = RngStream::new(54, 0);
        let mut mean_defect = [0.0; 3];
        let n = 200;
        for _ in 0..n {
            let y = cps::sample_hull(&scheme, &mut s);
            let h = [s.uniform_in(-1.0, 1.0)];
            for (i, side) in [2.0, 4.0, 8.0].into_iter().enumerate() {
                let psi = FolnerEigenfunction { sys: &sys, xi: xi.clone(), side, grid: 32 * side as usize };
                let v = psi.eval(&y).unwrap().norm();
                assert!(1.0 - best.defect <= v + 1e-12 && v <= 1.0 + best.defect + 1e-12);
                mean_defect[i] += eigen_defect(&sys, &psi, &xi, &y, &h).unwrap() / n as f64;
            }
        }
        assert!(mean_defect[0] > mean_defect[1] && mean_defect[1] > mean_defect[2], "{mean_defect:?}");
        assert!(folner_average(&sys, &xi, &HullPoint::origin(2), 4.0, 4).is_err());
    }
}
