//! Hitting sets, untwisted and twisted Siegel–Radon transforms, Siegel
//! constants, Monte-Carlo checks of the Siegel formula and Siegel duality,
//! Bernoulli thinning and the combinatorial `A^{-1}A ∩ CB` bound.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cps::{self, CutProjectScheme, HullPoint, PointSet, TorusCharacter, Window};
use crate::error::{Error, Result};
use crate::heisenberg::{self, HeisPoint};
use crate::numerics::{gauss_legendre, mc_map, midpoint, Aabb, McReport, RngStream, TestFunction, Tolerances};

/// Rounding scale used to identify cosets and group elements.
pub const KEY_TOL: f64 = 1e-9;

pub fn key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| (v / KEY_TOL).round() as i64).collect()
}

/// Subgroup `H`, projection `π: G → H\G`, section `s` and `h(g)` with `g = h(g)·s(π(g))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransversalSpec {
    /// `H = {e}` in `ℝ^dim`; optionally drops the identity coset.
    Trivial { dim: usize, exclude_identity: bool },
    /// `H` spanned by the coordinate axes `h_axes` of `ℝ^dim`.
    Coordinate { dim: usize, h_axes: Vec<usize> },
    /// `H = U × Z` in the Heisenberg group of dimension `2n+1`, `π(u,t,v) = v`.
    Heisenberg { n: usize },
}

impl TransversalSpec {
    pub fn identity(dim: usize) -> Self {
        TransversalSpec::Trivial { dim, exclude_identity: false }
    }

    pub fn name(&self) -> String {
        match self {
            TransversalSpec::Trivial { .. } => "trivial".into(),
            TransversalSpec::Coordinate { h_axes, .. } => format!("coordinate{h_axes:?}"),
            TransversalSpec::Heisenberg { n } => format!("heisenberg{n}"),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            TransversalSpec::Trivial { dim, .. } | TransversalSpec::Coordinate { dim, .. } => *dim,
            TransversalSpec::Heisenberg { n } => 2 * n + 1,
        }
    }

    pub fn h_dim(&self) -> usize {
        match self {
            TransversalSpec::Trivial { .. } => 0,
            TransversalSpec::Coordinate { h_axes, .. } => h_axes.len(),
            TransversalSpec::Heisenberg { n } => n + 1,
        }
    }

    fn quotient_axes(&self) -> Vec<usize> {
        match self {
            TransversalSpec::Trivial { dim, .. } => (0..*dim).collect(),
            TransversalSpec::Coordinate { dim, h_axes } => (0..*dim).filter(|i| !h_axes.contains(i)).collect(),
            TransversalSpec::Heisenberg { n } => (n + 1..2 * n + 1).collect(),
        }
    }

    fn h_axes(&self) -> Vec<usize> {
        match self {
            TransversalSpec::Trivial { .. } => vec![],
            TransversalSpec::Coordinate { h_axes, .. } => h_axes.clone(),
            TransversalSpec::Heisenberg { n } => (0..=*n).collect(),
        }
    }

    pub fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match self {
            TransversalSpec::Heisenberg { .. } => {
                let (a, b) = (HeisPoint::from_slice(a).expect("odd"), HeisPoint::from_slice(b).expect("odd"));
                heisenberg::mul(&a, &b).to_vec()
            }
            _ => a.iter().zip(b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn inv(&self, a: &[f64]) -> Vec<f64> {
        a.iter().map(|x| -x).collect()
    }

    /// `π(g)` as coordinates on `H\G`.
    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        self.quotient_axes().iter().map(|&i| g[i]).collect()
    }

    /// `s(q)`, an element of `G`.
    pub fn section(&self, q: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.ambient_dim()];
        for (&i, v) in self.quotient_axes().iter().zip(q) {
            g[i] = *v;
        }
        g
    }

    /// `h(g)` in H-coordinates.
    pub fn h_part(&self, g: &[f64]) -> Vec<f64> {
        match self {
            TransversalSpec::Heisenberg { .. } => {
                let h = heisenberg::h_part(&HeisPoint::from_slice(g).expect("odd"));
                let mut x = h.u;
                x.push(h.t);
                x
            }
            _ => self.h_axes().iter().map(|&i| g[i]).collect(),
        }
    }

    /// Embed H-coordinates as a group element.
    pub fn h_element(&self, h: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.ambient_dim()];
        for (&i, v) in self.h_axes().iter().zip(h) {
            g[i] = *v;
        }
        g
    }

    pub fn in_h(&self, g: &[f64]) -> bool {
        self.project(g).iter().all(|v| v.abs() <= KEY_TOL)
    }

    /// The part of `H\G` covered by a box of `G` (coordinate projection).
    pub fn quotient_region(&self, region: &Aabb) -> Aabb {
        region.select(&self.quotient_axes())
    }

    fn excludes(&self, q: &[f64]) -> bool {
        matches!(self, TransversalSpec::Trivial { exclude_identity: true, .. }) && q.iter().all(|v| v.abs() <= KEY_TOL)
    }
}

/// `π(P)` with one representative per coset, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSet {
    pub cosets: Vec<Vec<f64>>,
    pub multiplicity: Vec<usize>,
}

impl HittingSet {
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    pub fn collapsed(&self) -> usize {
        self.multiplicity.iter().map(|m| m - 1).sum()
    }
}

pub fn hitting_set(ps: &PointSet, t: &TransversalSpec, window_region: &Aabb) -> Result<HittingSet> {
    if ps.dim != t.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: t.ambient_dim(), got: ps.dim });
    }
    let mut map: BTreeMap<Vec<i64>, (Vec<f64>, usize)> = BTreeMap::new();
    for p in &ps.points {
        let q = t.project(p);
        if !window_region.contains(&q) || t.excludes(&q) {
            continue;
        }
        map.entry(key(&q)).and_modify(|e| e.1 += 1).or_insert((q, 1));
    }
    let (cosets, multiplicity) = map.into_values().unzip();
    Ok(HittingSet { cosets, multiplicity })
}

fn covered_quotient(f: &TestFunction, ps: &PointSet, t: &TransversalSpec) -> Result<Aabb> {
    let q = t.quotient_region(&ps.region);
    if f.dimension != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: f.dimension });
    }
    if !f.is_zero() && !q.contains_box(&f.support_box()) {
        return Err(Error::UnderCovered);
    }
    Ok(q)
}

/// `Sf = Σ_{Hg ∈ π(P)} f(Hg)` for real test functions.
pub fn siegel_transform(f: &TestFunction, ps: &PointSet, t: &TransversalSpec) -> Result<f64> {
    if !f.is_real() {
        return Err(Error::ComplexTestFunction);
    }
    let q = covered_quotient(f, ps, t)?;
    let hs = hitting_set(ps, t, &q)?;
    Ok(hs.cosets.iter().map(|c| f.eval_real(c)).sum())
}

/// `S_ψ f = Σ_{g ∈ s(π(P))} f(Hg) ψ(g.x)`; `psi` receives the section element `g`
/// and must evaluate the eigenfunction at the translated hull point.
pub fn twisted_siegel_transform<F>(f: &TestFunction, ps: &PointSet, t: &TransversalSpec, psi: F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    let q = covered_quotient(f, ps, t)?;
    let hs = hitting_set(ps, t, &q)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in &hs.cosets {
        acc += f.eval_unchecked(c) * psi(&t.section(c))?;
    }
    Ok(acc)
}

/// Closed-form Siegel constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SiegelConstantMode {
    /// `vol(W) / covol(Γ)`.
    TrivialH { window_volume: f64, covolume: f64 },
    /// `vol(π₂W) · covol(Δ) / covol(Γ)`; with `covol_gamma` absent this is
    /// `vol(π₂W) / covol(Δ)`, which agrees whenever `covol(Γ) = covol(Δ)²`.
    CompatiblePair { projected_window_volume: f64, covol_delta: f64, covol_gamma: Option<f64> },
    /// `1 / covol(Γ)`.
    Lattice { covolume: f64 },
}

impl SiegelConstantMode {
    pub fn name(&self) -> &'static str {
        match self {
            SiegelConstantMode::TrivialH { .. } => "trivial_H",
            SiegelConstantMode::CompatiblePair { .. } => "compatible_pair",
            SiegelConstantMode::Lattice { .. } => "lattice",
        }
    }

    /// Mode for a cut-and-project scheme with trivial `H`.
    pub fn trivial_h(scheme: &CutProjectScheme, window: &Window) -> Self {
        SiegelConstantMode::TrivialH { window_volume: window.volume(), covolume: scheme.covolume }
    }
}

pub fn siegel_constant(mode: &SiegelConstantMode) -> Result<f64> {
    let pos = |x: f64, what: &str| {
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
        }
    };
    match *mode {
        SiegelConstantMode::TrivialH { window_volume, covolume } => Ok(window_volume / pos(covolume, "covolume")?),
        SiegelConstantMode::CompatiblePair { projected_window_volume, covol_delta, covol_gamma } => {
            let d = pos(covol_delta, "covol(Δ)")?;
            match covol_gamma {
                Some(g) => Ok(projected_window_volume * d / pos(g, "covol(Γ)")?),
                None => Ok(projected_window_volume / d),
            }
        }
        SiegelConstantMode::Lattice { covolume } => Ok(1.0 / pos(covolume, "covolume")?),
    }
}

/// Parse a constant mode by name from flat parameters.
pub fn siegel_constant_mode(name: &str, params: &BTreeMap<String, f64>) -> Result<SiegelConstantMode> {
    let get = |k: &str| params.get(k).copied().ok_or_else(|| Error::Config(format!("missing parameter `{k}`")));
    match name {
        "trivial_H" | "trivial_h" => {
            Ok(SiegelConstantMode::TrivialH { window_volume: get("window_volume")?, covolume: get("covolume")? })
        }
        "compatible_pair" => Ok(SiegelConstantMode::CompatiblePair {
            projected_window_volume: get("projected_window_volume")?,
            covol_delta: get("covol_delta")?,
            covol_gamma: params.get("covol_gamma").copied(),
        }),
        "lattice" => Ok(SiegelConstantMode::Lattice { covolume: get("covolume")? }),
        other => Err(Error::UnsupportedMode(other.to_string())),
    }
}

/// Source of random point sets distributed according to an invariant measure.
pub trait PointSetSampler: Sync {
    fn sample(&self, stream: &mut RngStream) -> Result<PointSet>;
}

/// Cut-and-project hull sampler restricted to a region of `G`.
#[derive(Debug, Clone)]
pub struct CpsSampler {
    pub scheme: CutProjectScheme,
    pub window: Window,
    pub region: Aabb,
}

impl CpsSampler {
    pub fn sample_with_hull(&self, stream: &mut RngStream) -> Result<(HullPoint, PointSet)> {
        let h = cps::sample_hull(&self.scheme, stream);
        let ps = cps::pointset_of_hull(&self.scheme, &self.window, &h, &self.region)?;
        Ok((h, ps))
    }
}

impl PointSetSampler for CpsSampler {
    fn sample(&self, stream: &mut RngStream) -> Result<PointSet> {
        Ok(self.sample_with_hull(stream)?.1)
    }
}

/// Independent Bernoulli(p) thinning of another sampler.
pub struct Thinned<S> {
    pub inner: S,
    pub p: f64,
}

impl<S: PointSetSampler> PointSetSampler for Thinned<S> {
    fn sample(&self, stream: &mut RngStream) -> Result<PointSet> {
        let ps = self.inner.sample(stream)?;
        thin_bernoulli(&ps, self.p, &mut stream.fork(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiegelReport {
    pub experiment: String,
    pub seed: u64,
    pub n_samples: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub reference: f64,
    pub z: f64,
    pub pass: bool,
    pub second_moment: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
}

impl SiegelReport {
    pub fn from_samples(experiment: &str, seed: u64, samples: &[Complex64], reference: Complex64, tol: &Tolerances, slack: f64) -> Result<Self> {
        let r = McReport::compare(samples, reference, tol.z_multiplier, slack)?;
        let second_moment = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / samples.len() as f64;
        Ok(SiegelReport {
            experiment: experiment.into(),
            seed,
            n_samples: r.n_samples,
            mean_re: r.mean.re,
            mean_im: r.mean.im,
            stderr: r.stderr,
            reference: reference.re,
            z: r.z_score,
            pass: r.pass,
            second_moment,
            truncation_radius: None,
        })
    }
}

fn real_samples(v: Vec<f64>) -> Vec<Complex64> {
    v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
}

/// Mean of `Sf` over sampled point sets against `σ(Y)·∫f`.
pub fn mc_siegel_formula<S: PointSetSampler>(
    sampler: &S,
    f: &TestFunction,
    t: &TransversalSpec,
    sigma: f64,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SiegelReport> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!("n_samples must be at least 100, got {n_samples}")));
    }
    let samples = mc_map(seed, n_samples, |_, s| siegel_transform(f, &sampler.sample(s)?, t))?;
    let mut r = SiegelReport::from_samples("siegel_formula", seed, &real_samples(samples), Complex64::new(sigma * f.integral(), 0.0), tol, 0.0)?;
    r.truncation_radius = Some(f.truncation_radius());
    Ok(r)
}

/// `S*φ(g) = (1/covol) ∫_W φ(Γ(g, w)) dw` by the midpoint rule (trivial `H`).
pub fn dual_transform<P>(phi: &P, g: &[f64], scheme: &CutProjectScheme, window: &Window, grid: usize) -> Result<Complex64>
where
    P: Fn(&HullPoint) -> Complex64 + ?Sized,
{
    if grid < 16 {
        return Err(Error::InvalidParameter(format!("grid must have at least 16 points per axis, got {grid}")));
    }
    if g.len() != scheme.phys_dim {
        return Err(Error::DimensionMismatch { expected: scheme.phys_dim, got: g.len() });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for b in &window.boxes {
        acc += midpoint(b, grid, |w| phi(&cps::hull_point_of(scheme, g, w)));
    }
    Ok(acc / scheme.covolume)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub lhs: McReport,
    pub rhs: Complex64,
    pub pass: bool,
}

/// `E[Sf · conj φ]` over the hull against `∫ f · conj(S*φ)` (trivial `H`).
#[allow(clippy::too_many_arguments)]
pub fn mc_siegel_duality<P>(
    f: &TestFunction,
    phi: &P,
    scheme: &CutProjectScheme,
    window: &Window,
    n_samples: usize,
    seed: u64,
    grid: usize,
    tol: &Tolerances,
    quad_slack: f64,
) -> Result<DualityReport>
where
    P: Fn(&HullPoint) -> Complex64 + Sync,
{
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!("n_samples must be at least 100, got {n_samples}")));
    }
    let region = f.support_box().inflate(1e-9);
    let t = TransversalSpec::identity(scheme.phys_dim);
    let samples = mc_map(seed, n_samples, |_, s| {
        let h = cps::sample_hull(scheme, s);
        let ps = cps::pointset_of_hull(scheme, window, &h, &region)?;
        Ok(siegel_transform(f, &ps, &t)? * phi(&h).conj())
    })?;
    let cells = match scheme.phys_dim {
        1 => 48,
        2 => 12,
        _ => 4,
    };
    let err = std::cell::RefCell::new(None);
    let rhs = gauss_legendre(&f.support_box(), cells, |g| match dual_transform(phi, g, scheme, window, grid) {
        Ok(d) => f.eval_unchecked(g) * d.conj(),
        Err(e) => {
            *err.borrow_mut() = Some(e);
            Complex64::new(0.0, 0.0)
        }
    });
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let lhs = McReport::compare(&samples, rhs, tol.z_multiplier, quad_slack)?;
    Ok(DualityReport { pass: lhs.pass, lhs, rhs })
}

/// Mean of the twisted transform `Σ f(q) χ(s(q).x)` for a torus character χ.
#[allow(clippy::too_many_arguments)]
pub fn mc_twisted_mean(
    sampler: &CpsSampler,
    f: &TestFunction,
    t: &TransversalSpec,
    chi: &TorusCharacter,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SiegelReport> {
    let samples = mc_map(seed, n_samples, |_, s| {
        let (h, ps) = sampler.sample_with_hull(s)?;
        twisted_siegel_transform(f, &ps, t, |g| Ok(chi.eval(&cps::act(&sampler.scheme, g, &h))))
    })?;
    SiegelReport::from_samples("twisted_mean_zero", seed, &samples, Complex64::new(0.0, 0.0), tol, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcReport {
    pub lhs: usize,
    pub rhs: usize,
    /// Pairs `(a, b)` in a common coset whose `a b^{-1}` is not in `(A ∩ H)·C`.
    pub covering_missing: usize,
}

impl AbcReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `|π(A) ∩ π(B)|` against `|A^{-1}A ∩ CB|`, with the covering precondition checked on the
/// pairs that actually occur; `C` must lie in `H`.
pub fn abc_bound(a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>], t: &TransversalSpec) -> Result<AbcReport> {
    for g in a.iter().chain(b).chain(c) {
        if g.len() != t.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: t.ambient_dim(), got: g.len() });
        }
    }
    if let Some(g) = c.iter().find(|g| !t.in_h(g)) {
        return Err(Error::InvalidParameter(format!("C must lie in H, found {g:?}")));
    }
    let pa: BTreeSet<Vec<i64>> = a.iter().map(|g| key(&t.project(g))).collect();
    let pb: BTreeSet<Vec<i64>> = b.iter().map(|g| key(&t.project(g))).collect();
    let lhs = pa.intersection(&pb).count();

    let aa: BTreeSet<Vec<i64>> = a.iter().flat_map(|x| a.iter().map(move |y| key(&t.mul(&t.inv(x), y)))).collect();
    let cb: BTreeSet<Vec<i64>> = c.iter().flat_map(|x| b.iter().map(move |y| key(&t.mul(x, y)))).collect();
    let rhs = aa.intersection(&cb).count();

    let ah: Vec<&Vec<f64>> = a.iter().filter(|g| t.in_h(g)).collect();
    let cover: BTreeSet<Vec<i64>> = ah.iter().flat_map(|x| c.iter().map(move |y| key(&t.mul(x, y)))).collect();
    let mut missing = 0;
    for x in a {
        let px = key(&t.project(x));
        for y in b {
            if key(&t.project(y)) == px && !cover.contains(&key(&t.mul(x, &t.inv(y)))) {
                missing += 1;
            }
        }
    }
    Ok(AbcReport { lhs, rhs, covering_missing: missing })
}

pub fn thin_bernoulli(ps: &PointSet, p: f64, stream: &mut RngStream) -> Result<PointSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("retention probability {p} not in [0,1]")));
    }
    let points = ps.points.iter().filter(|_| stream.bernoulli(p)).cloned().collect();
    Ok(PointSet { dim: ps.dim, points, region: ps.region.clone() })
}

/// `max_n |P ∩ D_n| / vol(D_n)` over nested boxes of increasing volume.
pub fn upper_density(ps: &PointSet, boxes: &[Aabb]) -> Result<f64> {
    for w in boxes.windows(2) {
        if !w[1].contains_box(&w[0]) || w[1].volume() <= w[0].volume() {
            return Err(Error::InvalidParameter("Følner boxes must be nested with increasing volume".into()));
        }
    }
    let mut best: f64 = 0.0;
    for b in boxes {
        let v = b.volume();
        if !(v > 0.0) {
            return Err(Error::ZeroVolume);
        }
        best = best.max(ps.points.iter().filter(|p| b.contains(p)).count() as f64 / v);
    }
    Ok(best)
}

/// `TF(x) = Σ_{g ∈ P_x} F(g^{-1}, g.x)` for trivial `H`.
pub fn periodize_t<F>(
    f: F,
    h: &HullPoint,
    scheme: &CutProjectScheme,
    window: &Window,
    region: &Aabb,
    t: &TransversalSpec,
) -> Result<f64>
where
    F: Fn(&[f64], &HullPoint) -> f64,
{
    if t.h_dim() != 0 {
        return Err(Error::NontrivialH);
    }
    let ps = cps::pointset_of_hull(scheme, window, h, region)?;
    Ok(ps.points.iter().map(|p| f(&t.inv(p), &cps::act(scheme, p, h))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cps::cut_and_project;

    const SQ2: f64 = std::f64::consts::SQRT_2;

    fn ints(lo: f64, hi: f64) -> PointSet {
        let z = CutProjectScheme::integer(1);
        cut_and_project(&z, &Window::trivial(), &[0.0], &[], &Aabb::new(vec![lo], vec![hi]).unwrap()).unwrap()
    }

    #[test]
    fn transversal_invariants() {
        let mut s = RngStream::new(31, 0);
        let specs = [
            TransversalSpec::identity(2),
            TransversalSpec::Coordinate { dim: 3, h_axes: vec![0, 2] },
            TransversalSpec::Heisenberg { n: 1 },
            TransversalSpec::Heisenberg { n: 2 },
        ];
        for t in &specs {
            for _ in 0..100 {
                let g: Vec<f64> = (0..t.ambient_dim()).map(|_| s.uniform_in(-3.0, 3.0)).collect();
                let q = t.project(&g);
                assert_eq!(t.project(&t.section(&q)), q);
                let back = t.mul(&t.h_element(&t.h_part(&g)), &t.section(&q));
                assert!(back.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-12), "{t:?}");
            }
        }
    }

    #[test]
    fn hitting_set_examples() {
        let ps = ints(-10.0, 11.0);
        let t = TransversalSpec::identity(1);
        let hs = hitting_set(&ps, &t, &ps.region).unwrap();
        assert_eq!(hs.cosets, ps.points);
        let empty = PointSet::new(Aabb::cube(1, 1.0), vec![]).unwrap();
        assert!(hitting_set(&empty, &t, &empty.region).unwrap().is_empty());

        // Product set in the Heisenberg group projects onto its V-factor.
        let lu = [-1.0, 0.5];
        let lz = [0.0, 2.0, 3.0];
        let lv = [-2.0, 0.25, 1.0];
        let mut pts = vec![];
        for u in lu {
            for t in lz {
                for v in lv {
                    pts.push(vec![u, t, v]);
                }
            }
        }
        let ps = PointSet::new(Aabb::cube(3, 5.0), pts).unwrap();
        let th = TransversalSpec::Heisenberg { n: 1 };
        let hs = hitting_set(&ps, &th, &Aabb::new(vec![-1.0], vec![2.0]).unwrap()).unwrap();
        assert_eq!(hs.cosets, vec![vec![0.25], vec![1.0]]);
        assert_eq!(hs.multiplicity, vec![6, 6]);
    }

    #[test]
    fn siegel_transform_examples() {
        let ps = ints(-10.0, 11.0);
        let t = TransversalSpec::identity(1);
        assert_eq!(siegel_transform(&TestFunction::zero(1), &ps, &t).unwrap(), 0.0);
        let f = TestFunction::box_indicator(vec![1.0], 1.5).unwrap();
        assert_eq!(siegel_transform(&f, &ps, &t).unwrap(), 3.0);
        let wide = TestFunction::box_indicator(vec![0.0], 20.0).unwrap();
        assert_eq!(siegel_transform(&wide, &ps, &t), Err(Error::UnderCovered));
        let cplx = TestFunction::modulated_gaussian(vec![0.0], 1.0, vec![1.0]).unwrap();
        assert_eq!(siegel_transform(&cplx, &ps, &t), Err(Error::ComplexTestFunction));

        let s = CutProjectScheme::zsqrt2();
        let g = TestFunction::gaussian(vec![0.3], 1.1).unwrap();
        let region = g.support_box().inflate(0.5);
        let ps = cut_and_project(&s, &Window::cube(1, 1.0), &[0.1], &[0.2], &region).unwrap();
        let mut brute = 0.0;
        for a in -30i64..=30 {
            for b in -30i64..=30 {
                let x = a as f64 + b as f64 * SQ2 + 0.1;
                let y = a as f64 - b as f64 * SQ2 + 0.2;
                if y.abs() <= 1.0 {
                    brute += (-std::f64::consts::PI * (x - 0.3).powi(2) / 1.21).exp();
                }
            }
        }
        assert!((siegel_transform(&g, &ps, &t).unwrap() - brute).abs() < 1e-11);
    }

    #[test]
    fn twisted_with_unit_psi_is_bitwise_untwisted() {
        let s = CutProjectScheme::zsqrt2();
        let g = TestFunction::gaussian(vec![0.0], 1.0).unwrap();
        let region = g.support_box().inflate(0.1);
        let t = TransversalSpec::identity(1);
        let ps = cut_and_project(&s, &Window::cube(1, 1.0), &[0.37], &[0.1], &region).unwrap();
        let a = siegel_transform(&g, &ps, &t).unwrap();
        let b = twisted_siegel_transform(&g, &ps, &t, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert_eq!(a.to_bits(), b.re.to_bits());
        assert_eq!(b.im, 0.0);
        let z = twisted_siegel_transform(&TestFunction::zero(1), &ps, &t, |_| Ok(Complex64::i())).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
        let failing = twisted_siegel_transform(&g, &ps, &t, |_| Err(Error::EigenfunctionUndefined("x".into())));
        assert!(failing.is_err());
    }

    #[test]
    fn constants() {
        let s = CutProjectScheme::zsqrt2();
        let c = siegel_constant(&SiegelConstantMode::trivial_h(&s, &Window::cube(1, 1.0))).unwrap();
        assert!((c - 1.0 / SQ2).abs() < 1e-15);
        let cp = SiegelConstantMode::CompatiblePair { projected_window_volume: 2.0, covol_delta: 2.0 * SQ2, covol_gamma: Some(8.0) };
        assert!((siegel_constant(&cp).unwrap() - 1.0 / SQ2).abs() < 1e-15);
        let cp0 = SiegelConstantMode::CompatiblePair { projected_window_volume: 2.0, covol_delta: 2.0 * SQ2, covol_gamma: None };
        assert!((siegel_constant(&cp0).unwrap() - 1.0 / SQ2).abs() < 1e-15);
        assert_eq!(siegel_constant(&SiegelConstantMode::trivial_h(&s, &Window::empty(1))).unwrap(), 0.0);
        assert!(matches!(siegel_constant_mode("mystery", &BTreeMap::new()), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn siegel_formula_small() {
        let s = CutProjectScheme::zsqrt2();
        let f = TestFunction::standard_gaussian(1);
        let sampler = CpsSampler { scheme: s.clone(), window: Window::cube(1, 1.0), region: f.support_box().inflate(0.01) };
        let t = TransversalSpec::identity(1);
        let tol = Tolerances::default();
        let zero = mc_siegel_formula(&sampler, &TestFunction::zero(1), &t, 1.0 / SQ2, 100, 1, &tol).unwrap();
        assert!(zero.pass && zero.mean_re == 0.0 && zero.reference == 0.0);
        let r = mc_siegel_formula(&sampler, &f, &t, 1.0 / SQ2, 2000, 5, &tol).unwrap();
        assert!(r.pass, "{r:?}");
        let thin = Thinned { inner: sampler.clone(), p: 0.5 };
        let r = mc_siegel_formula(&thin, &f, &t, 0.5 / SQ2, 2000, 6, &tol).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(mc_siegel_formula(&sampler, &f, &t, 1.0, 10, 1, &tol).is_err());
    }

    fn smooth_phi(h: &HullPoint) -> Complex64 {
        let c = &h.coefficients;
        let tau = 2.0 * std::f64::consts::PI;
        Complex64::new(1.0 + 0.5 * (tau * c[0]).cos(), 0.3 * (tau * (c[0] + c[1])).sin())
    }

    #[test]
    fn dual_transform_examples() {
        let s = CutProjectScheme::zsqrt2();
        let w = Window::cube(1, 1.0);
        let one = dual_transform(&|_: &HullPoint| Complex64::new(1.0, 0.0), &[0.3], &s, &w, 16).unwrap();
        assert!((one.re - 1.0 / SQ2).abs() < 1e-14);
        let zero = dual_transform(&|_: &HullPoint| Complex64::new(0.0, 0.0), &[0.3], &s, &w, 16).unwrap();
        assert_eq!(zero, Complex64::new(0.0, 0.0));
        let coarse = dual_transform(&smooth_phi, &[0.7], &s, &w, 32).unwrap();
        let fine = dual_transform(&smooth_phi, &[0.7], &s, &w, 1024).unwrap();
        assert!((coarse - fine).norm() / fine.norm() < 1e-3);
        assert!(dual_transform(&smooth_phi, &[0.7], &s, &w, 8).is_err());
    }

    #[test]
    fn duality_small() {
        let s = CutProjectScheme::zsqrt2();
        let f = TestFunction::gaussian(vec![0.2], 1.0).unwrap();
        let tol = Tolerances::default();
        let r = mc_siegel_duality(&f, &smooth_phi, &s, &Window::cube(1, 1.0), 2000, 3, 64, &tol, 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
        let z = mc_siegel_duality(&TestFunction::zero(1), &smooth_phi, &s, &Window::cube(1, 1.0), 100, 3, 16, &tol, 0.0).unwrap();
        assert_eq!(z.rhs, Complex64::new(0.0, 0.0));
        assert_eq!(z.lhs.mean, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn abc_examples() {
        let e = vec![vec![0.0, 0.0]];
        let t = TransversalSpec::Coordinate { dim: 2, h_axes: vec![0] };
        let r = abc_bound(&e, &e, &e, &t).unwrap();
        assert_eq!((r.lhs, r.rhs), (1, 1));
        let grid: Vec<Vec<f64>> = (-5..=5).flat_map(|x| (-5..=5).map(move |y| vec![x as f64, y as f64])).collect();
        let r = abc_bound(&grid, &grid, &e, &t).unwrap();
        assert!(r.holds());
        assert_eq!(r.lhs, 11);
        assert!(r.covering_missing > 0);
        let c: Vec<Vec<f64>> = (-5..=5).map(|x| vec![x as f64, 0.0]).collect();
        let r = abc_bound(&grid, &grid, &c, &t).unwrap();
        assert!(r.holds() && r.covering_missing == 0);
        assert!(abc_bound(&grid, &grid, &[vec![0.0, 1.0]], &t).is_err());
    }

    #[test]
    fn thinning_examples() {
        let ps = ints(0.0, 20_000.0);
        let mut s = RngStream::new(9, 9);
        assert_eq!(thin_bernoulli(&ps, 1.0, &mut s).unwrap(), ps);
        assert!(thin_bernoulli(&ps, 0.0, &mut s).unwrap().is_empty());
        let n = ps.len() as f64;
        let k = thin_bernoulli(&ps, 0.5, &mut s).unwrap().len() as f64;
        assert!((k - n / 2.0).abs() <= 3.0 * (n * 0.25).sqrt());
        assert!(thin_bernoulli(&ps, 1.5, &mut s).is_err());
        let a = thin_bernoulli(&ps, 0.5, &mut RngStream::new(1, 1)).unwrap();
        let b = thin_bernoulli(&ps, 0.5, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn upper_density_examples() {
        let ps = ints(0.0, 1001.0);
        let boxes: Vec<Aabb> = [10.0, 100.0, 1000.0].iter().map(|&n| Aabb::new(vec![0.0], vec![n]).unwrap()).collect();
        assert!(upper_density(&ps, &boxes).unwrap() >= 1.0);
        let thin = thin_bernoulli(&ps, 0.5, &mut RngStream::new(3, 0)).unwrap();
        let d = upper_density(&thin, &boxes[2..]).unwrap();
        assert!((d - 0.5).abs() < 0.05);
        let empty = PointSet::new(Aabb::cube(1, 1.0), vec![]).unwrap();
        assert_eq!(upper_density(&empty, &boxes).unwrap(), 0.0);
        let bad = vec![boxes[1].clone(), boxes[0].clone()];
        assert!(upper_density(&ps, &bad).is_err());
    }

    #[test]
    fn periodization() {
        let s = CutProjectScheme::zsqrt2();
        let w = Window::cube(1, 1.0);
        let region = Aabb::cube(1, 6.0);
        let t = TransversalSpec::identity(1);
        let h = cps::sample_hull(&s, &mut RngStream::new(2, 2));
        assert_eq!(periodize_t(|_, _| 0.0, &h, &s, &w, &region, &t).unwrap(), 0.0);
        let u = |g: &[f64], _: &HullPoint| if g[0].abs() <= 2.0 { 1.0 } else { 0.0 };
        let count = cps::pointset_of_hull(&s, &w, &h, &region).unwrap().points.iter().filter(|p| p[0].abs() <= 2.0).count();
        assert_eq!(periodize_t(u, &h, &s, &w, &region, &t).unwrap(), count as f64);
        let th = TransversalSpec::Coordinate { dim: 1, h_axes: vec![0] };
        assert_eq!(periodize_t(u, &h, &s, &w, &region, &th), Err(Error::NontrivialH));
        // Orbit points land in the cross section.
        let ps = cps::pointset_of_hull(&s, &w, &h, &region).unwrap();
        for p in &ps.points {
            let y = cps::act(&s, p, &h);
            let near = cps::pointset_of_hull(&s, &w, &y, &Aabb::cube(1, 1e-6)).unwrap();
            assert_eq!(near.len(), 1);
        }
    }
}
