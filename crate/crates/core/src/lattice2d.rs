//! Random unimodular planar lattices and the classical Siegel mean value.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mc_map, RngStream, TestFunction, Tolerances};
use crate::siegel::SiegelReport;

const REJECTION_CAP: usize = 10_000;
const COEFF_CAP: u128 = 10_000_000;

/// Lattice `ℤ b1 + ℤ b2` with `det [b1 b2] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodularLattice2 {
    /// Columns are the basis vectors.
    pub basis: [[f64; 2]; 2],
}

impl UnimodularLattice2 {
    /// From basis vectors `b1`, `b2`.
    pub fn new(b1: [f64; 2], b2: [f64; 2]) -> Result<Self> {
        let det = b1[0] * b2[1] - b1[1] * b2[0];
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("determinant {det} is not 1")));
        }
        Ok(UnimodularLattice2 { basis: [b1, b2] })
    }

    pub fn standard() -> Self {
        UnimodularLattice2 { basis: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn det(&self) -> f64 {
        let [b1, b2] = self.basis;
        b1[0] * b2[1] - b1[1] * b2[0]
    }

    pub fn point(&self, n1: i64, n2: i64) -> [f64; 2] {
        let [b1, b2] = self.basis;
        [n1 as f64 * b1[0] + n2 as f64 * b2[0], n1 as f64 * b1[1] + n2 as f64 * b2[1]]
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        UnimodularLattice2 { basis: [r(self.basis[0]), r(self.basis[1])] }
    }

    /// Nonzero `(n1, n2, x)` with `|x| ≤ r`.
    pub fn points_with_coefficients(&self, r: f64) -> Result<Vec<(i64, i64, [f64; 2])>> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be non-negative, got {r}")));
        }
        let [b1, b2] = self.basis;
        let det = self.det();
        // Rows of the inverse basis bound each coefficient by |row|·r.
        let row1 = (b2[1] * b2[1] + b2[0] * b2[0]).sqrt() / det.abs();
        let row2 = (b1[1] * b1[1] + b1[0] * b1[0]).sqrt() / det.abs();
        let k1 = (row1 * r).floor() as i64;
        let k2 = (row2 * r).floor() as i64;
        let needed = (2 * k1 + 1) as u128 * (2 * k2 + 1) as u128;
        if needed > COEFF_CAP {
            return Err(Error::EnumerationCap { needed, cap: COEFF_CAP });
        }
        let r2 = r * r;
        let mut out = Vec::new();
        for n1 in -k1..=k1 {
            for n2 in -k2..=k2 {
                if n1 == 0 && n2 == 0 {
                    continue;
                }
                let x = self.point(n1, n2);
                if x[0] * x[0] + x[1] * x[1] <= r2 {
                    out.push((n1, n2, x));
                }
            }
        }
        Ok(out)
    }
}

pub fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Haar sample of `SL₂(ℝ)/SL₂(ℤ)`: `τ = x + iy` from the modular fundamental domain with density
/// `∝ y^{-2}`, basis `(1, 0)/√y`, `(x, y)/√y`, then a uniform rotation.
pub fn sample_unimodular_lattice(stream: &mut RngStream) -> Result<UnimodularLattice2> {
    let y0 = 3f64.sqrt() / 2.0;
    for _ in 0..REJECTION_CAP {
        let x = stream.next_f64() - 0.5;
        let y = y0 / (1.0 - stream.next_f64());
        if x * x + y * y < 1.0 {
            continue;
        }
        let sy = y.sqrt();
        let base = UnimodularLattice2 { basis: [[1.0 / sy, 0.0], [x / sy, sy]] };
        return Ok(base.rotated(2.0 * PI * stream.next_f64()));
    }
    Err(Error::RejectionCap(REJECTION_CAP))
}

/// Nonzero lattice vectors of norm at most `r`.
pub fn lattice_points(l: &UnimodularLattice2, r: f64) -> Result<Vec<[f64; 2]>> {
    Ok(l.points_with_coefficients(r)?.into_iter().map(|p| p.2).collect())
}

/// Primitive vectors (coprime coefficients) of norm at most `r`.
pub fn visible_points(l: &UnimodularLattice2, r: f64) -> Result<Vec<[f64; 2]>> {
    Ok(l.points_with_coefficients(r)?.into_iter().filter(|p| gcd(p.0, p.1) == 1).map(|p| p.2).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeMode {
    All,
    Visible,
}

impl LatticeMode {
    /// Mean-value constant: 1 for all points, `1/ζ(2) = 6/π²` for primitive points.
    pub fn constant(self) -> f64 {
        match self {
            LatticeMode::All => 1.0,
            LatticeMode::Visible => 6.0 / (PI * PI),
        }
    }
}

/// `Σ_{x ∈ Λ∖0} f(x)` (or over primitive `x`).
pub fn lattice_sum(l: &UnimodularLattice2, f: &TestFunction, mode: LatticeMode) -> Result<f64> {
    let c = (f.center[0] * f.center[0] + f.center[1] * f.center[1]).sqrt();
    let r = c + f.truncation_radius() * 2f64.sqrt();
    let pts = l.points_with_coefficients(r)?;
    Ok(pts
        .iter()
        .filter(|p| mode == LatticeMode::All || gcd(p.0, p.1) == 1)
        .map(|p| f.eval_real(&p.2))
        .sum())
}

pub fn mc_classical_siegel(
    f: &TestFunction,
    mode: LatticeMode,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SiegelReport> {
    if f.dimension != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: f.dimension });
    }
    if !f.is_real() {
        return Err(Error::ComplexTestFunction);
    }
    if f.truncation_radius() > 10.0 {
        return Err(Error::InvalidParameter(format!("truncation radius {} exceeds 10", f.truncation_radius())));
    }
    let samples = mc_map(seed, n_samples, |_, s| {
        let l = sample_unimodular_lattice(s)?;
        Ok(num_complex::Complex64::new(lattice_sum(&l, f, mode)?, 0.0))
    })?;
    let name = match mode {
        LatticeMode::All => "classical_siegel_all",
        LatticeMode::Visible => "classical_siegel_visible",
    };
    let reference = num_complex::Complex64::new(mode.constant() * f.integral(), 0.0);
    let mut r = SiegelReport::from_samples(name, seed, &samples, reference, tol, 0.0)?;
    r.truncation_radius = Some(f.truncation_radius());
    Ok(r)
}

/// Fraction `|primitive points of ℤ² in B_R| / (πR²)`.
pub fn visible_density_z2(r: f64) -> f64 {
    let k = r.floor() as i64;
    let mut count = 0u64;
    for a in -k..=k {
        let bmax = ((r * r - (a * a) as f64).max(0.0)).sqrt().floor() as i64;
        for b in -bmax..=bmax {
            if gcd(a, b) == 1 {
                count += 1;
            }
        }
    }
    count as f64 / (PI * r * r)
}
