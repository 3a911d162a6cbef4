// Duality between the Siegel transform and its adjoint: `E[Sf · conj φ] = ∫ f · conj(S*φ)`
// for a trigonometric polynomial `φ` on the hull torus.

use std::f64::consts::PI;

use num_complex::Complex64;
use siegel_radon::cps::{CutProjectScheme, HullPoint, Window};
use siegel_radon::numerics::{TestFunction, Tolerances};
use siegel_radon::siegel::mc_siegel_duality;

pub fn run_example() -> siegel_radon::Result<()> {
    let scheme = CutProjectScheme::zsqrt2();
    let window = Window::cube(1, 1.0);
    let f = TestFunction::gaussian(vec![0.2], 1.0)?;
    let phi = |h: &HullPoint| {
        let c = &h.coefficients;
        Complex64::new(1.0 + 0.5 * (2.0 * PI * c[0]).cos(), 0.0)
    };
    let r = mc_siegel_duality(&f, &phi, &scheme, &window, 3000, 4, 64, &Tolerances::default(), 1e-3)?;
    println!("lhs {:.4} ± {:.4}, rhs {:.4}", r.lhs.mean.re, r.lhs.stderr, r.rhs.re);
    assert!(r.pass);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
