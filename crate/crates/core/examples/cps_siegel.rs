// Siegel mean-value formula on the hull of a cut-and-project set, for trivial `H` on Z[√2]
// and for the compatible pair `H = ℝ × {0}` on Z[√2]².

use siegel_radon::cps::{CutProjectScheme, Window};
use siegel_radon::numerics::{Aabb, TestFunction, Tolerances};
use siegel_radon::siegel::{mc_siegel_formula, siegel_constant, CpsSampler, SiegelConstantMode, TransversalSpec};

pub fn run_example() -> siegel_radon::Result<()> {
    let tol = Tolerances::default();

    let scheme = CutProjectScheme::zsqrt2();
    let window = Window::cube(1, 0.5);
    let sigma = siegel_constant(&SiegelConstantMode::trivial_h(&scheme, &window))?;
    let f = TestFunction::gaussian(vec![0.0], 1.0)?;
    let region = f.support_box().inflate(0.5);
    let sampler = CpsSampler { scheme, window, region };
    let r = mc_siegel_formula(&sampler, &f, &TransversalSpec::identity(1), sigma, 2000, 1, &tol)?;
    println!("Z[√2], trivial H: {:.4} ± {:.4} vs σ∫f = {:.4}", r.mean_re, r.stderr, r.reference);
    assert!(r.pass);

    let scheme = CutProjectScheme::zsqrt2_squared();
    let window = Window::cube(2, 1.0);
    let mode = SiegelConstantMode::CompatiblePair { projected_window_volume: 2.0, covol_delta: 8f64.sqrt(), covol_gamma: None };
    let sigma = siegel_constant(&mode)?;
    let f = TestFunction::box_indicator(vec![0.0], 4.0)?;
    let region = Aabb::new(vec![-5.0, -4.5], vec![5.0, 4.5])?;
    let sampler = CpsSampler { scheme, window, region };
    let t = TransversalSpec::Coordinate { dim: 2, h_axes: vec![0] };
    let r = mc_siegel_formula(&sampler, &f, &t, sigma, 2000, 2, &tol)?;
    println!("Z[√2]², compatible pair: {:.4} ± {:.4} vs {:.4}", r.mean_re, r.stderr, r.reference);
    assert!(r.pass);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
