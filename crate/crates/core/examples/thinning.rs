// Bernoulli thinning with retention probability `p` scales both the upper density and the
// Siegel constant by `p`.

use siegel_radon::cps::{cut_and_project, CutProjectScheme, Window};
use siegel_radon::numerics::{Aabb, RngStream, TestFunction, Tolerances};
use siegel_radon::siegel::{mc_siegel_formula, thin_bernoulli, upper_density, CpsSampler, Thinned, TransversalSpec};

pub fn run_example() -> siegel_radon::Result<()> {
    let p = 0.5;
    let scheme = CutProjectScheme::zsqrt2();
    let window = Window::cube(1, 0.5);
    let full = cut_and_project(&scheme, &window, &[0.0], &[0.0], &Aabb::cube(1, 1000.0))?;
    let thinned = thin_bernoulli(&full, p, &mut RngStream::new(3, 0))?;
    let boxes: Vec<Aabb> = [250.0, 500.0, 1000.0].iter().map(|&r| Aabb::cube(1, r)).collect();
    let (d_full, d_thin) = (upper_density(&full, &boxes)?, upper_density(&thinned, &boxes)?);
    println!("upper density {d_full:.4} → {d_thin:.4} (ratio {:.3})", d_thin / d_full);

    let sigma = p * window.volume() / scheme.covolume;
    let f = TestFunction::triangle(vec![0.0], 2.0)?;
    let region = f.support_box().inflate(0.5);
    let sampler = Thinned { inner: CpsSampler { scheme, window, region }, p };
    let r = mc_siegel_formula(&sampler, &f, &TransversalSpec::identity(1), sigma, 3000, 12, &Tolerances::default())?;
    println!("thinned Siegel mean {:.4} ± {:.4} vs {:.4}", r.mean_re, r.stderr, r.reference);
    assert!(r.pass);
    assert!((d_thin / d_full - p).abs() < 0.05);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
