// Build the Z[√2] cut-and-project set, check it is Meyer and estimate its density.

use siegel_radon::cps::{check_meyer, cut_and_project, density, CutProjectScheme, Window};
use siegel_radon::numerics::Aabb;

pub fn run_example() -> siegel_radon::Result<()> {
    let scheme = CutProjectScheme::zsqrt2();
    let window = Window::cube(1, 0.5);
    let region = Aabb::cube(1, 200.0);
    let ps = cut_and_project(&scheme, &window, &[0.0], &[0.0], &region)?;
    let meyer = check_meyer(&ps, 0.1)?;
    let d = density(&ps)?;
    let expected = window.volume() / scheme.covolume;
    println!("{} points in [-200,200), density {d:.5} (σ = {expected:.5})", ps.len());
    println!("min gap {:.4}, difference-set min gap {:.4}, meyer = {}", meyer.min_gap, meyer.difference_set_min_gap, meyer.meyer);
    assert!(meyer.meyer);
    assert!((d - expected).abs() / expected < 0.01);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
