// Approximate eigenfunctions on the Z[√2] hull: the section-based `ξ(s(y))` and the
// Følner average, with their eigen-defects `|ψ(h⁻¹.y) − ξ(h)ψ(y)|`.

use siegel_radon::cps::{sample_hull, CutProjectScheme, Window};
use siegel_radon::eigen::{eigen_defect, folner_average, ApproxEigenfunction, CpsReturnTimes, FolnerEigenfunction, HCharacter};
use siegel_radon::numerics::RngStream;

pub fn run_example() -> siegel_radon::Result<()> {
    let scheme = CutProjectScheme::zsqrt2();
    let sys = CpsReturnTimes { scheme: scheme.clone(), window: Window::cube(1, 0.5) };
    // A dual-lattice frequency: its character nearly fixes every return time.
    let xi = HCharacter::new(vec![(1.0 + 2f64.sqrt()) / 2.0]);
    let section = ApproxEigenfunction { sys: &sys, xi: xi.clone() };
    let folner = FolnerEigenfunction { sys: &sys, xi: xi.clone(), side: 8.0, grid: 32 };
    let mut stream = RngStream::new(9, 0);
    for _ in 0..4 {
        let y = sample_hull(&scheme, &mut stream);
        let h = [stream.uniform_in(-1.0, 1.0)];
        let v = folner_average(&sys, &xi, &y, 8.0, 32)?;
        let d1 = eigen_defect(&sys, &section, &xi, &y, &h)?;
        let d2 = eigen_defect(&sys, &folner, &xi, &y, &h)?;
        println!("|ψ_F(y)| = {:.4}, defects: section {d1:.4}, Følner {d2:.4}", v.value.norm());
        assert!(v.excluded_fraction < 0.01);
    }
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
