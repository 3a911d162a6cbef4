// The classical Zak transform on the Heisenberg group is an isometry: quadrature of
// `⟨Zf, Zf⟩` over a fundamental domain converges to `‖f‖²` as the grid is refined.

use siegel_radon::heisenberg::zak_inner_product_unchecked;
use siegel_radon::numerics::TestFunction;

pub fn run_example() -> siegel_radon::Result<()> {
    let f = TestFunction::gaussian(vec![0.3], 0.8)?;
    let norm = f.l2_norm_sq();
    let mut last = f64::INFINITY;
    for grid in [4, 8, 16, 32] {
        let err = (zak_inner_product_unchecked(&f, &f, 1, grid)? - norm).norm();
        println!("{grid:>3} points/axis: |⟨Zf,Zf⟩ − ‖f‖²| = {err:.2e}");
        assert!(err <= last.max(1e-12));
        last = err;
    }
    assert!(last < 1e-9);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
