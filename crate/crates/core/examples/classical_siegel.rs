// Mean-value formula over random unimodular lattices in the plane, for all nonzero
// lattice points and for the visible ones.

use siegel_radon::lattice2d::{mc_classical_siegel, LatticeMode};
use siegel_radon::numerics::{TestFunction, Tolerances};

pub fn run_example() -> siegel_radon::Result<()> {
    let f = TestFunction::standard_gaussian(2);
    let tol = Tolerances::default();
    for mode in [LatticeMode::All, LatticeMode::Visible] {
        let r = mc_classical_siegel(&f, mode, 4000, 11, &tol)?;
        println!("{mode:?}: {:.4} ± {:.4} vs {:.4} (z {:.2})", r.mean_re, r.stderr, r.reference, r.z);
        assert!(r.pass);
    }
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
