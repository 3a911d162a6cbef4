// The Heisenberg approximate lattice over Z[√2]: build `Λ`, sample its hull, compute the
// hitting set `Y_x` three ways and estimate its intensity.

use siegel_radon::azak::{
    build_heis_lambda, hitting_candidates, hitting_set, hitting_set_by_projection, hitting_set_by_translation,
    mc_hitting_intensity, sample_heis_hull, sigma_y, HeisWindow,
};
use siegel_radon::numerics::{RngStream, Tolerances};

pub fn run_example() -> siegel_radon::Result<()> {
    let lambda = build_heis_lambda(1.0, 1.0, 1.0, 6.0)?;
    println!("|Λ ∩ [-6,6]³| = {}", lambda.points.len());
    let w = HeisWindow::unit();
    let mut stream = RngStream::new(21, 0);
    for _ in 0..3 {
        let x = sample_heis_hull(&mut stream);
        let direct: Vec<f64> = hitting_set(&w, &x, -20.0, 20.0)?.iter().map(|y| y.l).collect();
        let proj = hitting_set_by_projection(&w, &x, -20.0, 20.0)?;
        let trans = hitting_set_by_translation(&w, &x, &hitting_candidates(&w, &x, -20.0, 20.0, 1.0)?)?;
        println!("|Y_x ∩ [-20,20]| = {} (projection {}, translation {})", direct.len(), proj.len(), trans.len());
        assert_eq!(direct, proj);
        assert_eq!(direct, trans);
    }
    let r = mc_hitting_intensity(&w, 40.0, 2000, 3, &Tolerances::default())?;
    println!("intensity {:.4} ± {:.4} vs σ(Y) = {:.4}", r.mean_re, r.stderr, sigma_y(&w)?);
    assert!(r.pass);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
