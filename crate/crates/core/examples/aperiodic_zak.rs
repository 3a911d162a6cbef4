// The aperiodic Zak transform with the exact dual eigenfunction: equivariance under the
// Heisenberg action and the Monte-Carlo isometry `E|σ(Y)^{-1/2} S_ψ f|² ≈ ‖f‖²`.

use siegel_radon::azak::{
    act, aperiodic_zak, aperiodic_zak_reindexed, mc_isometry, residual_defect, sample_heis_hull, DualEigenfunction, HeisWindow,
    IsometryMeta,
};
use siegel_radon::heisenberg::HeisPoint;
use siegel_radon::numerics::{RngStream, TestFunction, Tolerances};

pub fn run_example() -> siegel_radon::Result<()> {
    let w = HeisWindow::unit();
    let psi = DualEigenfunction::new(29, 41);
    let f = TestFunction::gaussian(vec![0.0], 1.0)?;
    let reach = f.truncation_radius() + 20.0;

    let mut stream = RngStream::new(17, 0);
    let x = sample_heis_hull(&mut stream);
    let g = HeisPoint::new1(0.3, -0.7, 1.1);
    let direct = aperiodic_zak(&f, &psi, &w, &act(&g, &x), (-reach, reach))?;
    let reindexed = aperiodic_zak_reindexed(&f, &psi, psi.s, &w, &x, &g)?;
    println!("S f(g.x) = {direct:.6}, reindexed {reindexed:.6}");

    let xi = psi.xi();
    let psi_defect = residual_defect(&psi, &xi, &w, 100, 1)?;
    let meta = IsometryMeta { epsilon: 0.5, psi_defect, folner_box: None };
    let r = mc_isometry(&f, psi.s, &psi, meta, &w, 2000, 8, &Tolerances::default())?;
    println!("s = {:.4}: ratio {:.4} (tolerance {:.3}), mean {:.4}{:+.4}i", r.s, r.ratio, r.ratio_tolerance, r.mean_re, r.mean_im);
    assert!((direct - reindexed).norm() < 1e-8);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
