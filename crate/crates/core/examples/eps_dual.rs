// ε-dual of a truncated Z[√2] cut-and-project set: candidates from the dual scheme, members
// sorted by defect, and the relative-density gap report.

use siegel_radon::cps::{cut_and_project, CutProjectScheme, Window};
use siegel_radon::eigen::{check_relative_density, dual_candidates, epsilon_dual, EpsDualQuery};
use siegel_radon::numerics::Aabb;

pub fn run_example() -> siegel_radon::Result<()> {
    let scheme = CutProjectScheme::zsqrt2();
    let r = 50.0;
    let ps = cut_and_project(&scheme, &Window::cube(1, 0.5), &[0.0], &[0.0], &Aabb::cube(1, r))?;
    let candidates = dual_candidates(&scheme, -10.0, 10.0, 0.5)?;
    let members = epsilon_dual(&EpsDualQuery::new(ps.points, 0.5, candidates, r)?);
    for m in members.iter().take(6) {
        println!("ξ = {:+.5}, defect {:.4}", m.frequency[0], m.defect);
    }
    let freqs: Vec<f64> = members.iter().map(|m| m.frequency[0]).collect();
    let gap = check_relative_density(&freqs, -10.0, 10.0, 2.0);
    println!("{} members in [-10,10], widest gap {:.3} at {:?}", gap.count, gap.max_gap, gap.widest);
    assert!(members[0].frequency[0] == 0.0 && members.iter().all(|m| m.defect <= 0.5));
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
