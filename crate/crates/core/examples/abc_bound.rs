// The counting bound `|π(A) ∩ π(B)| ≤ |A⁻¹A ∩ CB|` on random finite sets in ℝ² with
// `H` a coordinate axis and in the Heisenberg group with `H = U × Z`.

use siegel_radon::cli::random_abc_instance;
use siegel_radon::numerics::RngStream;
use siegel_radon::siegel::{abc_bound, TransversalSpec};

pub fn run_example() -> siegel_radon::Result<()> {
    let specs = [TransversalSpec::Coordinate { dim: 2, h_axes: vec![0] }, TransversalSpec::Heisenberg { n: 1 }];
    for t in &specs {
        let mut stream = RngStream::new(5, 0);
        for _ in 0..10 {
            let (a, b, c) = random_abc_instance(t, 12, 3, &mut stream);
            let r = abc_bound(&a, &b, &c, t)?;
            assert!(r.holds(), "{} violated: {r:?}", t.name());
            assert_eq!(r.covering_missing, 0);
        }
        println!("{}: 10 instances, bound holds", t.name());
    }
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
