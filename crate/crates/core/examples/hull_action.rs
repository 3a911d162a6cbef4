// Sample the hull uniformly and check that the translation action shifts point sets:
// `P_{g.x} = P_x − g`.

use siegel_radon::cps::{act, pointset_of_hull, sample_hull, CutProjectScheme, Window};
use siegel_radon::numerics::{Aabb, RngStream};

pub fn run_example() -> siegel_radon::Result<()> {
    let scheme = CutProjectScheme::zsqrt2();
    let window = Window::cube(1, 0.5);
    let mut stream = RngStream::new(7, 0);
    let region = Aabb::cube(1, 50.0);
    for _ in 0..5 {
        let x = sample_hull(&scheme, &mut stream);
        let g = stream.uniform_in(-10.0, 10.0);
        let moved = pointset_of_hull(&scheme, &window, &act(&scheme, &[g], &x), &region)?;
        let shifted = pointset_of_hull(&scheme, &window, &x, &region.translate(&[g]))?.translate(&[-g]);
        let worst = moved.points.iter().zip(&shifted.points).map(|(a, b)| (a[0] - b[0]).abs()).fold(0.0, f64::max);
        println!("g = {g:+.4}: {} points, max deviation {worst:.2e}", moved.len());
        assert_eq!(moved.len(), shifted.len());
        assert!(worst < 1e-9);
    }
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
