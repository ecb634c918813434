//! Largest concentric ellipsoid inside a capsule and exact ellipsoid tests.

use segavd::capsule::build_capsule;
use segavd::ellipsoid::{ellipsoids_disjoint, inscribed_ellipsoid_traced};
use segavd::geometry::SegmentSet;
use segavd::linalg::Point;

fn main() -> segavd::Result<()> {
    let set = SegmentSet::new(
        vec![
            (Point::new(&[0.0, 0.0, 0.0]), Point::new(&[5.0, 0.0, 0.0])),
            (Point::new(&[0.0, 2.0, 0.0]), Point::new(&[5.0, 2.0, 0.5])),
            (Point::new(&[2.0, 1.0, 1.5]), Point::new(&[2.0, 1.0, 4.0])),
        ],
        false,
    )?;
    let x = Point::new(&[2.5, 0.6, 0.2]);
    let cap = build_capsule(&set, &x, 0.8)?;
    let solve = inscribed_ellipsoid_traced(&cap, 1.0);
    let e = solve.ellipsoid;
    println!("semi-axes {:?}", e.semi_axes());
    println!("log-det trace over {} accepted steps: {:?}", solve.trace.len(), solve.trace);
    for (s, dir) in e.axes() {
        let tip = x.offset(&dir, s);
        println!("axis tip {:?}: capsule gauge {:.6}", tip, cap.gauge(&tip));
    }
    let shifted = e.translated(x.offset(&Point::unit(3, 2), 2.0 * e.min_semi_axis() + 1e-3));
    let far = e.translated(x.offset(&Point::unit(3, 0), 2.0 * e.max_semi_axis() + 1e-3));
    println!("disjoint from copy shifted along z: {}", ellipsoids_disjoint(&e, &shifted));
    println!("disjoint from copy shifted along x: {}", ellipsoids_disjoint(&e, &far));
    Ok(())
}
