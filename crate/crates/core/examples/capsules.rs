//! Capsules: membership, bounding volumes and the shrunken-intersection witness.

use segavd::capsule::{bounding_volumes, build_capsule, shrunken_intersection_witness};
use segavd::geometry::{local_feature_size, SegmentSet};
use segavd::linalg::Point;

fn main() -> segavd::Result<()> {
    let set = SegmentSet::new(
        vec![
            (Point::new(&[0.0, 0.0]), Point::new(&[6.0, 0.0])),
            (Point::new(&[0.0, 2.0]), Point::new(&[6.0, 2.5])),
            (Point::new(&[8.0, -1.0]), Point::new(&[8.0, 3.0])),
        ],
        false,
    )?;
    let x = Point::new(&[3.0, 0.7]);
    let phi = local_feature_size(&x, &set)?.value;
    let cap = build_capsule(&set, &x, phi)?;
    println!("phi(x) = {phi:.4}, {} constraints", cap.constraints.len());
    for c in &cap.constraints {
        println!("  {:?} on segment {} threshold {:.4}", c.kind, c.segment, c.threshold);
    }
    for (z, lambda) in [([3.5, 0.7], 0.5), ([3.0, 1.6], 0.5), ([3.0, 1.6], 1.0)] {
        let z = Point::new(&z);
        println!("z={:?} in C^{lambda}: {}", z, cap.contains(&z, lambda));
    }
    let bv = bounding_volumes(&set, &x, phi)?;
    println!("V-/V+ volumes {:.4} / {:.4}, ratio {:.3}", bv.inner_volume(), bv.outer_volume(), bv.volume_ratio());
    let other = build_capsule(&set, &Point::new(&[3.4, 0.8]), phi)?;
    match shrunken_intersection_witness(&cap, &other, 0.5) {
        Some(w) => println!("C^1/2 capsules meet at {:?}", w),
        None => println!("no witness found"),
    }
    Ok(())
}
