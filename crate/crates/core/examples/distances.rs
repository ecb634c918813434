//! Point-to-segment distances, the local feature size and the domain ball.

use segavd::geometry::{domain_ball, dist_segment_segment, instance_stats, local_feature_size, point_segment, SegmentSet};
use segavd::linalg::Point;

fn main() -> segavd::Result<()> {
    let set = SegmentSet::new(
        vec![
            (Point::new(&[0.0, 0.0]), Point::new(&[10.0, 0.0])),
            (Point::new(&[0.0, 2.0]), Point::new(&[10.0, 2.0])),
            (Point::new(&[12.0, -1.0]), Point::new(&[12.0, 3.0])),
        ],
        false,
    )?;
    for q in [[5.0, 0.4], [11.0, 1.0], [-3.0, 5.0]] {
        let q = Point::new(&q);
        let (id, dist) = set.nearest(&q);
        let foot = point_segment(&q, &set.segments[id]);
        let lfs = local_feature_size(&q, &set)?;
        println!(
            "q={:?}: nearest {id} at {dist:.4} (foot {:?}, interior {}), second {} at {:.4}",
            q, foot.point, foot.interior, lfs.second, lfs.value
        );
    }
    println!("gap(0,2) = {:.4}", dist_segment_segment(&set.segments[0], &set.segments[2]));
    let stats = instance_stats(&set)?;
    println!("diam {:.4}, min gap {:.4}, spread {:.4}", stats.diam, stats.min_gap, stats.spread);
    for eps in [1.0, 0.5, 0.1] {
        let b = domain_ball(&set, eps)?;
        println!("eps {eps}: B+ center {:?} radius {:.3}", b.center, b.radius);
    }
    Ok(())
}
