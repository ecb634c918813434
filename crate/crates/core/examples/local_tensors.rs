//! Hessian-based local tensors of the squared distance, their blend, and the
//! metric ball they define.

use segavd::geometry::{Segment, SegmentSet};
use segavd::linalg::Point;
use segavd::tensors::{blended_tensor, distance_triple, local_tensor, metric_ball};

fn main() -> segavd::Result<()> {
    let s = Segment::new(Point::new(&[0.0, 0.0]), Point::new(&[4.0, 0.0]), 0);
    for x in [[2.0, 1.0], [5.0, 1.0], [2.0, 0.1]] {
        let x = Point::new(&x);
        let t = distance_triple(&x, &s);
        let h = local_tensor(&x, &s)?;
        println!(
            "x={:?}: d_seg {:.4} d_line {:.4} d_end {:.4}; eigenvalues along {:.4} across {:.4}",
            x, t.d_seg, t.d_line, t.d_endpoint, h.eigen_small, h.eigen_large
        );
    }
    let set = SegmentSet::new(
        vec![
            (Point::new(&[0.0, 0.0]), Point::new(&[4.0, 0.0])),
            (Point::new(&[0.0, 2.0]), Point::new(&[4.0, 2.0])),
        ],
        false,
    )?;
    let x = Point::new(&[2.0, 0.8]);
    let m = blended_tensor(&x, &set)?;
    let ball = metric_ball(&x, &set)?;
    println!("blended tensor {:?}", m.to_rows());
    println!("metric ball semi-axes {:?}", ball.semi_axes());
    Ok(())
}
