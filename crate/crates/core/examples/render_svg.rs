//! Render one tier of a planar structure; ellipses between two parallel
//! segments stretch along them.

use segavd::avd::{self, BuildConfig};
use segavd::geometry::SegmentSet;
use segavd::linalg::Point;
use segavd::svg::{render_svg, tier_ellipses, RenderOptions};

fn main() -> segavd::Result<()> {
    let set = SegmentSet::new(
        vec![
            (Point::new(&[0.0, 0.0]), Point::new(&[10.0, 0.0])),
            (Point::new(&[0.0, 2.0]), Point::new(&[10.0, 2.0])),
        ],
        false,
    )?;
    let cfg = BuildConfig {
        root_samples: 1_000,
        node_samples: 10,
        ..BuildConfig::default()
    };
    let dag = avd::build(&set, 0.5, &cfg)?;
    let opts = RenderOptions {
        level: 5,
        ..RenderOptions::default()
    };
    for e in tier_ellipses(&dag, &opts)?.iter().filter(|e| (1.0..9.0).contains(&e.cx) && (0.5..1.5).contains(&e.cy)).take(8) {
        println!("node {} at ({:.2}, {:.2}): {:.3} x {:.3}, rotated {:.1} deg", e.node, e.cx, e.cy, e.rx, e.ry, e.rotation_deg);
    }
    let path = std::env::temp_dir().join("segavd_two_parallel.svg");
    std::fs::write(&path, render_svg(&dag, &opts)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
