//! SVG rendering of planar structures: segments as lines, one tier of outer
//! ellipsoids as rotated ellipses.

use std::fmt::Write as _;

use crate::avd::{AvdDag, NodeKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Main level `i` of the nodes to draw.
    pub level: usize,
    /// Refinement exponent `j`; `None` draws every exponent of the level.
    pub exponent: Option<usize>,
    /// Image width in pixels; the height follows the aspect ratio.
    pub width: f64,
    pub stroke_scale: f64,
    /// Also draw inner ellipsoids (dashed).
    pub inner: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            level: 0,
            exponent: Some(0),
            width: 800.0,
            stroke_scale: 1.0,
            inner: false,
        }
    }
}

/// One emitted ellipse in data coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseElement {
    pub node: usize,
    pub cx: f64,
    pub cy: f64,
    /// Semi-axis along the rotated x direction (the longer one).
    pub rx: f64,
    pub ry: f64,
    /// Angle of the major axis from the x axis, in degrees within `(-90, 90]`.
    pub rotation_deg: f64,
}

/// Ellipses of the selected tier, ordered by node id.
pub fn tier_ellipses(dag: &AvdDag, opts: &RenderOptions) -> Result<Vec<EllipseElement>> {
    if dag.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "rendering needs a planar structure, got dimension {}",
            dag.dim()
        )));
    }
    Ok(dag
        .nodes
        .iter()
        .filter(|n| n.level == opts.level && opts.exponent.is_none_or(|j| n.refine_exponent == j))
        .map(|n| ellipse_of(n.id, &n.outer))
        .collect())
}

fn ellipse_of(node: usize, e: &crate::ellipsoid::Ellipsoid) -> EllipseElement {
    let axes = e.axes();
    let (major, dir) = axes[0];
    let minor = axes[1].0;
    let mut deg = dir[1].atan2(dir[0]).to_degrees();
    if deg <= -90.0 {
        deg += 180.0;
    } else if deg > 90.0 {
        deg -= 180.0;
    }
    EllipseElement {
        node,
        cx: e.center[0],
        cy: e.center[1],
        rx: major,
        ry: minor,
        rotation_deg: deg,
    }
}

pub fn render_svg(dag: &AvdDag, opts: &RenderOptions) -> Result<String> {
    let ellipses = tier_ellipses(dag, opts)?;
    if !(opts.width > 0.0) || !(opts.stroke_scale > 0.0) {
        return Err(Error::Usage("width and stroke scale must be positive".into()));
    }
    // View: the segments' bounding box with a margin.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for s in &dag.segments.segments {
        for p in [s.a, s.b] {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let pad = 0.25 * span;
    let (x0, y0) = (lo[0] - pad, lo[1] - pad);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let scale = opts.width / w;
    let height = h * scale;
    let stroke = opts.stroke_scale / scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        opts.width, height, opts.width, height
    );
    // Flip y so the picture uses mathematical orientation.
    let _ = writeln!(
        out,
        r#"<g transform="matrix({} 0 0 {} {} {})" fill="none">"#,
        scale,
        -scale,
        -x0 * scale,
        (y0 + h) * scale
    );
    for el in &ellipses {
        let node = &dag.nodes[el.node];
        let color = match node.kind {
            NodeKind::FinalLeaf => "#2a7ab0",
            NodeKind::BasicLeaf => "#c05a1c",
            NodeKind::Internal => "#7a7a7a",
        };
        let _ = writeln!(
            out,
            r#"<ellipse data-node="{}" cx="{}" cy="{}" rx="{}" ry="{}" transform="rotate({} {} {})" stroke="{}" stroke-width="{}"/>"#,
            el.node, el.cx, el.cy, el.rx, el.ry, el.rotation_deg, el.cx, el.cy, color, stroke
        );
        if opts.inner {
            let inner = ellipse_of(el.node, &node.inner);
            let _ = writeln!(
                out,
                r#"<ellipse data-node="{}" data-inner="true" cx="{}" cy="{}" rx="{}" ry="{}" transform="rotate({} {} {})" stroke="{}" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
                inner.node,
                inner.cx,
                inner.cy,
                inner.rx,
                inner.ry,
                inner.rotation_deg,
                inner.cx,
                inner.cy,
                color,
                stroke,
                4.0 * stroke,
                3.0 * stroke
            );
        }
    }
    for s in &dag.segments.segments {
        let _ = writeln!(
            out,
            r#"<line data-segment="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="{}" stroke-linecap="round"/>"#,
            s.id,
            s.a[0],
            s.a[1],
            s.b[0],
            s.b[1],
            3.0 * stroke
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avd::{build, BuildConfig};
    use crate::geometry::SegmentSet;
    use crate::linalg::Point;

    fn cfg() -> BuildConfig {
        BuildConfig {
            root_samples: 0,
            node_samples: 0,
            ..BuildConfig::default()
        }
    }

    #[test]
    fn single_segment_has_one_line_and_an_ellipse() {
        let set = SegmentSet::new(vec![(Point::new(&[0.0, 0.0]), Point::new(&[1.0, 0.0]))], false).unwrap();
        let dag = build(&set, 0.5, &cfg()).unwrap();
        let svg = render_svg(&dag, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.matches("<ellipse").count() >= 1);
    }

    #[test]
    fn rejects_three_dimensions() {
        let set = SegmentSet::new(
            vec![(Point::new(&[0.0, 0.0, 0.0]), Point::new(&[1.0, 0.0, 0.0]))],
            false,
        )
        .unwrap();
        let dag = build(&set, 0.5, &cfg()).unwrap();
        assert!(matches!(render_svg(&dag, &RenderOptions::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rotation_follows_major_axis() {
        let e = crate::ellipsoid::Ellipsoid::new(
            Point::new(&[0.0, 0.0]),
            crate::linalg::Mat::from_rows(&[vec![0.625, -0.375], vec![-0.375, 0.625]]).unwrap(),
        );
        // Eigenvalues 0.25 along (1,1) and 1 along (1,-1).
        let el = ellipse_of(0, &e);
        assert!((el.rotation_deg - 45.0).abs() < 1e-9, "{}", el.rotation_deg);
        assert!((el.rx - 2.0).abs() < 1e-9 && (el.ry - 1.0).abs() < 1e-9);
    }
}
