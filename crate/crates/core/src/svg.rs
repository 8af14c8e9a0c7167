//! Plain SVG figures: box sets on `R = [-1, 1] × [0, 1]` and planar phase
//! portraits on `Q = [-1, 1]²`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::cherryplug::{Equilibrium, EquilibriumKind, VectorField2};
use crate::geometry::Point2;
use crate::skew2d::BoxSet;

const MARGIN: f64 = 30.0;

/// Affine map from a world rectangle to pixels, `y` pointing up.
struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(world: (f64, f64, f64, f64), width: f64, height: f64) -> Self {
        let (x0, x1, y0, y1) = world;
        Self {
            x0,
            y0,
            sx: (width - 2.0 * MARGIN) / (x1 - x0),
            sy: (height - 2.0 * MARGIN) / (y1 - y0),
            width,
            height,
        }
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        (MARGIN + (p.x - self.x0) * self.sx, self.height - MARGIN - (p.y - self.y0) * self.sy)
    }

    fn open(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="18" font-family="sans-serif" font-size="14">{}</text>"#,
            MARGIN,
            escape(title)
        );
        let (l, t) = (MARGIN, MARGIN);
        let _ = writeln!(
            s,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
            self.width - 2.0 * MARGIN,
            self.height - 2.0 * MARGIN
        );
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Box sets as filled rectangles, one colour per set, with points drawn on
/// top. Boxes are snapped to half-pixel resolution and duplicates dropped.
pub fn box_sets_svg(layers: &[(&BoxSet, &str)], overlay: &[Point2], title: &str) -> String {
    let frame = Frame::new((-1.0, 1.0, 0.0, 1.0), 1000.0, 560.0);
    let mut s = frame.open(title);
    let snap = |v: f64| (v * 2.0).round() as i64;
    for (set, colour) in layers {
        let mut rects = BTreeSet::new();
        for b in set.boxes() {
            let (a, top) = frame.px(Point2::new(b.leaf.lo, b.fiber.hi));
            let (c, bottom) = frame.px(Point2::new(b.leaf.hi, b.fiber.lo));
            rects.insert((snap(a), snap(top), snap(c).max(snap(a) + 1), snap(bottom).max(snap(top) + 1)));
        }
        let _ = writeln!(s, r#"<g fill="{colour}" fill-opacity="0.6" stroke="none">"#);
        for (a, t, c, b) in rects {
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                a as f64 / 2.0,
                t as f64 / 2.0,
                (c - a) as f64 / 2.0,
                (b - t) as f64 / 2.0
            );
        }
        let _ = writeln!(s, "</g>");
    }
    if !overlay.is_empty() {
        let _ = writeln!(s, r#"<g fill="black">"#);
        let mut seen = BTreeSet::new();
        for p in overlay {
            let (x, y) = frame.px(*p);
            if seen.insert((snap(x), snap(y))) {
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5"/>"#);
            }
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

fn colour_of(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::Sink => "blue",
        EquilibriumKind::Source => "red",
        EquilibriumKind::Saddle => "green",
        EquilibriumKind::Degenerate => "gray",
    }
}

/// Normalized direction field on a `grid × grid` lattice, trajectories as
/// polylines and equilibria coloured by type.
pub fn phase_portrait_svg(
    field: &dyn VectorField2,
    equilibria: &[Equilibrium],
    paths: &[Vec<Point2>],
    grid: usize,
    title: &str,
) -> String {
    let frame = Frame::new((-1.0, 1.0, -1.0, 1.0), 640.0, 640.0);
    let mut s = frame.open(title);
    let step = 2.0 / grid.max(1) as f64;
    let len = 0.4 * step;
    let _ = writeln!(s, r#"<g stroke="gray" stroke-width="1">"#);
    for i in 0..grid {
        for j in 0..grid {
            let p = Point2::new(-1.0 + (i as f64 + 0.5) * step, -1.0 + (j as f64 + 0.5) * step);
            let [u, v] = field.eval(p);
            let n = u.hypot(v);
            if n == 0.0 || !n.is_finite() {
                continue;
            }
            let q = Point2::new(p.x + len * u / n, p.y + len * v / n);
            let (x0, y0) = frame.px(p);
            let (x1, y1) = frame.px(q);
            let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}"/>"#);
            let _ = writeln!(s, r#"<circle cx="{x1:.2}" cy="{y1:.2}" r="1" fill="gray"/>"#);
        }
    }
    let _ = writeln!(s, "</g>");
    for path in paths {
        let mut pts = String::new();
        for p in path {
            let (x, y) = frame.px(*p);
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="orange" stroke-width="1.5"/>"#,
            pts.trim_end()
        );
    }
    for e in equilibria {
        let (x, y) = frame.px(e.position);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"/>"#, colour_of(e.kind));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skew2d::{BoxBudget, Half, SkewReturnMap};

    #[test]
    fn box_svg_is_well_formed() {
        let h = SkewReturnMap::default_h();
        let a = h.attractor_half(Half::Plus, 3, &BoxBudget::default()).unwrap();
        let svg = box_sets_svg(&[(&a, "steelblue")], &[h.fixed_point_p()], "A+ & P");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("A+ &amp; P"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn portrait_draws_every_equilibrium() {
        let f = crate::cherryplug::CherryField::default();
        let r = crate::cherryplug::equilibria(&f, 32, 1e-12).unwrap();
        let svg = phase_portrait_svg(&f, &r.equilibria, &[vec![Point2::new(0.0, 0.0), Point2::new(0.5, 0.0)]], 10, "A");
        assert_eq!(svg.matches(r#"r="4""#).count(), r.equilibria.len());
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
