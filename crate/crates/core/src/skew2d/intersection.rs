use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoxBudget, BoxSet, Half, SkewReturnMap, Variant};
use crate::error::Result;
use crate::geometry::{diameter, GridIndex, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionKind {
    Point,
    SegmentClosure,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub variant: Variant,
    pub n: usize,
    pub eps: f64,
    pub kind: IntersectionKind,
    /// Midpoints of sample pairs, one from each half, at most `eps` apart.
    pub points: Vec<Point2>,
    pub diameter: f64,
    pub p: Point2,
    pub distance_to_p: f64,
    pub contains_p: bool,
    /// Largest `|leaf|` among the points.
    pub leaf_extent: f64,
    pub plus_boxes: usize,
    pub minus_boxes: usize,
}

impl IntersectionReport {
    pub fn matches_variant(&self) -> bool {
        match self.variant {
            Variant::H => self.kind == IntersectionKind::Point && self.contains_p,
            Variant::G => self.kind == IntersectionKind::SegmentClosure && self.contains_p,
        }
    }
}

impl SkewReturnMap {
    pub fn class_intersection(&self, n: usize, eps: f64, budget: &BoxBudget) -> Result<IntersectionReport> {
        let a = self.attractor_half(Half::Plus, n, budget)?;
        let b = self.attractor_half(Half::Minus, n, budget)?;
        Ok(self.class_intersection_of(&a, &b, eps))
    }

    /// Intersection of two precomputed generations.
    ///
    /// Both sets are sampled along their leaves with spacing `eps/4` inside an
    /// `eps` window of the other set's bounding box; every sample of the plus
    /// set with a minus sample within `eps` contributes the midpoint of the
    /// nearest such pair.
    pub fn class_intersection_of(&self, a: &BoxSet, b: &BoxSet, eps: f64) -> IntersectionReport {
        let n = a.generation.min(b.generation);
        let p = self.fixed_point_p();
        // equals 2μ^n unless coarsening widened some fibers
        let slack = 2.0 * self.mu.powi(n as i32).max(a.max_fiber_width()).max(b.max_fiber_width());
        let empty = |kind| IntersectionReport {
            variant: self.variant,
            n,
            eps,
            kind,
            points: Vec::new(),
            diameter: 0.0,
            p,
            distance_to_p: f64::INFINITY,
            contains_p: false,
            leaf_extent: 0.0,
            plus_boxes: a.len(),
            minus_boxes: b.len(),
        };
        let (Some(ab), Some(bb)) = (a.bounds(), b.bounds()) else {
            return empty(IntersectionKind::Empty);
        };
        let spacing = 0.25 * eps;
        let sa = a.samples(spacing, (bb.0 - eps, bb.1 + eps));
        let sb = b.samples(spacing, (ab.0 - eps, ab.1 + eps));
        if sa.is_empty() || sb.is_empty() {
            return empty(IntersectionKind::Empty);
        }
        let grid = GridIndex::new(&sb, 0.25 * eps);
        let mut points: Vec<Point2> = sa
            .par_iter()
            .filter_map(|q| grid.nearest_within(q, eps).map(|(_, j)| q.midpoint(&sb[j])))
            .collect();
        points.sort_by(|u, v| u.x.total_cmp(&v.x).then(u.y.total_cmp(&v.y)));
        points.dedup();
        if points.is_empty() {
            return empty(IntersectionKind::Empty);
        }
        let diameter = diameter(&points);
        let distance_to_p = points.iter().map(|q| q.dist(&p)).fold(f64::INFINITY, f64::min);
        let kind = if diameter <= eps + slack {
            IntersectionKind::Point
        } else {
            IntersectionKind::SegmentClosure
        };
        IntersectionReport {
            variant: self.variant,
            n,
            eps,
            kind,
            leaf_extent: points.iter().map(|q| q.x.abs()).fold(0.0, f64::max),
            points,
            diameter,
            p,
            distance_to_p,
            contains_p: distance_to_p <= slack,
            plus_boxes: a.len(),
            minus_boxes: b.len(),
        }
    }
}
