use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Half, SkewReturnMap};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::interval::{Interval, IntervalSet};

/// Leaf interval times a closed fiber interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafBox {
    pub leaf: Interval,
    pub fiber: Interval,
}

impl LeafBox {
    pub fn distance_to(&self, p: &Point2) -> f64 {
        self.leaf.distance_to(p.x).hypot(self.fiber.distance_to(p.y))
    }

    pub fn contains_box(&self, o: &LeafBox, tol: f64) -> bool {
        self.leaf.lo <= o.leaf.lo + tol
            && o.leaf.hi <= self.leaf.hi + tol
            && self.fiber.lo <= o.fiber.lo + tol
            && o.fiber.hi <= self.fiber.hi + tol
    }

    fn fiber_key(&self) -> (u64, u64) {
        (self.fiber.lo.to_bits(), self.fiber.hi.to_bits())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxBudget {
    pub cap: usize,
    /// Boxes closer than this are merged when the cap is exceeded.
    pub coarsen_tol: f64,
}

impl Default for BoxBudget {
    fn default() -> Self {
        Self {
            cap: 1_000_000,
            coarsen_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    pub generation: usize,
    pub coarsened: bool,
    boxes: Vec<LeafBox>,
}

impl BoxSet {
    /// Sorts and merges boxes with bit-identical fibers whose leaves connect.
    pub fn new(generation: usize, boxes: Vec<LeafBox>) -> Self {
        let mut boxes: Vec<LeafBox> = boxes.into_iter().filter(|b| !b.leaf.is_empty()).collect();
        boxes.par_sort_unstable_by(|a, b| {
            a.fiber_key()
                .cmp(&b.fiber_key())
                .then(a.leaf.lo.total_cmp(&b.leaf.lo))
                .then(b.leaf.lo_closed.cmp(&a.leaf.lo_closed))
                .then(a.leaf.hi.total_cmp(&b.leaf.hi))
        });
        let mut merged: Vec<LeafBox> = Vec::with_capacity(boxes.len());
        let mut start = 0;
        while start < boxes.len() {
            let key = boxes[start].fiber_key();
            let mut end = start;
            while end < boxes.len() && boxes[end].fiber_key() == key {
                end += 1;
            }
            let fiber = boxes[start].fiber;
            let leaves = IntervalSet::new(boxes[start..end].iter().map(|b| b.leaf));
            merged.extend(leaves.parts().iter().map(|&leaf| LeafBox { leaf, fiber }));
            start = end;
        }
        merged.par_sort_unstable_by(|a, b| {
            a.leaf
                .lo
                .total_cmp(&b.leaf.lo)
                .then(a.fiber.lo.total_cmp(&b.fiber.lo))
                .then(a.leaf.hi.total_cmp(&b.leaf.hi))
                .then(a.fiber.hi.total_cmp(&b.fiber.hi))
        });
        Self {
            generation,
            coarsened: false,
            boxes: merged,
        }
    }

    pub fn boxes(&self) -> &[LeafBox] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn max_fiber_width(&self) -> f64 {
        self.boxes.iter().map(|b| b.fiber.length()).fold(0.0, f64::max)
    }

    pub fn leaf_projection(&self) -> IntervalSet {
        IntervalSet::new(self.boxes.iter().map(|b| b.leaf))
    }

    /// `(leaf_lo, leaf_hi, fiber_lo, fiber_hi)` of the bounding box.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        self.boxes.iter().fold(None, |acc, b| {
            let (a, c, d, e) = acc.unwrap_or((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY));
            Some((a.min(b.leaf.lo), c.max(b.leaf.hi), d.min(b.fiber.lo), e.max(b.fiber.hi)))
        })
    }

    /// Points along each box's leaf interval with spacing at most `spacing`;
    /// both leaf ends are always included. Boxes thinner than `spacing` are
    /// sampled at the fiber centre, wider ones (after coarsening) on a grid
    /// of fiber rows including both fiber ends.
    pub fn samples(&self, spacing: f64, leaf_window: (f64, f64)) -> Vec<Point2> {
        self.boxes
            .par_iter()
            .filter(|b| b.leaf.hi >= leaf_window.0 && b.leaf.lo <= leaf_window.1)
            .flat_map_iter(|b| {
                let lo = b.leaf.lo.max(leaf_window.0);
                let hi = b.leaf.hi.min(leaf_window.1);
                let steps = ((hi - lo) / spacing).ceil().max(1.0) as usize;
                let rows: Vec<f64> = if b.fiber.length() <= spacing {
                    vec![b.fiber.midpoint()]
                } else {
                    let k = (b.fiber.length() / spacing).ceil() as usize;
                    (0..=k).map(|i| b.fiber.lo + b.fiber.length() * i as f64 / k as f64).collect()
                };
                rows.into_iter().flat_map(move |y| {
                    (0..=steps).map(move |j| Point2::new(lo + (hi - lo) * j as f64 / steps as f64, y))
                })
            })
            .collect()
    }

    /// Every box of `self` is covered, up to `tol`, by the union of the
    /// boxes of `outer` whose fiber interval contains its fiber interval.
    pub fn is_nested_in(&self, outer: &BoxSet, tol: f64) -> bool {
        let index = BoxIndex::new(outer);
        self.boxes.par_iter().all(|b| index.any_containing(b, tol))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("leaf_lo,leaf_hi,fiber_lo,fiber_hi,generation\n");
        for b in &self.boxes {
            let _ = writeln!(s, "{},{},{},{},{}", b.leaf.lo, b.leaf.hi, b.fiber.lo, b.fiber.hi, self.generation);
        }
        s
    }

    fn coarsen(&mut self, tol: f64) {
        let mut boxes = std::mem::take(&mut self.boxes);
        boxes.sort_by(|a, b| a.fiber.lo.total_cmp(&b.fiber.lo).then(a.leaf.lo.total_cmp(&b.leaf.lo)));
        let mut rows: Vec<Vec<LeafBox>> = Vec::new();
        for b in boxes {
            match rows.last_mut() {
                Some(row) if b.fiber.lo - row[0].fiber.lo <= tol => row.push(b),
                _ => rows.push(vec![b]),
            }
        }
        let mut out = Vec::new();
        for mut row in rows {
            row.sort_by(|a, b| a.leaf.lo.total_cmp(&b.leaf.lo));
            let mut cur = row[0];
            for b in &row[1..] {
                if b.leaf.lo <= cur.leaf.hi + tol {
                    cur.leaf = cur.leaf.hull(&b.leaf);
                    cur.fiber = cur.fiber.hull(&b.fiber);
                } else {
                    out.push(cur);
                    cur = *b;
                }
            }
            out.push(cur);
        }
        let g = self.generation;
        *self = BoxSet::new(g, out);
        self.coarsened = true;
    }
}

/// Boxes sorted by lower fiber end for proximity queries.
pub(crate) struct BoxIndex<'a> {
    boxes: Vec<&'a LeafBox>,
    max_width: f64,
}

impl<'a> BoxIndex<'a> {
    pub(crate) fn new(set: &'a BoxSet) -> Self {
        let mut boxes: Vec<&LeafBox> = set.boxes.iter().collect();
        boxes.sort_by(|a, b| a.fiber.lo.total_cmp(&b.fiber.lo));
        Self {
            boxes,
            max_width: set.max_fiber_width(),
        }
    }

    fn candidates(&self, y_lo: f64, y_hi: f64) -> impl Iterator<Item = &&'a LeafBox> {
        let start = self.boxes.partition_point(|b| b.fiber.lo < y_lo - self.max_width);
        self.boxes[start..].iter().take_while(move |b| b.fiber.lo <= y_hi)
    }

    pub(crate) fn distance(&self, p: &Point2, cutoff: f64) -> f64 {
        let mut best = f64::INFINITY;
        for b in self.candidates(p.y - cutoff, p.y + cutoff) {
            best = best.min(b.distance_to(p));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    fn any_containing(&self, inner: &LeafBox, tol: f64) -> bool {
        let mut leaves = Vec::new();
        for b in self.candidates(inner.fiber.lo - tol, inner.fiber.lo + tol) {
            if b.fiber.lo > inner.fiber.lo + tol || inner.fiber.hi > b.fiber.hi + tol {
                continue;
            }
            if b.contains_box(inner, tol) {
                return true;
            }
            leaves.push(b.leaf);
        }
        let within = Interval::closed(inner.leaf.lo, inner.leaf.hi);
        !leaves.is_empty() && IntervalSet::new(leaves).uncovered_measure(&within) <= tol
    }
}

impl SkewReturnMap {
    /// The whole half strip, generation 0.
    pub fn half_region(&self, half: Half) -> BoxSet {
        let leaf = match half {
            Half::Plus => Interval::closed(0.0, 1.0),
            Half::Minus => Interval::closed(-1.0, 0.0),
        };
        BoxSet::new(
            0,
            vec![LeafBox {
                leaf,
                fiber: Interval::closed(0.0, 1.0),
            }],
        )
    }

    /// One forward step of a box set confined to `half`.
    pub fn image_boxes(&self, half: Half, set: &BoxSet, budget: &BoxBudget) -> Result<BoxSet> {
        let m = self.half_map(half);
        let offs = self.offsets(half);
        let mu = self.mu;
        let boxes: Vec<LeafBox> = set
            .boxes
            .par_iter()
            .flat_map_iter(|b| {
                m.branch_images(&b.leaf).into_iter().map(move |(k, leaf)| LeafBox {
                    leaf,
                    fiber: Interval::closed(mu * b.fiber.lo + offs[k], mu * b.fiber.hi + offs[k]),
                })
            })
            .collect();
        let mut next = BoxSet::new(set.generation + 1, boxes);
        next.coarsened = set.coarsened;
        if next.len() > budget.cap {
            next.coarsen(budget.coarsen_tol);
            if next.len() > budget.cap {
                return Err(Error::BudgetExceeded {
                    boxes: next.len(),
                    cap: budget.cap,
                });
            }
        }
        Ok(next)
    }

    /// Generation-`n` outer approximation of the attracting set of `half`.
    pub fn attractor_half(&self, half: Half, n: usize, budget: &BoxBudget) -> Result<BoxSet> {
        let mut cur = self.half_region(half);
        for _ in 0..n {
            cur = self.image_boxes(half, &cur, budget)?;
        }
        Ok(cur)
    }

    /// All generations `1..=n`, for callers that need the whole sequence.
    pub fn attractor_generations(&self, half: Half, n: usize, budget: &BoxBudget) -> Result<Vec<BoxSet>> {
        let mut out = Vec::with_capacity(n);
        let mut cur = self.half_region(half);
        for _ in 0..n {
            cur = self.image_boxes(half, &cur, budget)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// First hits on leaf 0 of the slice of `slice` over the singular leaf of
    /// `half`, followed forward `n` times. The union of all `n + 1` stages is
    /// returned as degenerate boxes on leaf 0.
    pub fn singular_leaf_forward_closure(&self, half: Half, n: usize, slice: &BoxSet) -> BoxSet {
        let m = self.half_map(half);
        let offs = self.offsets(half);
        let d = m.d_star;
        let left = m.branches.iter().position(|b| b.domain.hi == d);
        let right = m.branches.iter().position(|b| b.domain.lo == d);
        let mut stage: Vec<Interval> = Vec::new();
        for b in &slice.boxes {
            let leaf = m.interval_to_internal(&b.leaf);
            for (k, touches) in [(left, leaf.lo < d && d <= leaf.hi), (right, leaf.lo <= d && d < leaf.hi)] {
                if let (Some(k), true) = (k, touches) {
                    stage.push(Interval::closed(self.mu * b.fiber.lo + offs[k], self.mu * b.fiber.hi + offs[k]));
                }
            }
        }
        let c0 = self.plus_offsets[0];
        let mut all = stage.clone();
        for _ in 0..n {
            for f in &mut stage {
                *f = Interval::closed(self.mu * f.lo + c0, self.mu * f.hi + c0);
            }
            all.extend_from_slice(&stage);
        }
        BoxSet::new(
            n,
            all.into_iter()
                .map(|fiber| LeafBox {
                    leaf: Interval::point(0.0),
                    fiber,
                })
                .collect(),
        )
    }
}
