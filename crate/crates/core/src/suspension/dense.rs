use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SingularSuspension;
use crate::branched1d::Cylinder;
use crate::error::Result;
use crate::geometry::{GridIndex, Point2};
use crate::skew2d::{BoxBudget, Half, PeriodicPoint2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfCoverage {
    pub half: Half,
    pub witnesses: usize,
    pub covered: usize,
    pub nodes_visited: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseReport {
    pub grid_eps: f64,
    pub n_max: usize,
    /// Attractor generation used to restrict the grid.
    pub generation: usize,
    pub witnesses: usize,
    pub covered: usize,
    pub coverage: f64,
    /// Largest distance from a witness to the nearest periodic point found.
    pub max_gap: f64,
    pub halves: Vec<HalfCoverage>,
    pub points: Vec<PeriodicPoint2>,
    pub passed: bool,
}

/// Order-preserving integer key of a float.
fn key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

/// Uncovered witnesses bucketed by grid row.
struct Witnesses {
    points: Vec<Point2>,
    rows: BTreeMap<i64, BTreeSet<(i64, usize)>>,
    eps: f64,
}

impl Witnesses {
    fn new(points: Vec<Point2>, eps: f64) -> Self {
        let mut rows: BTreeMap<i64, BTreeSet<(i64, usize)>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            rows.entry((p.y / eps).floor() as i64).or_default().insert((key(p.x), i));
        }
        Self { points, rows, eps }
    }

    fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Uncovered witnesses within `eps` of the box `[x0, x1] × [y0, y1]`.
    fn near_box(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> impl Iterator<Item = usize> + '_ {
        let e = self.eps;
        let r0 = ((y0 - e) / e).floor() as i64;
        let r1 = ((y1 + e) / e).floor() as i64;
        self.rows.range(r0..=r1).flat_map(move |(_, row)| {
            row.range((key(x0 - e), 0)..=(key(x1 + e), usize::MAX))
                .map(|&(_, i)| i)
                .filter(move |&i| {
                    let p = self.points[i];
                    let dx = (x0 - p.x).max(p.x - x1).max(0.0);
                    let dy = (y0 - p.y).max(p.y - y1).max(0.0);
                    dx.hypot(dy) <= e
                })
        })
    }

    fn remove(&mut self, i: usize) {
        let p = self.points[i];
        let r = (p.y / self.eps).floor() as i64;
        if let Some(row) = self.rows.get_mut(&r) {
            row.remove(&(key(p.x), i));
            if row.is_empty() {
                self.rows.remove(&r);
            }
        }
    }
}

impl SingularSuspension {
    /// One witness per `grid_eps` cell meeting the generation-`m` attractor
    /// approximation of `half`, placed inside the approximation.
    fn witnesses(&self, half: Half, m: usize, grid_eps: f64) -> Result<Vec<Point2>> {
        let set = self.section_map.attractor_half(half, m, &BoxBudget::default())?;
        let mut cells: BTreeMap<(i64, i64), Point2> = BTreeMap::new();
        let cell = |v: f64| (v / grid_eps).floor() as i64;
        for b in set.boxes() {
            for i in cell(b.leaf.lo)..=cell(b.leaf.hi) {
                let x0 = b.leaf.lo.max(i as f64 * grid_eps);
                let x1 = b.leaf.hi.min((i + 1) as f64 * grid_eps);
                if x0 > x1 {
                    continue;
                }
                for j in cell(b.fiber.lo)..=cell(b.fiber.hi) {
                    let y0 = b.fiber.lo.max(j as f64 * grid_eps);
                    let y1 = b.fiber.hi.min((j + 1) as f64 * grid_eps);
                    if y0 > y1 {
                        continue;
                    }
                    cells.entry((i, j)).or_insert(Point2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)));
                }
            }
        }
        Ok(cells.into_values().collect())
    }

    /// Depth-first search over words extended on the left. The cycle of a
    /// word lies in the image box of its cylinder, and image boxes shrink
    /// along the search, so subtrees whose box has no uncovered witness
    /// within `grid_eps` are skipped.
    fn cover_half(&self, half: Half, witnesses: Vec<Point2>, grid_eps: f64, n_max: usize) -> (HalfCoverage, Vec<PeriodicPoint2>) {
        let total = witnesses.len();
        let mut open = Witnesses::new(witnesses, grid_eps);
        let map = self.section_map.half_map(half);
        let offs = self.section_map.offsets(half);
        let mu = self.section_map.mu;
        let tol_root = 1e-10;
        let mut found = Vec::new();
        let mut visited = 0u64;
        let mut stack: Vec<(Cylinder, f64, f64)> = map
            .root_cylinders()
            .into_iter()
            .map(|c| {
                let off = offs[c.word[0] as usize];
                (c, off, mu)
            })
            .collect();
        stack.reverse();
        while let Some((node, off, scale)) = stack.pop() {
            if open.is_empty() {
                break;
            }
            visited += 1;
            let leaf = map.interval_to_external(&node.image);
            if open.near_box(leaf.lo, leaf.hi, off, off + scale).next().is_none() {
                continue;
            }
            if let Some(p) = map.solve_cycle(&node, tol_root) {
                let q = self.section_map.lift(half, &p);
                let z = q.point();
                let hits: Vec<usize> = open.near_box(z.x, z.x, z.y, z.y).collect();
                if !hits.is_empty() {
                    for i in hits {
                        open.remove(i);
                    }
                    found.push(q);
                }
            }
            if node.word.len() < n_max {
                let mut kids: Vec<_> = map
                    .prepend_children(&node)
                    .into_iter()
                    .map(|c| {
                        let off = off + scale * offs[c.word[0] as usize];
                        (c, off, scale * mu)
                    })
                    .collect();
                kids.reverse();
                stack.extend(kids);
            }
        }
        let covered = total - open.rows.values().map(|r| r.len()).sum::<usize>();
        (
            HalfCoverage {
                half,
                witnesses: total,
                covered,
                nodes_visited: visited,
            },
            found,
        )
    }

    /// Checks that suspended periodic orbits of period `≤ n_max` come within
    /// `grid_eps` of every cell of a `grid_eps` grid that meets the attractor
    /// approximation at the generation where fibers are below `grid_eps/4`.
    pub fn dense_periodic_check(&self, grid_eps: f64, n_max: usize) -> Result<DenseReport> {
        if !(grid_eps > 0.0) {
            return Err(crate::error::Error::InvalidInput(format!("grid_eps = {grid_eps} must be positive")));
        }
        let mu = self.section_map.mu;
        let generation = ((0.25 * grid_eps).ln() / mu.ln()).ceil().max(1.0) as usize;
        let per_half: Vec<(Half, Vec<Point2>)> = self
            .halves
            .iter()
            .map(|&h| self.witnesses(h, generation, grid_eps).map(|w| (h, w)))
            .collect::<Result<_>>()?;
        let all_witnesses: Vec<Point2> = per_half.iter().flat_map(|(_, w)| w.iter().copied()).collect();
        let results: Vec<(HalfCoverage, Vec<PeriodicPoint2>)> = {
            use rayon::prelude::*;
            per_half
                .into_par_iter()
                .map(|(h, w)| self.cover_half(h, w, grid_eps, n_max))
                .collect()
        };
        let mut halves = Vec::new();
        let mut points = Vec::new();
        for (c, p) in results {
            halves.push(c);
            points.extend(p);
        }
        points.sort_by(|a, b| a.period.cmp(&b.period).then(a.leaf.total_cmp(&b.leaf)).then(a.fiber.total_cmp(&b.fiber)));
        let witnesses: usize = halves.iter().map(|h| h.witnesses).sum();
        let covered: usize = halves.iter().map(|h| h.covered).sum();
        let pts: Vec<Point2> = points.iter().map(|q| q.point()).collect();
        let max_gap = if pts.is_empty() {
            f64::INFINITY
        } else {
            let grid = GridIndex::new(&pts, grid_eps);
            all_witnesses
                .iter()
                .map(|w| grid.nearest(w).map_or(f64::INFINITY, |(d, _)| d))
                .fold(0.0, f64::max)
        };
        Ok(DenseReport {
            grid_eps,
            n_max,
            generation,
            witnesses,
            covered,
            coverage: if witnesses == 0 { 0.0 } else { covered as f64 / witnesses as f64 },
            max_gap,
            halves,
            points,
            passed: witnesses > 0 && covered == witnesses,
        })
    }
}
