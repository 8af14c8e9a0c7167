//! Planar point-set utilities: convex hull, diameter, nearest-neighbour
//! grid and Hausdorff distance.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, o: &Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn midpoint(&self, o: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

fn cross(o: &Point2, a: &Point2, b: &Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull in counter-clockwise order (monotone chain).
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut p: Vec<Point2> = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for q in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(*q);
        }
        hull.pop();
    }
    hull
}

/// Largest pairwise distance.
pub fn diameter(points: &[Point2]) -> f64 {
    let h = convex_hull(points);
    let mut d: f64 = 0.0;
    for (i, a) in h.iter().enumerate() {
        for b in &h[i + 1..] {
            d = d.max(a.dist(b));
        }
    }
    d
}

/// Uniform bucket grid for radius queries.
pub struct GridIndex<'a> {
    points: &'a [Point2],
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> GridIndex<'a> {
    pub fn new(points: &'a [Point2], cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell must be positive");
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key_of(p, cell)).or_default().push(i as u32);
        }
        Self { points, cell, buckets }
    }

    fn key_of(p: &Point2, cell: f64) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    fn best_in_ring(&self, q: &Point2, k: (i64, i64), r: i64, best: &mut Option<(f64, usize)>) {
        for dx in -r..=r {
            for dy in -r..=r {
                if dx.abs() != r && dy.abs() != r {
                    continue;
                }
                if let Some(ids) = self.buckets.get(&(k.0 + dx, k.1 + dy)) {
                    for &i in ids {
                        let d = q.dist(&self.points[i as usize]);
                        if best.map_or(true, |(bd, bi)| d < bd || (d == bd && (i as usize) < bi)) {
                            *best = Some((d, i as usize));
                        }
                    }
                }
            }
        }
    }

    /// Nearest point within `radius`, ties broken by index.
    pub fn nearest_within(&self, q: &Point2, radius: f64) -> Option<(f64, usize)> {
        let k = Self::key_of(q, self.cell);
        let rings = (radius / self.cell).ceil() as i64 + 1;
        let mut best = None;
        for r in 0..=rings {
            self.best_in_ring(q, k, r, &mut best);
            if best.is_some_and(|(d, _)| d <= r as f64 * self.cell) {
                break;
            }
        }
        best.filter(|(d, _)| *d <= radius)
    }

    /// Nearest point overall.
    pub fn nearest(&self, q: &Point2) -> Option<(f64, usize)> {
        if self.points.is_empty() {
            return None;
        }
        let k = Self::key_of(q, self.cell);
        let mut best = None;
        let mut r = 0i64;
        loop {
            self.best_in_ring(q, k, r, &mut best);
            if let Some((d, _)) = best {
                // every unvisited cell is at least r·cell away
                if d <= r as f64 * self.cell {
                    return best;
                }
            }
            r += 1;
            if r > 1 << 22 {
                return best;
            }
        }
    }
}

fn suggested_cell(a: &[Point2], b: &[Point2]) -> f64 {
    let all = a.iter().chain(b);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    span / (b.len() as f64).sqrt().max(1.0)
}

/// Subset with one point per cell of side `delta/√2`, so every input point
/// lies within `delta` of the result. Keeps the first point of each cell in
/// input order.
pub fn thin(points: &[Point2], delta: f64) -> Vec<Point2> {
    assert!(delta > 0.0, "thinning radius must be positive");
    let cell = delta / std::f64::consts::SQRT_2;
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .filter(|p| seen.insert(GridIndex::key_of(p, cell)))
        .copied()
        .collect()
}

/// `max_{p ∈ a} dist(p, b)`.
pub fn directed_hausdorff(a: &[Point2], b: &[Point2]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let grid = GridIndex::new(b, suggested_cell(a, b));
    a.par_iter()
        .map(|p| grid.nearest(p).map_or(f64::INFINITY, |(d, _)| d))
        .reduce(|| 0.0, f64::max)
}

pub fn hausdorff(a: &[Point2], b: &[Point2]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_hull_and_diameter() {
        let pts: Vec<Point2> = (0..=10)
            .flat_map(|i| (0..=10).map(move |j| Point2::new(i as f64 / 10.0, j as f64 / 10.0)))
            .collect();
        assert_eq!(convex_hull(&pts).len(), 4);
        assert!((diameter(&pts) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn collinear_diameter() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(0.0, 0.3), Point2::new(0.0, 0.1)];
        assert!((diameter(&pts) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<Point2> = (0..500)
            .map(|k| {
                let t = k as f64 * 0.618_033_988_75;
                Point2::new(t.fract(), (t * 7.3).fract())
            })
            .collect();
        let g = GridIndex::new(&pts, 0.05);
        for k in 0..50 {
            let q = Point2::new(k as f64 / 50.0, 0.37);
            let brute = pts.iter().map(|p| p.dist(&q)).fold(f64::INFINITY, f64::min);
            assert_eq!(g.nearest(&q).unwrap().0, brute);
            let within = g.nearest_within(&q, 0.02).map(|x| x.0);
            assert_eq!(within, (brute <= 0.02).then_some(brute));
        }
    }

    #[test]
    fn hausdorff_of_shifted_sets() {
        let a = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        let b = [Point2::new(0.0, 0.1)];
        assert!((directed_hausdorff(&b, &a) - 0.1).abs() < 1e-15);
        assert!((hausdorff(&a, &b) - 1.01f64.sqrt()).abs() < 1e-15);
    }
}
