use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BranchedIntervalMap, EXACT_TOL};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeoResult {
    /// First iterate whose image closure covers the space, if any.
    pub m: Option<usize>,
    /// Uncovered length of the last computed image.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub x: f64,
    pub period: usize,
    pub itinerary: Vec<u8>,
    /// Derivative of the `period`-th iterate at `x`.
    pub multiplier: f64,
    /// Set when the orbit passes through the identified pair `b ~ 1`.
    pub identified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicNet {
    pub eps: f64,
    pub n_max: usize,
    pub targets: usize,
    pub covered: usize,
    /// Largest distance from a target to the nearest point found.
    pub max_gap: f64,
    pub nodes_visited: u64,
    pub points: Vec<PeriodicPoint>,
}

impl PeriodicNet {
    pub fn passed(&self) -> bool {
        self.covered == self.targets
    }
}

/// A word with its cylinder and the image of the cylinder under the word's
/// composite, both in internal coordinates.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub word: Vec<u8>,
    pub cylinder: Interval,
    pub image: Interval,
    pub increasing: bool,
}

/// Largest distance from a point of `[lo, hi]` to the nearest of `sorted`.
pub fn covering_radius(sorted: &[f64], lo: f64, hi: f64) -> f64 {
    let inside: Vec<f64> = sorted.iter().copied().filter(|x| (lo..=hi).contains(x)).collect();
    let (Some(first), Some(last)) = (inside.first(), inside.last()) else {
        return f64::INFINITY;
    };
    let mut r = (first - lo).max(hi - last);
    for w in inside.windows(2) {
        r = r.max(0.5 * (w[1] - w[0]));
    }
    r
}

fn is_primitive(word: &[u8]) -> bool {
    let n = word.len();
    (1..n).filter(|d| n % d == 0).all(|d| (d..n).any(|i| word[i] != word[i - d]))
}

impl BranchedIntervalMap {
    fn image_internal(&self, i: &Interval) -> Vec<Interval> {
        self.branches
            .iter()
            .filter_map(|br| {
                let k = i.intersect(&br.domain);
                (!k.is_empty()).then(|| br.image_of(&k))
            })
            .collect()
    }

    /// Branchwise images of `I` in external coordinates, tagged with the
    /// branch index.
    pub fn branch_images(&self, i: &Interval) -> Vec<(usize, Interval)> {
        let ii = self.interval_to_internal(i);
        self.branches
            .iter()
            .enumerate()
            .filter_map(|(k, br)| {
                let piece = ii.intersect(&br.domain);
                (!piece.is_empty()).then(|| (k, self.interval_to_external(&br.image_of(&piece))))
            })
            .collect()
    }

    /// Exact image `f(I \ {d*})` as a normalized union.
    pub fn image_of_interval(&self, i: &Interval) -> Result<IntervalSet> {
        if !i.is_proper() {
            return Err(Error::EmptyInput);
        }
        let ii = self.interval_to_internal(i);
        let parts = self.image_internal(&ii);
        Ok(IntervalSet::new(parts.iter().map(|p| self.interval_to_external(p))))
    }

    pub fn image_of_set(&self, s: &IntervalSet) -> IntervalSet {
        IntervalSet::new(s.parts().iter().flat_map(|p| {
            let ii = self.interval_to_internal(p);
            self.image_internal(&ii)
                .into_iter()
                .map(|q| self.interval_to_external(&q))
                .collect::<Vec<_>>()
        }))
    }

    /// First `m ≤ m_max` with `cl(f^m(I))` equal to the space up to
    /// `tol_cover` of uncovered length.
    pub fn leo_check(&self, i: &Interval, m_max: usize, tol_cover: f64) -> LeoResult {
        self.leo_check_set(&IntervalSet::from(*i), m_max, tol_cover)
    }

    pub fn leo_check_set(&self, s: &IntervalSet, m_max: usize, tol_cover: f64) -> LeoResult {
        let space = self.space();
        let mut cur = s.clone();
        let mut gap = cur.uncovered_measure(&space);
        for m in 0..=m_max {
            if gap <= tol_cover {
                return LeoResult { m: Some(m), gap };
            }
            if m == m_max {
                break;
            }
            cur = self.image_of_set(&cur);
            gap = cur.uncovered_measure(&space);
        }
        LeoResult { m: None, gap }
    }

    pub fn root_cylinders(&self) -> Vec<Cylinder> {
        self.branches
            .iter()
            .enumerate()
            .map(|(k, br)| Cylinder {
                word: vec![k as u8],
                cylinder: br.domain,
                image: br.image(),
                increasing: br.is_increasing(),
            })
            .collect()
    }

    /// Pulls `k ⊆ image` back to the cylinder of `word`.
    fn pull_back(&self, word: &[u8], k: &Interval) -> Interval {
        let mut cur = *k;
        for &b in word.iter().rev() {
            let br = &self.branches[b as usize];
            let (x0, x1) = (br.inverse(cur.lo), br.inverse(cur.hi));
            cur = if br.is_increasing() {
                Interval::new(x0, x1, cur.lo_closed, cur.hi_closed)
            } else {
                Interval::new(x1, x0, cur.hi_closed, cur.lo_closed)
            };
            cur = cur.intersect(&br.domain);
        }
        cur
    }

    /// Cylinders of the words `w·i`.
    pub fn append_children(&self, node: &Cylinder) -> Vec<Cylinder> {
        self.branches
            .iter()
            .enumerate()
            .filter_map(|(k, br)| {
                let inter = node.image.intersect(&br.domain);
                if inter.is_empty() {
                    return None;
                }
                let cylinder = self.pull_back(&node.word, &inter).intersect(&node.cylinder);
                if cylinder.is_empty() {
                    return None;
                }
                let mut word = node.word.clone();
                word.push(k as u8);
                Some(Cylinder {
                    word,
                    cylinder,
                    image: br.image_of(&inter),
                    increasing: node.increasing == br.is_increasing(),
                })
            })
            .collect()
    }

    /// Cylinders of the words `i·w`. The image of `i·w` is the image under
    /// `w` of the part of its cylinder lying in the image of branch `i`.
    pub fn prepend_children(&self, node: &Cylinder) -> Vec<Cylinder> {
        self.branches
            .iter()
            .enumerate()
            .filter_map(|(k, br)| {
                let part = node.cylinder.intersect(&br.image());
                if part.is_empty() {
                    return None;
                }
                let cylinder = self.pull_back(&[k as u8], &part);
                if cylinder.is_empty() {
                    return None;
                }
                let mut image = part;
                for &b in &node.word {
                    let next = &self.branches[b as usize];
                    image = next.image_of(&image.intersect(&next.domain));
                }
                let mut word = Vec::with_capacity(node.word.len() + 1);
                word.push(k as u8);
                word.extend_from_slice(&node.word);
                Some(Cylinder {
                    word,
                    cylinder,
                    image,
                    increasing: node.increasing == br.is_increasing(),
                })
            })
            .collect()
    }

    /// Orbit of `x` along `word` with the derivative at every point,
    /// following the continuous branch extensions (external coordinates).
    pub fn orbit_along(&self, word: &[u8], x: f64) -> Vec<(f64, f64)> {
        let mut y = self.to_internal(x);
        word.iter()
            .map(|&b| {
                let br = &self.branches[b as usize];
                let out = (self.to_external(y), br.derivative(y));
                y = br.value(y);
                out
            })
            .collect()
    }

    /// Composite along `word` using the continuous branch extensions, with
    /// its derivative.
    fn compose(&self, word: &[u8], x: f64) -> (f64, f64) {
        let mut y = x;
        let mut d = 1.0;
        for &b in word {
            let br = &self.branches[b as usize];
            d *= br.derivative(y);
            y = br.value(y);
        }
        (y, d)
    }

    /// Fixed point of the word's composite in its cylinder, verified against
    /// the actual itinerary.
    pub fn solve_cycle(&self, node: &Cylinder, tol_root: f64) -> Option<PeriodicPoint> {
        let word = &node.word;
        if !is_primitive(word) {
            return None;
        }
        let (a, c) = (node.cylinder.lo, node.cylinder.hi);
        let (fa, fc) = if node.increasing {
            (node.image.lo, node.image.hi)
        } else {
            (node.image.hi, node.image.lo)
        };
        let (ha, hc) = (fa - a, fc - c);
        if ha.signum() == hc.signum() && ha != 0.0 && hc != 0.0 {
            return None;
        }
        let x = if ha == 0.0 {
            a
        } else if hc == 0.0 {
            c
        } else {
            let (mut lo, mut hi) = (a, c);
            let h_lo_neg = ha < 0.0;
            loop {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi || hi - lo <= 0.25 * tol_root * f64::EPSILON {
                    break;
                }
                let h = self.compose(word, m).0 - m;
                if h == 0.0 {
                    lo = m;
                    hi = m;
                    break;
                }
                if (h < 0.0) == h_lo_neg {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        };
        // walk the true orbit: branch membership must follow the word
        let mut y = x;
        let mut identified = false;
        for &b in word {
            let k = self.branch_index(y)?;
            if k != b as usize {
                return None;
            }
            identified |= (y - self.branch_point).abs() <= EXACT_TOL || (y - 1.0).abs() <= EXACT_TOL;
            y = self.branches[k].value(y);
        }
        let (fx, d) = self.compose(word, x);
        if (fx - x).abs() > tol_root * d.abs().max(1.0) {
            return None;
        }
        Some(PeriodicPoint {
            x: self.to_external(x),
            period: word.len(),
            itinerary: word.clone(),
            multiplier: d,
            identified,
        })
    }

    fn enumerate_from(&self, node: Cylinder, n_max: usize, tol_root: f64, out: &mut Vec<PeriodicPoint>) {
        if let Some(p) = self.solve_cycle(&node, tol_root) {
            out.push(p);
        }
        if node.word.len() < n_max {
            for child in self.append_children(&node) {
                self.enumerate_from(child, n_max, tol_root, out);
            }
        }
    }

    /// All periodic points of minimal period `≤ n_max`, sorted by period then
    /// position. Each orbit contributes every one of its points.
    ///
    /// The number of itineraries grows exponentially; use
    /// [`periodic_net`](Self::periodic_net) for density checks at large periods.
    pub fn periodic_points(&self, n_max: usize, tol_root: f64) -> Vec<PeriodicPoint> {
        if n_max == 0 {
            return Vec::new();
        }
        let mut all: Vec<PeriodicPoint> = self
            .root_cylinders()
            .into_par_iter()
            .flat_map_iter(|root| {
                let mut out = Vec::new();
                self.enumerate_from(root, n_max, tol_root, &mut out);
                out
            })
            .collect();
        sort_points(&mut all);
        all
    }

    /// Searches periodic points of period `≤ n_max` until every target lies
    /// within `eps` of one. Cylinders with no uncovered target nearby are
    /// skipped, so the result holds only the points needed for the net.
    pub fn periodic_net(&self, n_max: usize, eps: f64, targets: &[f64], tol_root: f64) -> PeriodicNet {
        let mut sorted: Vec<f64> = targets.iter().map(|t| self.to_internal(*t)).collect();
        sorted.sort_by(f64::total_cmp);
        let mut open: BTreeSet<usize> = (0..sorted.len()).collect();
        let mut found = Vec::new();
        let mut visited = 0u64;
        let mut stack: Vec<Cylinder> = self.root_cylinders();
        stack.reverse();
        while let Some(node) = stack.pop() {
            if open.is_empty() {
                break;
            }
            visited += 1;
            let (lo, hi) = (node.cylinder.lo - eps, node.cylinder.hi + eps);
            let first = sorted.partition_point(|t| *t < lo);
            if !open.range(first..).next().is_some_and(|&j| sorted[j] <= hi) {
                continue;
            }
            if let Some(p) = self.solve_cycle(&node, tol_root) {
                let xi = self.to_internal(p.x);
                let a = sorted.partition_point(|t| *t < xi - eps);
                let hits: Vec<usize> = open.range(a..).take_while(|&&j| sorted[j] <= xi + eps).copied().collect();
                if !hits.is_empty() {
                    for j in hits {
                        open.remove(&j);
                    }
                    found.push(p);
                }
            }
            if node.word.len() < n_max {
                let mut kids = self.append_children(&node);
                kids.reverse();
                stack.extend(kids);
            }
        }
        sort_points(&mut found);
        let xs: Vec<f64> = {
            let mut v: Vec<f64> = found.iter().map(|p| self.to_internal(p.x)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let max_gap = sorted
            .iter()
            .map(|t| {
                let i = xs.partition_point(|x| x < t);
                let l = i.checked_sub(1).map_or(f64::INFINITY, |j| t - xs[j]);
                let r = xs.get(i).map_or(f64::INFINITY, |x| x - t);
                l.min(r)
            })
            .fold(0.0, f64::max);
        PeriodicNet {
            eps,
            n_max,
            targets: sorted.len(),
            covered: sorted.len() - open.len(),
            max_gap,
            nodes_visited: visited,
            points: found,
        }
    }

    fn preimages_internal(&self, y: f64) -> impl Iterator<Item = f64> + '_ {
        let twin = if (y - self.branch_point).abs() <= EXACT_TOL {
            Some(1.0)
        } else if (y - 1.0).abs() <= EXACT_TOL {
            Some(self.branch_point)
        } else {
            None
        };
        std::iter::once(y).chain(twin).flat_map(move |t| {
            self.branches
                .iter()
                .filter(move |br| br.image().contains(t))
                .map(move |br| br.inverse(t))
                .filter(|x| self.branch_index(*x).is_some())
        })
    }

    /// `⋃_{n ≤ n_max} f^{-n}(x)`, sorted with exact duplicates removed.
    ///
    /// Preimages of `b` and of `1` are pooled, since the two points are
    /// identified.
    pub fn preimage_tree(&self, x: f64, n_max: usize) -> Vec<f64> {
        let mut level = vec![self.to_internal(x)];
        let mut all = level.clone();
        for _ in 0..n_max {
            level = level
                .par_iter()
                .flat_map_iter(|&y| self.preimages_internal(y).collect::<Vec<_>>())
                .collect();
            level.sort_by(f64::total_cmp);
            level.dedup();
            all.extend_from_slice(&level);
        }
        let mut out: Vec<f64> = all.into_iter().map(|v| self.to_external(v)).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn sort_points(v: &mut Vec<PeriodicPoint>) {
    v.sort_by(|a, b| a.period.cmp(&b.period).then(a.x.total_cmp(&b.x)).then(a.itinerary.cmp(&b.itinerary)));
    v.dedup_by(|a, b| a.period == b.period && (a.x - b.x).abs() <= EXACT_TOL);
}
