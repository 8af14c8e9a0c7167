use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::VectorField2;
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const H_FD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Sink,
    Source,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub position: Point2,
    /// Real parts, ascending; equal for complex pairs.
    pub eigenvalues: [f64; 2],
    pub complex: bool,
    pub kind: EquilibriumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub equilibria: Vec<Equilibrium>,
    pub candidate_cells: usize,
    pub newton_failures: usize,
}

impl EquilibriumReport {
    pub fn count(&self, kind: EquilibriumKind) -> usize {
        self.equilibria.iter().filter(|e| e.kind == kind).count()
    }

    /// Saddles ordered by decreasing ordinate and labelled `σ1`, `σ2`, ...
    /// (a single saddle is labelled `σ`).
    pub fn labelled_saddles(&self) -> Vec<(String, &Equilibrium)> {
        let mut s: Vec<&Equilibrium> = self.equilibria.iter().filter(|e| e.kind == EquilibriumKind::Saddle).collect();
        s.sort_by(|a, b| b.position.y.total_cmp(&a.position.y).then(a.position.x.total_cmp(&b.position.x)));
        if s.len() == 1 {
            return vec![("σ".to_string(), s[0])];
        }
        s.into_iter().enumerate().map(|(i, e)| (format!("σ{}", i + 1), e)).collect()
    }
}

pub fn jacobian_fd(f: &dyn VectorField2, p: Point2, h: f64) -> [[f64; 2]; 2] {
    let fx1 = f.eval(Point2::new(p.x + h, p.y));
    let fx0 = f.eval(Point2::new(p.x - h, p.y));
    let fy1 = f.eval(Point2::new(p.x, p.y + h));
    let fy0 = f.eval(Point2::new(p.x, p.y - h));
    [
        [(fx1[0] - fx0[0]) / (2.0 * h), (fy1[0] - fy0[0]) / (2.0 * h)],
        [(fx1[1] - fx0[1]) / (2.0 * h), (fy1[1] - fy0[1]) / (2.0 * h)],
    ]
}

/// Eigenvalues of a 2×2 matrix: ascending real parts and whether the pair
/// is complex.
pub fn eigen2(j: &[[f64; 2]; 2]) -> ([f64; 2], bool) {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = 0.25 * tr * tr - det;
    if disc < 0.0 {
        ([0.5 * tr, 0.5 * tr], true)
    } else {
        let r = disc.sqrt();
        ([0.5 * tr - r, 0.5 * tr + r], false)
    }
}

/// Unit eigenvector for the real eigenvalue `lambda`.
pub fn eigenvector(j: &[[f64; 2]; 2], lambda: f64) -> Point2 {
    let (a, b, c, d) = (j[0][0] - lambda, j[0][1], j[1][0], j[1][1] - lambda);
    let v = if a.abs() + b.abs() >= c.abs() + d.abs() {
        if a == 0.0 && b == 0.0 {
            Point2::new(1.0, 0.0)
        } else {
            Point2::new(-b, a)
        }
    } else {
        Point2::new(-d, c)
    };
    let n = v.x.hypot(v.y);
    Point2::new(v.x / n, v.y / n)
}

fn classify(eigs: [f64; 2], scale: f64) -> EquilibriumKind {
    let small = 1e-7 * scale.max(1.0);
    if eigs.iter().any(|e| e.abs() <= small) {
        EquilibriumKind::Degenerate
    } else if eigs[1] < 0.0 {
        EquilibriumKind::Sink
    } else if eigs[0] > 0.0 {
        EquilibriumKind::Source
    } else {
        EquilibriumKind::Saddle
    }
}

fn newton(f: &dyn VectorField2, start: Point2, tol: f64) -> Option<Point2> {
    let mut p = start;
    for _ in 0..100 {
        let v = f.eval(p);
        let norm = v[0].hypot(v[1]);
        if norm <= tol {
            return Some(p);
        }
        let j = jacobian_fd(f, p, H_FD);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (j[1][1] * v[0] - j[0][1] * v[1]) / det;
        let dy = (-j[1][0] * v[0] + j[0][0] * v[1]) / det;
        let mut step = 1.0;
        loop {
            let q = Point2::new(p.x - step * dx, p.y - step * dy);
            let w = f.eval(q);
            if w[0].hypot(w[1]) < norm || step < 1e-6 {
                p = q;
                break;
            }
            step *= 0.5;
        }
        if !(p.x.abs() <= 1.5 && p.y.abs() <= 1.5) {
            return None;
        }
    }
    None
}

/// Zeros of `f` in `Q = [-1, 1]²`.
///
/// Cells of a `grid_n × grid_n` grid where both components take both signs
/// (zero counts as either) seed a damped Newton iteration. Converged roots
/// closer than `max(10·tol, 1e-9)` are merged.
pub fn equilibria(f: &dyn VectorField2, grid_n: usize, tol: f64) -> Result<EquilibriumReport> {
    if grid_n < 32 {
        return Err(Error::InvalidInput(format!("grid_n = {grid_n} must be at least 32")));
    }
    let h = 2.0 / grid_n as f64;
    let node = |i: usize, j: usize| Point2::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
    let values: Vec<[f64; 2]> = (0..=grid_n)
        .into_par_iter()
        .flat_map_iter(|i| (0..=grid_n).map(move |j| f.eval(node(i, j))))
        .collect();
    if values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0) {
        return Err(Error::DegenerateField);
    }
    let at = |i: usize, j: usize| values[i * (grid_n + 1) + j];
    let cells: Vec<(usize, usize)> = (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let c = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            (0..2).all(|k| {
                let lo = c.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
                let hi = c.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && 0.0 <= hi
            })
        })
        .collect();
    let results: Vec<Option<Point2>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let c = node(i, j);
            newton(f, Point2::new(c.x + 0.5 * h, c.y + 0.5 * h), tol)
        })
        .collect();
    let newton_failures = results.iter().filter(|r| r.is_none()).count();
    let mut roots: Vec<Point2> = results
        .into_iter()
        .flatten()
        .filter(|p| p.x.abs() <= 1.0 && p.y.abs() <= 1.0)
        .collect();
    roots.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let merge = (10.0 * tol).max(1e-9);
    let mut unique: Vec<Point2> = Vec::new();
    for r in roots {
        if !unique.iter().any(|u| u.dist(&r) <= merge) {
            unique.push(r);
        }
    }
    let equilibria = unique
        .into_iter()
        .map(|position| {
            let j = jacobian_fd(f, position, H_FD);
            let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let (eigenvalues, complex) = eigen2(&j);
            Equilibrium {
                position,
                eigenvalues,
                complex,
                kind: classify(eigenvalues, scale),
            }
        })
        .collect();
    Ok(EquilibriumReport {
        equilibria,
        candidate_cells: cells.len(),
        newton_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cherryplug::CherryField;

    #[test]
    fn eigen_of_diagonal_and_rotation() {
        assert_eq!(eigen2(&[[2.0, 0.0], [0.0, -1.0]]), ([-1.0, 2.0], false));
        let (e, c) = eigen2(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(c);
        assert_eq!(e, [0.0, 0.0]);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let a = CherryField::default();
        for p in [Point2::new(0.0, 0.0), Point2::new(0.6, 0.0), Point2::new(0.3, -0.4)] {
            let fd = jacobian_fd(&a, p, H_FD);
            let an = a.analytic_jacobian(p);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((fd[r][c] - an[r][c]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn eigenvector_of_shear() {
        let j = [[1.0, 0.5], [0.0, -0.5]];
        let v = eigenvector(&j, 1.0);
        assert!((v.y).abs() < 1e-15 && (v.x.abs() - 1.0).abs() < 1e-15);
        let w = eigenvector(&j, -0.5);
        assert!((j[0][0] * w.x + j[0][1] * w.y + 0.5 * w.x).abs() < 1e-14);
    }
}
