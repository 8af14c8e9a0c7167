//! Foliated return maps on `R = [-1, 1] × [0, 1]`.
//!
//! The first coordinate is the leaf, the second the position along the
//! contracted leaf. Leaves in `[0, 1]` follow the plus base map, leaves in
//! `[-1, 0)` the minus base map; leaf `0` is invariant. Each branch of a base
//! map carries an affine fiber contraction `y ↦ μ·y + c`.

mod boxes;
mod intersection;

use serde::{Deserialize, Serialize};

use crate::branched1d::{BranchedIntervalMap, Orientation, PeriodicPoint, EXACT_TOL};
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub(crate) use boxes::BoxIndex;
pub use boxes::{BoxBudget, BoxSet, LeafBox};
pub use intersection::{IntersectionKind, IntersectionReport};

/// Tolerance for fixed points of the fiber contraction.
pub const TOL_FIX: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    G,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Plus,
    Minus,
}

impl Half {
    pub const BOTH: [Half; 2] = [Half::Plus, Half::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Half::Plus => 1.0,
            Half::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewReturnMap {
    pub variant: Variant,
    pub plus: BranchedIntervalMap,
    pub minus: BranchedIntervalMap,
    pub mu: f64,
    pub plus_offsets: Vec<f64>,
    pub minus_offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint2 {
    pub leaf: f64,
    pub fiber: f64,
    pub period: usize,
    pub half: Half,
    pub itinerary: Vec<u8>,
    pub base_multiplier: f64,
    pub fiber_multiplier: f64,
}

impl PeriodicPoint2 {
    pub fn point(&self) -> Point2 {
        Point2::new(self.leaf, self.fiber)
    }

    /// `|base| > 1 > |fiber|`.
    pub fn is_saddle(&self) -> bool {
        self.base_multiplier.abs() > 1.0 && self.fiber_multiplier.abs() < 1.0
    }
}

pub const DEFAULT_MU: f64 = 1.0 / 3.0;
const PLUS_OFFSETS: [f64; 4] = [1.0 / 3.0, 0.58, 0.62, 0.1];
const H_MINUS_OFFSETS: [f64; 4] = [1.0 / 3.0, 0.05, 0.09, 0.5];

impl SkewReturnMap {
    /// Symmetric map: the minus half is the mirror image of the plus half.
    pub fn default_g() -> Self {
        let plus = BranchedIntervalMap::standard_plus();
        Self {
            variant: Variant::G,
            minus: plus.reflect(),
            plus,
            mu: DEFAULT_MU,
            plus_offsets: PLUS_OFFSETS.to_vec(),
            minus_offsets: PLUS_OFFSETS.to_vec(),
        }
    }

    /// Map with independent halves: plus fibers near leaf 0 sit above `1/2`,
    /// minus fibers below.
    pub fn default_h() -> Self {
        Self {
            variant: Variant::H,
            plus: BranchedIntervalMap::standard_plus(),
            minus: BranchedIntervalMap::standard_minus(),
            mu: DEFAULT_MU,
            plus_offsets: PLUS_OFFSETS.to_vec(),
            minus_offsets: H_MINUS_OFFSETS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::Config(format!("fiber contraction {} must lie in (0, 1)", self.mu)));
        }
        if self.plus.orientation != Orientation::Direct || self.minus.orientation != Orientation::Mirrored {
            return Err(Error::Config("plus half must be direct and minus half mirrored".into()));
        }
        for (half, m, offs) in [
            ("plus", &self.plus, &self.plus_offsets),
            ("minus", &self.minus, &self.minus_offsets),
        ] {
            if offs.len() != m.branches.len() {
                return Err(Error::Config(format!("{half} half needs one fiber offset per branch")));
            }
            if let Some(c) = offs.iter().find(|c| !(**c > 0.0 && **c + self.mu < 1.0)) {
                return Err(Error::Config(format!("{half} offset {c} does not map into the open strip")));
            }
        }
        if (self.plus_offsets[0] - self.minus_offsets[0]).abs() > 1e-15 {
            return Err(Error::Config("both halves must agree on the invariant leaf".into()));
        }
        Ok(())
    }

    pub fn half_map(&self, half: Half) -> &BranchedIntervalMap {
        match half {
            Half::Plus => &self.plus,
            Half::Minus => &self.minus,
        }
    }

    pub fn offsets(&self, half: Half) -> &[f64] {
        match half {
            Half::Plus => &self.plus_offsets,
            Half::Minus => &self.minus_offsets,
        }
    }

    pub fn half_of(leaf: f64) -> Half {
        if leaf >= 0.0 {
            Half::Plus
        } else {
            Half::Minus
        }
    }

    /// `d⁺` for the plus half, `d⁻` for the minus half.
    pub fn singular_leaf(&self, half: Half) -> f64 {
        self.half_map(half).singular_point()
    }

    pub fn apply(&self, p: Point2) -> Result<Point2> {
        self.apply_with_branch(p).map(|(q, _, _)| q)
    }

    pub fn apply_with_branch(&self, p: Point2) -> Result<(Point2, Half, usize)> {
        if !(0.0..=1.0).contains(&p.y) {
            return Err(Error::InvalidInput(format!("fiber coordinate {} outside [0, 1]", p.y)));
        }
        let half = Self::half_of(p.x);
        let m = self.half_map(half);
        if p.x == m.singular_point() {
            return Err(Error::SingularLeaf { leaf: p.x });
        }
        let (x, k) = m.eval_with_branch(p.x)?;
        Ok((Point2::new(x, self.mu * p.y + self.offsets(half)[k]), half, k))
    }

    pub fn theta(p: Point2) -> Point2 {
        Point2::new(-p.x, p.y)
    }

    /// Fixed point on the invariant leaf by iterating its fiber contraction.
    pub fn fixed_point_p(&self) -> Point2 {
        let c = self.plus_offsets[0];
        let mut y: f64 = 0.0;
        for _ in 0..200 {
            let next = self.mu * y + c;
            let done = (next - y).abs() <= TOL_FIX * 1e-3;
            y = next;
            if done {
                break;
            }
        }
        Point2::new(0.0, y)
    }

    /// Lifts the periodic points of both base halves; each base cycle carries
    /// exactly one fiber cycle. The fixed point on leaf 0 is reported once.
    pub fn periodic_points_2d(&self, n_max: usize, tol_root: f64) -> Vec<PeriodicPoint2> {
        let mut out = Vec::new();
        for half in Half::BOTH {
            for p in self.half_map(half).periodic_points(n_max, tol_root) {
                if half == Half::Minus && p.x == 0.0 {
                    continue;
                }
                out.push(self.lift(half, &p));
            }
        }
        out.sort_by(|a, b| a.period.cmp(&b.period).then(a.leaf.total_cmp(&b.leaf)));
        out
    }

    pub fn lift(&self, half: Half, p: &PeriodicPoint) -> PeriodicPoint2 {
        let offs = self.offsets(half);
        let k = p.itinerary.len();
        let sum = p.itinerary.iter().fold(0.0, |acc, &b| self.mu * acc + offs[b as usize]);
        let fiber_multiplier = self.mu.powi(k as i32);
        PeriodicPoint2 {
            leaf: p.x,
            fiber: sum / (1.0 - fiber_multiplier),
            period: p.period,
            half,
            itinerary: p.itinerary.clone(),
            base_multiplier: p.multiplier,
            fiber_multiplier,
        }
    }

    /// Fiber residual of the lifted cycle after one period, following the
    /// stored itinerary.
    pub fn fiber_residual(&self, q: &PeriodicPoint2) -> f64 {
        let offs = self.offsets(q.half);
        let y = q.itinerary.iter().fold(q.fiber, |y, &b| self.mu * y + offs[b as usize]);
        (y - q.fiber).abs()
    }

    /// Exact forward invariance of one half strip: every branch image stays
    /// in the half, every fiber strip in `[0, 1]`. Also returns one line of
    /// branch data per branch.
    pub fn invariance_certificate(&self, half: Half) -> (bool, Vec<String>) {
        let m = self.half_map(half);
        let mut ok = true;
        let mut detail = Vec::new();
        for (k, br) in m.branches.iter().enumerate() {
            let img = m.interval_to_external(&br.image());
            let inside = match half {
                Half::Plus => img.lo >= -EXACT_TOL && img.hi <= 1.0 + EXACT_TOL,
                Half::Minus => img.lo >= -1.0 - EXACT_TOL && img.hi <= EXACT_TOL,
            };
            let c = self.offsets(half)[k];
            let fiber_ok = c >= 0.0 && c + self.mu <= 1.0;
            ok &= inside && fiber_ok;
            detail.push(format!(
                "{half:?} branch {k}: leaves -> [{}, {}], fibers -> [{c}, {}]",
                img.lo,
                img.hi,
                c + self.mu
            ));
        }
        (ok, detail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SkewReturnMap::default_g().validate().unwrap();
        SkewReturnMap::default_h().validate().unwrap();
    }

    #[test]
    fn invariant_leaf_and_p() {
        let h = SkewReturnMap::default_h();
        for k in 0..=10 {
            let y = k as f64 / 10.0;
            let q = h.apply(Point2::new(0.0, y)).unwrap();
            assert_eq!(q.x, 0.0);
            assert!((q.y - (y / 3.0 + 1.0 / 3.0)).abs() < 1e-15);
        }
        let p = h.fixed_point_p();
        assert_eq!(p.x, 0.0);
        assert!((p.y - 0.5).abs() < 1e-10);
        assert!(h.apply(p).unwrap().dist(&p) <= TOL_FIX);
        assert_eq!(SkewReturnMap::default_g().fixed_point_p().x, 0.0);
    }

    #[test]
    fn singular_leaves_rejected() {
        let h = SkewReturnMap::default_h();
        assert_eq!(h.apply(Point2::new(0.5, 0.2)), Err(Error::SingularLeaf { leaf: 0.5 }));
        assert_eq!(h.apply(Point2::new(-0.5, 0.2)), Err(Error::SingularLeaf { leaf: -0.5 }));
    }

    #[test]
    fn g_commutes_with_theta() {
        let g = SkewReturnMap::default_g();
        for i in 0..100 {
            for j in 0..=10 {
                let p = Point2::new(i as f64 / 99.0, j as f64 / 10.0);
                if p.x == 0.5 {
                    continue;
                }
                let a = g.apply(SkewReturnMap::theta(p)).unwrap();
                let b = SkewReturnMap::theta(g.apply(p).unwrap());
                assert!(a.dist(&b) <= 1e-12);
            }
        }
    }

    #[test]
    fn lifted_cycles_close() {
        let h = SkewReturnMap::default_h();
        let pts = h.periodic_points_2d(4, 1e-10);
        assert!(pts.iter().any(|q| q.period == 1 && q.leaf == 0.0 && (q.fiber - 0.5).abs() < 1e-12));
        for q in &pts {
            assert!(h.fiber_residual(q) <= TOL_FIX);
            assert!(q.is_saddle());
        }
    }
}
