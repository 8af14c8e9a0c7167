//! Expanding maps of the branched 1-manifold `B`: an interval plus a circle
//! with branch point `b`, cut open to `[0, 1]` with `1 ~ b`.
//!
//! A [`BranchedIntervalMap`] is stored in internal coordinates on `[0, 1]`.
//! A mirrored map lives on the negative copy `[-1, 0]` and evaluates as
//! `x ↦ -f(-x)`; every public operation takes and returns external
//! coordinates.

mod arclength;
mod branch;
mod config;
mod dynamics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub use arclength::{
    arc_length, tune_bump_amplitude, verify_arclength_eps, ArcLengthBudget, ArcLengthReport,
    BumpSegment, SegmentArcLength,
};
pub use branch::{Branch, Bump};
pub use dynamics::{covering_radius, Cylinder, LeoResult, PeriodicNet, PeriodicPoint};

/// Agreement required for values the hypotheses state as equalities.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_root: f64,
    pub tol_lim: f64,
    pub tol_cover: f64,
    pub tol_quad: f64,
    pub n_deriv: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_root: 1e-10,
            tol_lim: 1e-9,
            tol_cover: 1e-6,
            tol_quad: 1e-8,
            n_deriv: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Direct,
    Mirrored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchedIntervalMap {
    pub branch_point: f64,
    pub d1: f64,
    pub d_star: f64,
    pub d2: f64,
    pub expansion: f64,
    pub branches: Vec<Branch>,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub tag: String,
    pub passed: bool,
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, tag: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.tag == tag)
    }
}

impl BranchedIntervalMap {
    /// Piecewise-affine map with `b = 0.4`, cuts `0.25 < 0.5 < 0.8` and
    /// slopes `4, -1.6, 10/3, -1.2`.
    pub fn standard() -> Self {
        let (b, d1, d_star, d2) = (0.4, 0.25, 0.5, 0.8);
        Self {
            branch_point: b,
            d1,
            d_star,
            d2,
            expansion: 1.2,
            branches: vec![
                Branch::affine(Interval::closed(0.0, d1), 0.0, 4.0),
                Branch::affine(Interval::open(d1, d_star), b, -1.6),
                Branch::affine(Interval::open_closed(d_star, d2), 0.0, 10.0 / 3.0),
                Branch::affine(Interval::open_closed(d2, 1.0), b, -1.2),
            ],
            orientation: Orientation::Direct,
        }
    }

    /// The modified map `f⁺`: [`standard`](Self::standard) with C¹ bumps on
    /// `[0, d1]` and between `b` and `d*`.
    pub fn standard_plus() -> Self {
        Self::standard().with_bumps(0.4, 0.05)
    }

    /// `f⁻` on the negative copy, built from its own bump parameters.
    pub fn standard_minus() -> Self {
        Self::standard().with_bumps(0.3, 0.08).reflect()
    }

    /// Adds one bump on each arc-length segment, `[0, d1]` and the interval
    /// between `b` and `d*`.
    pub fn with_bumps(&self, first_amplitude: f64, second_amplitude: f64) -> Self {
        let mut out = self.clone();
        for (seg, amp) in [
            (BumpSegment::First, first_amplitude),
            (BumpSegment::Second, second_amplitude),
        ] {
            if amp != 0.0 {
                out.add_bump(seg, amp);
            }
        }
        out
    }

    pub(crate) fn add_bump(&mut self, seg: BumpSegment, amplitude: f64) {
        let (lo, hi) = seg.bounds(self);
        let mid = 0.5 * (lo + hi);
        if let Some(k) = self.branch_index_closure(mid) {
            let br = &mut self.branches[k];
            br.bumps.push(Bump::new(lo, hi, amplitude));
            br.refresh_limits();
        }
    }

    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.orientation = match self.orientation {
            Orientation::Direct => Orientation::Mirrored,
            Orientation::Mirrored => Orientation::Direct,
        };
        out
    }

    pub fn sign(&self) -> f64 {
        match self.orientation {
            Orientation::Direct => 1.0,
            Orientation::Mirrored => -1.0,
        }
    }

    pub fn to_internal(&self, x: f64) -> f64 {
        self.sign() * x
    }

    pub fn to_external(&self, x: f64) -> f64 {
        self.sign() * x
    }

    pub(crate) fn interval_to_internal(&self, i: &Interval) -> Interval {
        match self.orientation {
            Orientation::Direct => *i,
            Orientation::Mirrored => i.mirror(),
        }
    }

    pub(crate) fn interval_to_external(&self, i: &Interval) -> Interval {
        self.interval_to_internal(i)
    }

    /// The half of the leaf space this map acts on, `[0,1]` or `[-1,0]`.
    pub fn space(&self) -> Interval {
        self.interval_to_external(&Interval::closed(0.0, 1.0))
    }

    /// `(d1, d*, d2)` in external coordinates.
    pub fn cut_points(&self) -> (f64, f64, f64) {
        (
            self.to_external(self.d1),
            self.to_external(self.d_star),
            self.to_external(self.d2),
        )
    }

    /// The singular cut point `d*` in external coordinates.
    pub fn singular_point(&self) -> f64 {
        self.to_external(self.d_star)
    }

    pub fn external_branch_point(&self) -> f64 {
        self.to_external(self.branch_point)
    }

    pub(crate) fn branch_index(&self, x: f64) -> Option<usize> {
        self.branches.iter().position(|b| b.domain.contains(x))
    }

    pub(crate) fn branch_index_closure(&self, x: f64) -> Option<usize> {
        self.branches.iter().position(|b| b.domain.closure_contains(x))
    }

    fn internal_in_domain(&self, x: f64) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::Domain { x });
        }
        self.branch_index(x).ok_or(Error::Domain {
            x: self.to_external(x),
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_with_branch(x).map(|(y, _)| y)
    }

    /// Value together with the index of the branch that produced it.
    pub fn eval_with_branch(&self, x: f64) -> Result<(f64, usize)> {
        let xi = self.to_internal(x);
        let k = self.internal_in_domain(xi)?;
        Ok((self.to_external(self.branches[k].value(xi)), k))
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let xi = self.to_internal(x);
        let k = self.internal_in_domain(xi)?;
        Ok(self.branches[k].derivative(xi))
    }

    /// One-sided limit from the stored branch limits.
    ///
    /// `side` refers to external coordinates.
    pub fn eval_one_sided(&self, x: f64, side: Side) -> Result<f64> {
        let xi = self.to_internal(x);
        let internal_side = match (self.orientation, side) {
            (Orientation::Direct, s) => s,
            (Orientation::Mirrored, Side::Left) => Side::Right,
            (Orientation::Mirrored, Side::Right) => Side::Left,
        };
        self.one_sided_internal(xi, internal_side)
            .map(|v| self.to_external(v))
            .ok_or(Error::Domain { x })
    }

    pub(crate) fn one_sided_internal(&self, x: f64, side: Side) -> Option<f64> {
        if !(0.0..=1.0).contains(&x) {
            return None;
        }
        match side {
            Side::Left => self
                .branches
                .iter()
                .find(|b| b.domain.lo < x && x <= b.domain.hi)
                .map(|b| if x == b.domain.hi { b.limit_hi } else { b.value(x) }),
            Side::Right => self
                .branches
                .iter()
                .find(|b| b.domain.lo <= x && x < b.domain.hi)
                .map(|b| if x == b.domain.lo { b.limit_lo } else { b.value(x) }),
        }
    }

    pub fn verify_hypotheses(&self, tol: &Tolerances) -> HypothesisReport {
        HypothesisReport {
            checks: vec![
                self.check_h1(),
                self.check_h2(),
                self.check_h3(tol.tol_lim),
                self.check_h4(tol.tol_lim),
                self.check_h5(tol.n_deriv),
            ],
        }
    }

    fn check_h1(&self) -> HypothesisCheck {
        let fail = |w: f64, d: String| HypothesisCheck {
            tag: "H1".into(),
            passed: false,
            witness: Some(self.to_external(w)),
            detail: d,
        };
        let ordered = 0.0 < self.d1 && self.d1 < self.d_star && self.d_star < self.d2 && self.d2 < 1.0;
        if !ordered || !(0.0 < self.branch_point && self.branch_point < 1.0) {
            return fail(self.d_star, "cut points must satisfy 0 < d1 < d* < d2 < 1 and b in (0,1)".into());
        }
        let Some(first) = self.branches.first() else {
            return fail(0.0, "no branches".into());
        };
        if !(first.domain.lo == 0.0 && first.domain.lo_closed) {
            return fail(0.0, "domain must contain 0".into());
        }
        for pair in self.branches.windows(2) {
            let (a, b) = (&pair[0].domain, &pair[1].domain);
            if a.hi != b.lo || !a.is_proper() {
                return fail(a.hi, format!("branch domains {a} and {b} are not adjacent"));
            }
            let ok = if a.hi == self.d_star {
                !a.hi_closed && !b.lo_closed
            } else {
                a.hi_closed != b.lo_closed
            };
            if !ok {
                return fail(a.hi, format!("endpoint {} is covered incorrectly", a.hi));
            }
        }
        let last = self.branches.last().unwrap().domain;
        if !(last.hi == 1.0 && last.hi_closed) {
            return fail(1.0, "domain must contain 1".into());
        }
        if !self.branches.iter().any(|b| b.domain.hi == self.d_star) {
            return fail(self.d_star, "d* is not a branch boundary".into());
        }
        HypothesisCheck {
            tag: "H1".into(),
            passed: true,
            witness: None,
            detail: "branch domains partition [0,1] minus d*".into(),
        }
    }

    fn internal_value(&self, x: f64) -> Option<f64> {
        self.branch_index(x).map(|k| self.branches[k].value(x))
    }

    fn check_h2(&self) -> HypothesisCheck {
        let close = |v: Option<f64>, target: f64| v.is_some_and(|v| (v - target).abs() <= EXACT_TOL);
        let fb = self.internal_value(self.branch_point);
        let items = [
            (0.0, close(self.internal_value(0.0), 0.0), "f(0) = 0"),
            (self.d1, close(self.internal_value(self.d1), 1.0), "f(d1) = 1"),
            (self.d2, close(self.internal_value(self.d2), 1.0), "f(d2) = 1"),
            (
                1.0,
                fb.is_some_and(|fb| close(self.internal_value(1.0), fb)),
                "f(1) = f(b)",
            ),
            (
                self.branch_point,
                fb.is_some_and(|fb| 0.0 < fb && fb < self.d1),
                "f(b) in (0, d1)",
            ),
        ];
        for (x, ok, what) in items {
            if !ok {
                return HypothesisCheck {
                    tag: "H2".into(),
                    passed: false,
                    witness: Some(self.to_external(x)),
                    detail: format!("{what} fails"),
                };
            }
        }
        HypothesisCheck {
            tag: "H2".into(),
            passed: true,
            witness: None,
            detail: "endpoint values hold".into(),
        }
    }

    fn check_h3(&self, tol_lim: f64) -> HypothesisCheck {
        let b = self.branch_point;
        let expected = [
            (self.d1, Side::Right, b),
            (self.d2, Side::Right, b),
            (self.d1, Side::Left, 1.0),
            (self.d2, Side::Left, 1.0),
            (self.d_star, Side::Right, 0.0),
            (self.d_star, Side::Left, 0.0),
        ];
        for (x, side, target) in expected {
            let stored = self.one_sided_internal(x, side);
            let ok = stored.is_some_and(|v| (v - target).abs() <= tol_lim);
            if !ok {
                return HypothesisCheck {
                    tag: "H3".into(),
                    passed: false,
                    witness: Some(self.to_external(x)),
                    detail: format!("{side:?} limit at {x} is {stored:?}, expected {target}"),
                };
            }
        }
        for br in &self.branches {
            for (x, stored) in [(br.domain.lo, br.limit_lo), (br.domain.hi, br.limit_hi)] {
                if (br.value(x) - stored).abs() > tol_lim {
                    return HypothesisCheck {
                        tag: "H3".into(),
                        passed: false,
                        witness: Some(self.to_external(x)),
                        detail: format!("stored limit {stored} disagrees with branch value {}", br.value(x)),
                    };
                }
            }
        }
        HypothesisCheck {
            tag: "H3".into(),
            passed: true,
            witness: None,
            detail: "one-sided limits hold".into(),
        }
    }

    fn check_h4(&self, tol_lim: f64) -> HypothesisCheck {
        let b = self.branch_point;
        let fb = self.internal_value(b).unwrap_or(f64::NAN);
        let expected = [
            (Interval::closed(0.0, self.d1), Interval::closed(0.0, 1.0)),
            (Interval::open(self.d1, self.d_star), Interval::open(0.0, b)),
            (Interval::open_closed(self.d_star, self.d2), Interval::open_closed(0.0, 1.0)),
            (Interval::open_closed(self.d2, 1.0), Interval::closed_open(fb, b)),
        ];
        if self.branches.len() != expected.len() {
            return HypothesisCheck {
                tag: "H4".into(),
                passed: false,
                witness: None,
                detail: format!("expected 4 branches, found {}", self.branches.len()),
            };
        }
        for (br, (dom, img)) in self.branches.iter().zip(expected) {
            let got = br.image();
            if !br.domain.approx_eq(&dom, 0.0) || !got.approx_eq(&img, tol_lim) {
                return HypothesisCheck {
                    tag: "H4".into(),
                    passed: false,
                    witness: Some(self.to_external(br.domain.midpoint())),
                    detail: format!("f({}) = {got}, expected f({dom}) = {img}", br.domain),
                };
            }
        }
        HypothesisCheck {
            tag: "H4".into(),
            passed: true,
            witness: None,
            detail: "branch images match".into(),
        }
    }

    fn check_h5(&self, n_deriv: usize) -> HypothesisCheck {
        if !(self.expansion > 1.0) {
            return HypothesisCheck {
                tag: "H5".into(),
                passed: false,
                witness: None,
                detail: format!("expansion constant {} is not > 1", self.expansion),
            };
        }
        let lambda = self.expansion;
        for br in &self.branches {
            let (lo, hi) = (br.domain.lo, br.domain.hi);
            let w = hi - lo;
            let samples = std::iter::once(lo)
                .chain((0..n_deriv).map(|j| lo + (j as f64 + 0.5) * w / n_deriv as f64))
                .chain(std::iter::once(hi));
            for x in samples {
                let d = br.derivative(x);
                if d.abs() < lambda - EXACT_TOL {
                    return HypothesisCheck {
                        tag: "H5".into(),
                        passed: false,
                        witness: Some(self.to_external(x)),
                        detail: format!("|f'({x})| = {} < {lambda}", d.abs()),
                    };
                }
            }
        }
        HypothesisCheck {
            tag: "H5".into(),
            passed: true,
            witness: None,
            detail: format!("|f'| >= {lambda} on every branch"),
        }
    }

    /// True if the derivative keeps one sign on each branch (sampled).
    pub fn branches_strictly_monotone(&self, n: usize) -> bool {
        self.branches.iter().all(|br| {
            let w = br.domain.hi - br.domain.lo;
            let signs: Vec<bool> = (0..=n)
                .map(|j| br.derivative(br.domain.lo + w * j as f64 / n as f64) > 0.0)
                .collect();
            signs.iter().all(|s| *s == signs[0])
        })
    }
}
