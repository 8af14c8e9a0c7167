use serde::{Deserialize, Serialize};

use super::{BranchedIntervalMap, Bump};
use crate::error::{Error, Result};
use crate::interval::Interval;

const MAX_DEPTH: u32 = 50;

/// The two comparison segments: `[0, d1]` and the segment between `d*` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpSegment {
    First,
    Second,
}

impl BumpSegment {
    pub const ALL: [BumpSegment; 2] = [BumpSegment::First, BumpSegment::Second];

    /// Bounds in internal coordinates, ordered.
    pub fn bounds(self, map: &BranchedIntervalMap) -> (f64, f64) {
        match self {
            BumpSegment::First => (0.0, map.d1),
            BumpSegment::Second => {
                let (a, b) = (map.d_star, map.branch_point);
                (a.min(b), a.max(b))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthBudget {
    pub epsilon: f64,
    pub tol_quad: f64,
}

impl ArcLengthBudget {
    pub fn new(epsilon: f64, tol_quad: f64) -> Self {
        Self { epsilon, tol_quad }
    }
}

impl Default for ArcLengthBudget {
    fn default() -> Self {
        Self::new(0.05, 1e-8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentArcLength {
    pub segment: BumpSegment,
    pub lo: f64,
    pub hi: f64,
    pub base: f64,
    pub modified: f64,
    pub passed: bool,
}

impl SegmentArcLength {
    pub fn delta(&self) -> f64 {
        self.modified - self.base
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthReport {
    pub epsilon: f64,
    pub segments: Vec<SegmentArcLength>,
    pub passed: bool,
}

/// Arc length of the graph over `[lo, hi]` (internal coordinates).
///
/// The range is split at branch boundaries and bump supports so the
/// integrand is smooth on every piece.
pub fn arc_length(map: &BranchedIntervalMap, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("bad quadrature range [{lo}, {hi}] or tolerance {tol}")));
    }
    let mut cuts = vec![lo, hi];
    for br in &map.branches {
        cuts.extend([br.domain.lo, br.domain.hi]);
        cuts.extend(br.bumps.iter().flat_map(|b| [b.lo, b.hi]));
    }
    cuts.retain(|c| (lo..=hi).contains(c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts.len().saturating_sub(1).max(1) as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, c) = (w[0], w[1]);
        let Some(k) = map.branch_index_closure(0.5 * (a + c)) else {
            return Err(Error::Domain { x: 0.5 * (a + c) });
        };
        let br = &map.branches[k];
        let g = |x: f64| (1.0 + br.derivative(x).powi(2)).sqrt();
        total += adaptive_simpson(&g, a, c, tol / pieces)?;
    }
    Ok(total)
}

fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(g, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn step(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth >= 4 && err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure { lo: a, hi: b, tol });
    }
    Ok(step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// Checks `L(f) < L(f⁺) < L(f) + ε` on both segments.
///
/// Each inequality must hold with a margin of twice the quadrature tolerance.
pub fn verify_arclength_eps(
    base: &BranchedIntervalMap,
    plus: &BranchedIntervalMap,
    budget: &ArcLengthBudget,
) -> Result<ArcLengthReport> {
    let same = |a: f64, b: f64| (a - b).abs() <= super::EXACT_TOL;
    if !(same(base.d1, plus.d1) && same(base.d_star, plus.d_star) && same(base.branch_point, plus.branch_point)) {
        return Err(Error::InvalidInput("maps do not share d1, d* and b".into()));
    }
    let margin = 2.0 * budget.tol_quad;
    let mut segments = Vec::with_capacity(2);
    for seg in BumpSegment::ALL {
        let (lo, hi) = seg.bounds(base);
        let lb = arc_length(base, lo, hi, budget.tol_quad)?;
        let lp = arc_length(plus, lo, hi, budget.tol_quad)?;
        let passed = lb + margin < lp && lp + margin < lb + budget.epsilon;
        let (elo, ehi) = {
            let i = base.interval_to_external(&Interval::closed(lo, hi));
            (i.lo, i.hi)
        };
        segments.push(SegmentArcLength {
            segment: seg,
            lo: elo,
            hi: ehi,
            base: lb,
            modified: lp,
            passed,
        });
    }
    let passed = budget.epsilon > 0.0 && segments.iter().all(|s| s.passed);
    Ok(ArcLengthReport {
        epsilon: budget.epsilon,
        segments,
        passed,
    })
}

/// Amplitude of a single bump on `seg` whose arc-length excess is `target`.
///
/// The search is capped at the amplitude that would bring `|f'|` down to the
/// expansion constant.
pub fn tune_bump_amplitude(
    base: &BranchedIntervalMap,
    seg: BumpSegment,
    target: f64,
    tol_quad: f64,
) -> Result<f64> {
    let (lo, hi) = seg.bounds(base);
    let k = base
        .branch_index_closure(0.5 * (lo + hi))
        .ok_or(Error::Domain { x: 0.5 * (lo + hi) })?;
    let slope = (0..=64)
        .map(|j| base.branches[k].derivative(lo + (hi - lo) * j as f64 / 64.0).abs())
        .fold(f64::INFINITY, f64::min);
    let a_max = Bump::amplitude_for_slope(lo, hi, slope - base.expansion);
    if !(target > 0.0) || !(a_max > 0.0) {
        return Err(Error::InvalidInput(format!("no admissible bump for target {target}")));
    }
    let l0 = arc_length(base, lo, hi, tol_quad)?;
    let excess = |a: f64| -> Result<f64> {
        let mut m = base.clone();
        m.add_bump(seg, a);
        Ok(arc_length(&m, lo, hi, tol_quad)? - l0)
    };
    if excess(a_max)? < target {
        return Err(Error::InvalidInput(format!(
            "arc-length excess {target} exceeds what |f'| >= {} allows",
            base.expansion
        )));
    }
    let (mut a, mut b) = (0.0, a_max);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if excess(m)? < target {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-12 * a_max {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
