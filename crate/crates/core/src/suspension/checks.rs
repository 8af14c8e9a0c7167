use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Example, SingularSuspension};
use crate::error::{Error, Result};
use crate::geometry::{directed_hausdorff, thin, Point2};
use crate::skew2d::{BoxBudget, BoxIndex, BoxSet, Half, IntersectionKind, IntersectionReport, PeriodicPoint2, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityEvidence {
    /// Every branch of every half maps its leaves into the same half and
    /// every fiber offset keeps the strip.
    pub invariance_certificate: bool,
    pub certificate_detail: Vec<String>,
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Consecutive returns on strictly opposite sides of leaf 0.
    pub half_crossings: u64,
    /// Orbits stopped on a singular leaf.
    pub stagnated: usize,
    /// Smallest fraction of post-transient returns spent in the starting half.
    pub min_home_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TransitivityVerdict {
    NonTransitive(TransitivityEvidence),
    Inconclusive { reason: String, evidence: Option<TransitivityEvidence> },
}

impl TransitivityVerdict {
    pub fn is_non_transitive(&self) -> bool {
        matches!(self, TransitivityVerdict::NonTransitive(_))
    }

    pub fn evidence(&self) -> Option<&TransitivityEvidence> {
        match self {
            TransitivityVerdict::NonTransitive(e) => Some(e),
            TransitivityVerdict::Inconclusive { evidence, .. } => evidence.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionStructure {
    PeriodicOrbit,
    SingularClosure,
    Unmatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleCertificate {
    pub point: Point2,
    pub period: usize,
    pub base_multiplier: f64,
    pub fiber_multiplier: f64,
    pub return_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMatch {
    pub labels: Vec<String>,
    pub trace_points: usize,
    /// Every trace point lies within this distance of a retained one; it is
    /// added to the trace-to-intersection distance.
    pub thinning: f64,
    /// Largest distance from an intersection point to the trace.
    pub intersection_to_trace: f64,
    pub trace_to_intersection: f64,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub example: Option<Example>,
    pub n: usize,
    pub eps: f64,
    pub intersection_kind: IntersectionStructure,
    pub intersection: IntersectionReport,
    pub certificate: Option<SaddleCertificate>,
    pub traces: Vec<TraceMatch>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnstableCheck {
    pub label: String,
    pub halves: Vec<Half>,
    pub n: usize,
    pub eps: f64,
    pub trace_points: usize,
    pub max_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitAudit {
    pub half: Half,
    pub leaf: f64,
    pub fiber: f64,
    pub period: usize,
    pub returns: usize,
    /// Sum of `ln|base′|` over the audited returns.
    pub log_expansion: f64,
    pub total_time: f64,
    pub rate: f64,
    pub max_ceiling: f64,
    pub threshold: f64,
    pub fiber_multiplier: f64,
    /// `(λu - λs)·transit` summed over returns within `δ_sing` of a singular
    /// leaf; reported, not added to the rate.
    pub passage_correction: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub lambda: f64,
    pub horizon: usize,
    pub orbits: Vec<OrbitAudit>,
    pub min_rate: f64,
    pub all_passed: bool,
}

/// Order-independent sum.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Trace resolution relative to `eps`.
const THIN_FACTOR: f64 = 0.01;

/// Box centres of a trace, thinned to `delta`.
fn trace_points(set: &BoxSet, delta: f64) -> Vec<Point2> {
    let mut pts: Vec<Point2> = set.boxes().iter().map(|b| Point2::new(b.leaf.midpoint(), b.fiber.midpoint())).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    thin(&pts, delta)
}

impl SingularSuspension {
    /// Exact forward invariance of the halves from branch limits and fiber
    /// offsets.
    fn invariance_certificate(&self) -> (bool, Vec<String>) {
        let mut ok = true;
        let mut detail = Vec::new();
        for &half in &self.halves {
            let (c, d) = self.section_map.invariance_certificate(half);
            ok &= c;
            detail.extend(d);
        }
        (ok, detail)
    }

    /// Samples `n_samples` orbits of `n_iters` returns and counts crossings
    /// between the open halves; crossings would be forbidden exactly by the
    /// invariance certificate. Zero crossings with a valid certificate over
    /// two halves give a non-transitivity verdict.
    pub fn transitivity_witness(&self, n_samples: usize, n_iters: usize, seed: u64) -> TransitivityVerdict {
        if n_samples == 0 || n_iters == 0 {
            return TransitivityVerdict::Inconclusive {
                reason: "empty sample budget".into(),
                evidence: None,
            };
        }
        let (cert, certificate_detail) = self.invariance_certificate();
        let transient = n_iters / 10;
        let halves = &self.halves;
        let per: Vec<(u64, bool, f64)> = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let half = halves[i % halves.len()];
                let leaf = half.sign() * rng.gen_range(0.0..=1.0f64);
                let mut p = Point2::new(leaf, rng.gen_range(0.0..=1.0));
                let mut crossings = 0u64;
                let mut home = 0usize;
                let mut counted = 0usize;
                let mut last = if p.x == 0.0 { 0.0 } else { p.x.signum() };
                for it in 0..n_iters {
                    let Ok(q) = self.section_map.apply(p) else {
                        return (crossings, true, if counted == 0 { 1.0 } else { home as f64 / counted as f64 });
                    };
                    p = q;
                    if p.x != 0.0 {
                        let s = p.x.signum();
                        if last != 0.0 && s != last {
                            crossings += 1;
                        }
                        last = s;
                    }
                    if it >= transient {
                        counted += 1;
                        if p.x == 0.0 || p.x.signum() == half.sign() {
                            home += 1;
                        }
                    }
                }
                (crossings, false, if counted == 0 { 1.0 } else { home as f64 / counted as f64 })
            })
            .collect();
        let evidence = TransitivityEvidence {
            invariance_certificate: cert,
            certificate_detail,
            samples: n_samples,
            iterations: n_iters,
            seed,
            half_crossings: per.iter().map(|r| r.0).sum(),
            stagnated: per.iter().filter(|r| r.1).count(),
            min_home_fraction: per.iter().map(|r| r.2).fold(1.0, f64::min),
        };
        if self.halves.len() < 2 {
            return TransitivityVerdict::Inconclusive {
                reason: "a single half carries no separating invariant set".into(),
                evidence: Some(evidence),
            };
        }
        if !cert || evidence.half_crossings > 0 {
            return TransitivityVerdict::Inconclusive {
                reason: "halves are not both invariant".into(),
                evidence: Some(evidence),
            };
        }
        TransitivityVerdict::NonTransitive(evidence)
    }

    fn attractors(&self, n: usize, budget: &BoxBudget) -> Result<(BoxSet, BoxSet)> {
        let (a, b) = rayon::join(
            || self.section_map.attractor_half(Half::Plus, n, budget),
            || self.section_map.attractor_half(Half::Minus, n, budget),
        );
        Ok((a?, b?))
    }

    /// Intersection of the two classes at generation `n`: collapse to the
    /// saddle `P` for the H map, or agreement with the forward closure of the
    /// singular leaves for the G map.
    pub fn class_structure(&self, n: usize, eps: f64, budget: &BoxBudget) -> Result<TheoremVerdict> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("generation {n} must be at least 4")));
        }
        let (a, b) = self.attractors(n, budget)?;
        Ok(self.class_structure_of(&a, &b, eps))
    }

    /// [`class_structure`](Self::class_structure) on precomputed generations
    /// of the plus and minus attractors.
    pub fn class_structure_of(&self, a: &BoxSet, b: &BoxSet, eps: f64) -> TheoremVerdict {
        let map = &self.section_map;
        let n = a.generation.min(b.generation);
        let report = map.class_intersection_of(a, b, eps);
        let mut certificate = None;
        let mut traces = Vec::new();
        let kind = match map.variant {
            Variant::H => {
                let p = map.fixed_point_p();
                certificate = map
                    .periodic_points_2d(1, 1e-10)
                    .into_iter()
                    .find(|q| q.point().dist(&p) <= 1e-10)
                    .map(|q| SaddleCertificate {
                        point: q.point(),
                        period: q.period,
                        base_multiplier: q.base_multiplier,
                        fiber_multiplier: q.fiber_multiplier,
                        return_time: self.ceiling(q.point()),
                    });
                let saddle = certificate
                    .as_ref()
                    .is_some_and(|c| c.fiber_multiplier.abs() < 1.0 && 1.0 < c.base_multiplier.abs());
                if report.kind == IntersectionKind::Point && report.contains_p && saddle {
                    IntersectionStructure::PeriodicOrbit
                } else {
                    IntersectionStructure::Unmatched
                }
            }
            Variant::G => {
                let delta = THIN_FACTOR * eps;
                let mut per_label = Vec::new();
                for s in &self.singularities {
                    let mut pts = Vec::new();
                    for at in &s.leaves {
                        let slice = if at.half == Half::Plus { a } else { b };
                        pts.extend(trace_points(&map.singular_leaf_forward_closure(at.half, n, slice), delta));
                    }
                    per_label.push((vec![s.label.clone()], pts));
                }
                if per_label.len() > 1 {
                    let labels = per_label.iter().flat_map(|(l, _)| l.clone()).collect();
                    let pts = per_label.iter().flat_map(|(_, p)| p.iter().copied()).collect();
                    per_label.insert(0, (labels, pts));
                }
                for (labels, mut pts) in per_label {
                    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
                    let pts = thin(&pts, delta);
                    let fwd = directed_hausdorff(&report.points, &pts);
                    let bwd = directed_hausdorff(&pts, &report.points) + delta;
                    traces.push(TraceMatch {
                        labels,
                        trace_points: pts.len(),
                        thinning: delta,
                        intersection_to_trace: fwd,
                        trace_to_intersection: bwd,
                        hausdorff: fwd.max(bwd),
                    });
                }
                let matched = !traces.is_empty() && traces.iter().all(|t| t.hausdorff <= eps);
                if report.kind == IntersectionKind::SegmentClosure && report.contains_p && matched {
                    IntersectionStructure::SingularClosure
                } else {
                    IntersectionStructure::Unmatched
                }
            }
        };
        TheoremVerdict {
            example: self.example,
            n,
            eps,
            intersection_kind: kind,
            intersection: report,
            certificate,
            traces,
            passed: kind != IntersectionStructure::Unmatched,
        }
    }

    /// The forward closure of the singular leaves of `label` lies within
    /// `eps` of the attractor approximation of the half it is attached to.
    pub fn unstable_in_class(&self, label: &str, n: usize, eps: f64, budget: &BoxBudget) -> Result<UnstableCheck> {
        let s = self
            .singularity(label)
            .ok_or_else(|| Error::InvalidInput(format!("no singularity labelled {label:?}")))?;
        let mut max_distance: f64 = 0.0;
        let mut count = 0;
        for at in &s.leaves {
            let a = self.section_map.attractor_half(at.half, n, budget)?;
            let delta = THIN_FACTOR * eps.max(f64::MIN_POSITIVE);
            let trace = trace_points(&self.section_map.singular_leaf_forward_closure(at.half, n, &a), delta);
            let index = BoxIndex::new(&a);
            let cutoff = eps.max(0.0);
            let d = trace.par_iter().map(|p| index.distance(p, cutoff)).reduce(|| 0.0, f64::max) + delta;
            max_distance = max_distance.max(d);
            count += trace.len();
        }
        Ok(UnstableCheck {
            label: label.to_string(),
            halves: s.leaves.iter().map(|a| a.half).collect(),
            n,
            eps,
            trace_points: count,
            max_distance,
            passed: eps > 0.0 && max_distance <= eps,
        })
    }

    /// Growth rate of the centre-plane determinant along one cycle given as
    /// `(leaf, base derivative)` pairs. Sums are taken in sorted order, so any
    /// rotation of the cycle gives the same values.
    pub fn audit_cycle(&self, half: Half, cycle: &[(f64, f64)], fiber: f64, horizon: usize) -> OrbitAudit {
        let period = cycle.len();
        let reps = horizon.div_ceil(period.max(1)).max(1);
        let lambda = self.section_map.half_map(half).expansion;
        let logs = sorted_sum(cycle.iter().map(|&(_, d)| d.abs().ln()).collect());
        let times: Vec<f64> = cycle.iter().map(|&(x, _)| self.ceiling(Point2::new(x, fiber))).collect();
        let max_ceiling = times.iter().copied().fold(0.0, f64::max);
        let period_time = sorted_sum(times);
        let correction = sorted_sum(
            cycle
                .iter()
                .filter_map(|&(x, _)| {
                    let (s, _, d) = self.nearest_singular(x);
                    (d <= self.delta_sing).then(|| (s.spectrum.lambda_u - s.spectrum.lambda_s) * (-d.ln() / s.spectrum.lambda_u))
                })
                .collect(),
        );
        let rate = logs / period_time;
        let threshold = lambda.ln() / max_ceiling;
        let fiber_multiplier = self.section_map.mu.powi(period as i32);
        OrbitAudit {
            half,
            leaf: cycle.first().map_or(f64::NAN, |c| c.0),
            fiber,
            period,
            returns: reps * period,
            log_expansion: reps as f64 * logs,
            total_time: reps as f64 * period_time,
            rate,
            max_ceiling,
            threshold,
            fiber_multiplier,
            passage_correction: reps as f64 * correction,
            passed: rate > 0.0 && rate >= threshold,
        }
    }

    /// Audits each suspended periodic orbit over `horizon` returns (rounded
    /// up to whole periods).
    pub fn sectional_expansion_audit(&self, orbits: &[PeriodicPoint2], horizon: usize) -> Result<AuditReport> {
        if orbits.is_empty() {
            return Err(Error::EmptyInput);
        }
        let audits: Vec<OrbitAudit> = orbits
            .par_iter()
            .map(|q| {
                let m = self.section_map.half_map(q.half);
                let cycle = m.orbit_along(&q.itinerary, q.leaf);
                let mut a = self.audit_cycle(q.half, &cycle, q.fiber, horizon);
                a.passed &= q.fiber_multiplier.abs() <= self.section_map.mu.powi(q.period as i32) * (1.0 + 1e-12);
                a.fiber_multiplier = q.fiber_multiplier;
                a
            })
            .collect();
        let lambda = self
            .halves
            .iter()
            .map(|&h| self.section_map.half_map(h).expansion)
            .fold(f64::INFINITY, f64::min);
        Ok(AuditReport {
            lambda,
            horizon,
            min_rate: audits.iter().map(|a| a.rate).fold(f64::INFINITY, f64::min),
            all_passed: audits.iter().all(|a| a.passed),
            orbits: audits,
        })
    }
}
