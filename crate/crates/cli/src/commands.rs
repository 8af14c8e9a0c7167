//! The five subcommands. Each returns its report and artifacts; nothing is
//! written until the command has finished.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use venice_core::branched1d::{covering_radius, verify_arclength_eps, ArcLengthBudget};
use venice_core::cherryplug::{
    equilibria, productize, separatrix_targets, EquilibriumKind, EquilibriumReport, PlanarField, SectionDisk,
};
use venice_core::ode::OdeOptions;
use venice_core::skew2d::{Half, SkewReturnMap, Variant};
use venice_core::suspension::{Example, IntersectionStructure, SingularSuspension};
use venice_core::svg::{box_sets_svg, phase_portrait_svg};
use venice_core::{BoxSet, BranchedIntervalMap, Error, Interval, Point2};

use crate::config::{Format, RunConfig};
use crate::report::{DiagnosticsReport, ReportBuilder, Timings};

/// Agreement required for exact identities evaluated in floating point.
const EXACT: f64 = 1e-12;
/// Targets per unit length for the 1D nets.
const NET_TARGETS: usize = 200;
/// Newton tolerance for the planar equilibria.
const EQ_TOL: f64 = 1e-12;

pub struct Artifact {
    pub file: String,
    pub format: Format,
    pub contents: String,
}

pub struct Outcome {
    pub stem: String,
    pub report: DiagnosticsReport,
    pub timings: Timings,
    pub artifacts: Vec<Artifact>,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

fn error_witness(e: &Error) -> Value {
    match e {
        Error::BudgetExceeded { boxes, cap } => json!({ "error": e.to_string(), "note": "BudgetExceeded", "boxes": boxes, "cap": cap }),
        _ => json!({ "error": e.to_string() }),
    }
}

fn failure(e: &Error) -> String {
    match e {
        Error::BudgetExceeded { .. } => format!("BudgetExceeded: {e}"),
        _ => e.to_string(),
    }
}

/// Stores `result` under `name`, or a failed record carrying the error.
fn record_result<T>(
    r: &mut ReportBuilder,
    name: &str,
    tag: &str,
    result: venice_core::Result<T>,
    judge: impl FnOnce(&T) -> (bool, String, Value),
) -> Option<T> {
    match result {
        Ok(v) => {
            let (passed, verdict, witness) = judge(&v);
            r.record(name, tag, passed, verdict, witness);
            Some(v)
        }
        Err(e) => {
            r.record(name, tag, false, failure(&e), error_witness(&e));
            None
        }
    }
}

fn verdict(passed: bool, yes: &str, no: &str) -> String {
    if passed { yes } else { no }.to_string()
}

/// `count` random open intervals of the space with lengths in `[lo, hi]`.
fn random_intervals(map: &BranchedIntervalMap, count: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<Interval> {
    (0..count)
        .map(|_| {
            let len = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            let start = rng.gen_range(0.0..=1.0 - len);
            let (a, b) = (map.to_external(start), map.to_external(start + len));
            Interval::open(a.min(b), a.max(b))
        })
        .collect()
}

fn net_targets(map: &BranchedIntervalMap) -> Vec<f64> {
    (0..=NET_TARGETS).map(|i| map.to_external(i as f64 / NET_TARGETS as f64)).collect()
}

fn verify_map(
    cfg: &RunConfig,
    r: &mut ReportBuilder,
    csv: &mut String,
    label: &str,
    map: &BranchedIntervalMap,
    arclength_base: Option<BranchedIntervalMap>,
    stream: u64,
) {
    let p = &cfg.verify_1d;
    let tol = &cfg.tolerances;
    let hyp = map.verify_hypotheses(tol);
    let tags: BTreeSet<&str> = hyp.checks.iter().map(|c| c.tag.as_str()).collect();
    for tag in tags {
        let checks: Vec<_> = hyp.checks.iter().filter(|c| c.tag == tag).collect();
        let passed = checks.iter().all(|c| c.passed);
        let details: Vec<&str> = checks.iter().map(|c| c.detail.as_str()).collect();
        let witness = checks.iter().find(|c| !c.passed).or(checks.first()).and_then(|c| c.witness);
        r.record(
            &format!("{label}.hypothesis.{tag}"),
            tag,
            passed,
            details.join("; "),
            json!({ "witness": witness, "checks": to_json(&checks) }),
        );
    }

    if let Some(base) = arclength_base {
        let budget = ArcLengthBudget::new(p.arclength_eps, tol.tol_quad);
        record_result(r, &format!("{label}.arclength"), "H1-H5", verify_arclength_eps(&base, map, &budget), |a| {
            (a.passed, verdict(a.passed, "length increase below epsilon on both segments", "arc-length sandwich fails"), to_json(a))
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let intervals = random_intervals(map, p.leo_intervals, p.leo_min_length, p.leo_max_length, &mut rng);
    let results: Vec<_> = intervals.par_iter().map(|i| map.leo_check(i, p.leo_m_max, tol.tol_cover)).collect();
    let failed: Vec<usize> = (0..results.len()).filter(|&k| results[k].m.is_none()).collect();
    let worst_m = results.iter().filter_map(|x| x.m).max();
    let max_gap = results.iter().map(|x| x.gap).fold(0.0, f64::max);
    let first_failure = failed.first().map(|&k| json!({ "lo": intervals[k].lo, "hi": intervals[k].hi, "gap": results[k].gap }));
    r.record(
        &format!("{label}.leo"),
        "H1-H5",
        failed.is_empty(),
        format!("{} of {} intervals cover the space within {} iterates", results.len() - failed.len(), results.len(), p.leo_m_max),
        json!({ "intervals": results.len(), "failures": failed.len(), "max_m": worst_m, "max_gap": max_gap, "first_failure": first_failure }),
    );

    let space = map.space();
    let net = map.periodic_net(p.net_period, 0.5 * p.net_eps, &net_targets(map), tol.tol_root);
    let mut xs: Vec<f64> = net.points.iter().map(|q| q.x).collect();
    xs.sort_by(f64::total_cmp);
    let radius = covering_radius(&xs, space.lo, space.hi);
    let passed = net.passed() && radius <= p.net_eps;
    r.record(
        &format!("{label}.periodic_net"),
        "H1-H5",
        passed,
        format!("periodic points of period <= {} have covering radius {radius:.3e}", p.net_period),
        json!({ "eps": p.net_eps, "targets": net.targets, "covered": net.covered, "points": net.points.len(), "covering_radius": radius, "max_gap": net.max_gap, "nodes_visited": net.nodes_visited }),
    );
    for q in &net.points {
        let word: String = q.itinerary.iter().map(|d| char::from(b'0' + d)).collect();
        csv.push_str(&format!("{label},{},{},{},{word}\n", q.x, q.period, q.multiplier));
    }

    let x = map.to_external(p.preimage_point);
    let pre = map.preimage_tree(x, p.preimage_depth);
    let radius = covering_radius(&pre, space.lo, space.hi);
    r.record(
        &format!("{label}.preimage_net"),
        "H1-H5",
        radius <= p.net_eps,
        format!("preimages of {x} up to depth {} have covering radius {radius:.3e}", p.preimage_depth),
        json!({ "point": x, "depth": p.preimage_depth, "eps": p.net_eps, "points": pre.len(), "covering_radius": radius }),
    );
}

pub fn verify_1d(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let params = json!({ "verify_1d": to_json(&cfg.verify_1d), "tolerances": to_json(&cfg.tolerances) });
    let mut r = ReportBuilder::new("verify-1d", cfg.seed, params);
    let mut csv = String::from("map,x,period,multiplier,itinerary\n");
    verify_map(cfg, &mut r, &mut csv, "f", &cfg.map, None, 0);
    verify_map(cfg, &mut r, &mut csv, "f_plus", &cfg.map_plus, Some(cfg.map.clone()), 1);
    verify_map(cfg, &mut r, &mut csv, "f_minus", &cfg.map_minus, Some(cfg.map.reflect()), 2);
    let (report, timings) = r.finish("hypotheses verified", "hypotheses not verified");
    Ok(Outcome {
        stem: "verify_1d".into(),
        report,
        timings,
        artifacts: vec![Artifact {
            file: "verify_1d_periodic.csv".into(),
            format: Format::Csv,
            contents: csv,
        }],
    })
}

/// `θ∘G = G∘θ` on a `k × k` grid of the strip, `k² ≥ samples`.
fn equivariance_on_grid(map: &SkewReturnMap, samples: usize) -> (bool, Value) {
    let k = (samples as f64).sqrt().ceil() as usize;
    let pts: Vec<Point2> = (0..k)
        .flat_map(|i| (0..k).map(move |j| Point2::new(-1.0 + 2.0 * (i as f64 + 0.5) / k as f64, (j as f64 + 0.5) / k as f64)))
        .collect();
    let (dev, mismatched) = pts
        .par_iter()
        .map(|&p| match (map.apply(p), map.apply(SkewReturnMap::theta(p))) {
            (Ok(a), Ok(b)) => (SkewReturnMap::theta(a).dist(&b), 0usize),
            (Err(_), Err(_)) => (0.0, 0),
            _ => (f64::INFINITY, 1),
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    let passed = mismatched == 0 && dev <= EXACT;
    (passed, json!({ "grid": k, "points": pts.len(), "max_deviation": dev, "domain_mismatches": mismatched }))
}

/// Exact branch certificate for both halves and one sampled step per point.
fn half_invariance(map: &SkewReturnMap, samples: usize, seed: u64) -> (bool, Value) {
    let mut ok = true;
    let mut detail = Vec::new();
    for half in Half::BOTH {
        let (c, d) = map.invariance_certificate(half);
        ok &= c;
        detail.extend(d);
    }
    let mut crossings = 0usize;
    for (s, half) in Half::BOTH.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        for _ in 0..samples {
            let p = Point2::new(half.sign() * rng.gen_range(0.0..1.0), rng.gen_range(0.0..=1.0));
            if let Ok(q) = map.apply(p) {
                crossings += usize::from(q.x * half.sign() < 0.0);
            }
        }
    }
    (ok && crossings == 0, json!({ "certificate": ok, "certificate_detail": detail, "samples_per_half": samples, "half_crossings": crossings }))
}

fn hypotheses_record(r: &mut ReportBuilder, name: &str, tag: &str, cfg: &RunConfig, map: &SkewReturnMap) {
    let plus = map.plus.verify_hypotheses(&cfg.tolerances);
    let minus = map.minus.verify_hypotheses(&cfg.tolerances);
    let failed: Vec<String> = [("plus", &plus), ("minus", &minus)]
        .iter()
        .flat_map(|(h, rep)| rep.checks.iter().filter(|c| !c.passed).map(move |c| format!("{h} {}: {}", c.tag, c.detail)))
        .collect();
    let passed = failed.is_empty();
    r.record(
        name,
        tag,
        passed,
        verdict(passed, "both half maps satisfy H1-H5", "a half map violates H1-H5"),
        json!({ "failed": failed, "plus": to_json(&plus), "minus": to_json(&minus) }),
    );
}

fn section_map_checks(r: &mut ReportBuilder, cfg: &RunConfig, map: &SkewReturnMap, prefix: &str, tag: Option<&str>) {
    let tag_for = |own: &str| tag.unwrap_or(own).to_string();
    match map.variant {
        Variant::G => {
            let (passed, w) = equivariance_on_grid(map, cfg.classes.invariance_samples);
            r.record(&format!("{prefix}theta_equivariance"), &tag_for("G1"), passed, verdict(passed, "θ commutes with G", "θ does not commute with G"), w);
            hypotheses_record(r, &format!("{prefix}half_hypotheses"), &tag_for("G3"), cfg, map);
        }
        Variant::H => {
            let (passed, w) = half_invariance(map, cfg.classes.invariance_samples, cfg.seed);
            r.record(&format!("{prefix}half_invariance"), &tag_for("L1"), passed, verdict(passed, "both halves are forward invariant", "a half is not forward invariant"), w);
            hypotheses_record(r, &format!("{prefix}half_hypotheses"), &tag_for("L3"), cfg, map);
        }
    }
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::G => "g",
        Variant::H => "h",
    }
}

pub fn classes(cfg: &RunConfig, variant: Variant) -> anyhow::Result<Outcome> {
    let map = cfg.skew_map(variant).context("section map")?;
    let k = &cfg.classes;
    let (t1, t2, t3) = match variant {
        Variant::G => ("G1", "G2", "G3"),
        Variant::H => ("L1", "L2", "L3"),
    };
    let params = json!({ "variant": variant, "classes": to_json(k), "budget": to_json(&cfg.budget), "skew": to_json(&cfg.skew) });
    let name = format!("classes-{}", variant_name(variant));
    let mut r = ReportBuilder::new(&name, cfg.seed, params);

    section_map_checks(&mut r, cfg, &map, "", None);

    let mut last: Vec<BoxSet> = Vec::new();
    for half in Half::BOTH {
        let gens = map.attractor_generations(half, k.n, &cfg.budget);
        let rec = format!("attractor_{}", if half == Half::Plus { "plus" } else { "minus" });
        if let Some(gens) = record_result(&mut r, &rec, t2, gens, |gens| {
            let nested = gens.windows(2).all(|w| w[1].is_nested_in(&w[0], EXACT));
            let widths: Vec<Value> = gens
                .iter()
                .map(|g| json!({ "generation": g.generation, "boxes": g.len(), "max_fiber_width": g.max_fiber_width(), "coarsened": g.coarsened }))
                .collect();
            let contracted = gens
                .iter()
                .all(|g| g.coarsened || g.max_fiber_width() <= map.mu.powi(g.generation as i32) + EXACT);
            let passed = nested && contracted;
            (passed, verdict(passed, "generations nested with fibers of width μ^k", "generations not nested or fibers not contracted"), json!({ "nested": nested, "generations": widths }))
        }) {
            last.push(gens.into_iter().last().expect("n >= 4 generations"));
        }
    }

    let pts = map.periodic_points_2d(k.saddle_period, cfg.tolerances.tol_root);
    let non_saddles = pts.iter().filter(|q| !q.is_saddle()).count();
    let residual = pts.iter().map(|q| map.fiber_residual(q)).fold(0.0, f64::max);
    let passed = !pts.is_empty() && non_saddles == 0 && residual <= 1e-10;
    r.record(
        "saddle_periodic_points",
        &format!("{t2}-{t3}"),
        passed,
        format!("{} lifted cycles of period <= {}, {non_saddles} not saddles", pts.len(), k.saddle_period),
        json!({ "points": pts.len(), "non_saddles": non_saddles, "max_fiber_residual": residual }),
    );

    let p = map.fixed_point_p();
    let moved = map.apply(p).map(|q| q.dist(&p));
    record_result(&mut r, "fixed_point_p", t1, moved, |d| {
        let passed = *d <= 1e-10 && p.x == 0.0;
        (passed, format!("P = ({}, {}) moves by {d:.1e}", p.x, p.y), json!({ "p": p, "displacement": d }))
    });

    let mut artifacts = Vec::new();
    let which = match variant {
        Variant::G => Example::Y,
        Variant::H => Example::X,
    };
    let tag = format!("{t1}-{t3}");
    if let [a, b] = &last[..] {
        let field = cfg.plug_field().context("plug field")?;
        let s = SingularSuspension::build_example_on(which, map.clone(), &field, cfg.example.lambda_ss)
            .context("suspension over the section map")?;
        let v = s.class_structure_of(a, b, k.eps);
        let i = &v.intersection;
        let passed = v.passed && i.matches_variant();
        r.record(
            "class_intersection",
            &tag,
            passed,
            format!("intersection is {:?} with diameter {:.3e}, P contained: {}", i.kind, i.diameter, i.contains_p),
            json!({
                "kind": i.kind, "structure": v.intersection_kind, "n": v.n, "eps": v.eps, "points": i.points.len(),
                "diameter": i.diameter, "p": i.p, "distance_to_p": i.distance_to_p, "contains_p": i.contains_p,
                "leaf_extent": i.leaf_extent, "certificate": to_json(&v.certificate), "traces": to_json(&v.traces),
            }),
        );
        artifacts.push(Artifact {
            file: format!("{}_intersection.json", name.replace('-', "_")),
            format: Format::Json,
            contents: pretty(&v),
        });
        artifacts.push(Artifact {
            file: format!("{}_overlay.svg", name.replace('-', "_")),
            format: Format::Svg,
            contents: box_sets_svg(&[(a, "steelblue"), (b, "indianred")], &i.points, &format!("A+ and A- of {variant:?} at n = {}", v.n)),
        });
        for (set, half) in [(a, "plus"), (b, "minus")] {
            artifacts.push(Artifact {
                file: format!("{}_{half}_boxes.csv", name.replace('-', "_")),
                format: Format::Csv,
                contents: set.to_csv(),
            });
        }
    } else {
        r.record("class_intersection", &tag, false, "not computed: an attractor generation failed", json!({ "note": "BudgetExceeded" }));
    }

    let (report, timings) = r.finish("expected intersection structure", "intersection structure not verified");
    Ok(Outcome {
        stem: name.replace('-', "_"),
        report,
        timings,
        artifacts,
    })
}

fn example_name(which: Example) -> &'static str {
    match which {
        Example::X => "x",
        Example::Y => "y",
        Example::OneSingularity => "one_singularity",
    }
}

pub fn example(cfg: &RunConfig, which: Example) -> anyhow::Result<Outcome> {
    let e = &cfg.example;
    let variant = match which {
        Example::X => Variant::H,
        Example::Y | Example::OneSingularity => Variant::G,
    };
    let map = cfg.skew_map(variant).context("section map")?;
    let field = cfg.plug_field().context("plug field")?;
    let s = SingularSuspension::build_example_on(which, map, &field, e.lambda_ss)
        .context("suspension")?;
    let params = json!({ "which": which, "example": to_json(e), "budget": to_json(&cfg.budget), "skew": to_json(&cfg.skew) });
    let name = format!("example-{}", example_name(which));
    let mut r = ReportBuilder::new(&name, cfg.seed, params);

    section_map_checks(&mut r, cfg, &s.section_map, "section_map.", Some("X3"));

    let plug = &s.plug;
    let passed = plug.repelling_orbits.len() == plug.holes;
    r.record("plug.repelling_orbits", "X1", passed, format!("repelling orbits {}", plug.repelling_orbits.join(", ")), json!({ "metadata": to_json(plug) }));
    let passed = plug.removed_tori.len() == plug.holes && plug.lands_in_interior;
    r.record("plug.removed_tori", "X2", passed, format!("removed tori {}", plug.removed_tori.join(", ")), json!({ "metadata": to_json(plug) }));

    let spectra: Vec<Value> = s.singularities.iter().map(|g| json!({ "label": g.label, "spectrum": to_json(&g.spectrum), "leaves": to_json(&g.leaves) })).collect();
    let passed = s.singularities.iter().all(|g| venice_core::cherryplug::is_lorenz_like(&g.spectrum));
    r.record("singularities", "PropA.3", passed, verdict(passed, "every singularity is Lorenz-like", "a singularity is not Lorenz-like"), json!(spectra));

    record_result(&mut r, "dense_periodic_orbits", "LemA.2", s.dense_periodic_check(e.grid_eps, e.n_max), |d| {
        let halves: Vec<Value> = d.halves.iter().map(|h| json!({ "half": h.half, "witnesses": h.witnesses, "covered": h.covered, "nodes_visited": h.nodes_visited })).collect();
        (
            d.passed,
            format!("{} of {} cells covered ({:.2}%)", d.covered, d.witnesses, 100.0 * d.coverage),
            json!({ "grid_eps": d.grid_eps, "n_max": d.n_max, "generation": d.generation, "witnesses": d.witnesses, "covered": d.covered, "coverage": d.coverage, "max_gap": d.max_gap, "periodic_points": d.points.len(), "halves": halves }),
        )
    });

    let t = s.transitivity_witness(e.samples, e.iterations, cfg.seed);
    let (passed, w) = (t.is_non_transitive(), to_json(&t));
    let crossings = t.evidence().map(|ev| ev.half_crossings);
    let tag = if variant == Variant::H { "L1" } else { "G1" };
    r.record("non_transitive", tag, passed, format!("half crossings: {crossings:?}"), w);

    let class_tag = if which == Example::X { "ThmA" } else { "ThmB" };
    record_result(&mut r, "class_structure", class_tag, s.class_structure(e.n, e.eps, &cfg.budget), |v| {
        let want = if which == Example::X { IntersectionStructure::PeriodicOrbit } else { IntersectionStructure::SingularClosure };
        let passed = v.passed && v.intersection_kind == want;
        let i = &v.intersection;
        (
            passed,
            format!("intersection_kind = {}", serde_json::to_value(v.intersection_kind).ok().and_then(|x| x.as_str().map(String::from)).unwrap_or_default()),
            json!({
                "intersection_kind": v.intersection_kind, "n": v.n, "eps": v.eps, "kind": i.kind, "points": i.points.len(),
                "diameter": i.diameter, "contains_p": i.contains_p, "distance_to_p": i.distance_to_p,
                "certificate": to_json(&v.certificate), "traces": to_json(&v.traces),
            }),
        )
    });

    for g in &s.singularities {
        record_result(&mut r, &format!("unstable_in_class.{}", g.label), "PropA.1", s.unstable_in_class(&g.label, e.n, e.eps, &cfg.budget), |u| {
            (u.passed, format!("forward closure within {:.3e} of its class", u.max_distance), to_json(u))
        });
    }

    let orbits = s.section_map.periodic_points_2d(e.audit_period, cfg.tolerances.tol_root);
    record_result(&mut r, "sectional_expansion_audit", "PropA.3", s.sectional_expansion_audit(&orbits, e.audit_period), |a| {
        let worst = a.orbits.iter().min_by(|x, y| (x.rate - x.threshold).total_cmp(&(y.rate - y.threshold)));
        let failed = a.orbits.iter().filter(|o| !o.passed).count();
        (
            a.all_passed,
            format!("{} orbits of period <= {}, minimum rate {:.4}", a.orbits.len(), e.audit_period, a.min_rate),
            json!({ "lambda": a.lambda, "horizon": a.horizon, "orbits": a.orbits.len(), "failed": failed, "min_rate": a.min_rate, "tightest": to_json(&worst) }),
        )
    });

    let mut artifacts = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut orbit = None;
    for _ in 0..16 {
        let start = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..=1.0));
        if let Ok(o) = s.flow_orbit(start, e.flow_returns, f64::INFINITY, cfg.tolerances.tol_root) {
            orbit = Some(o);
            break;
        }
    }
    let stem = name.replace('-', "_");
    if let Some(o) = &orbit {
        artifacts.push(Artifact {
            file: format!("{stem}_flow_orbit.csv"),
            format: Format::Csv,
            contents: o.to_csv(),
        });
        artifacts.push(Artifact {
            file: format!("{stem}_flow_orbit.json"),
            format: Format::Json,
            contents: pretty(o),
        });
    }
    let generation = e.n.min(8);
    let layers: Vec<BoxSet> = s
        .halves
        .iter()
        .filter_map(|&h| s.section_map.attractor_half(h, generation, &cfg.budget).ok())
        .collect();
    let overlay: Vec<Point2> = orbit.iter().flat_map(|o| o.steps.iter().map(|st| st.point)).collect();
    let colours = ["steelblue", "indianred"];
    let refs: Vec<(&BoxSet, &str)> = layers.iter().zip(colours).collect();
    artifacts.push(Artifact {
        file: format!("{stem}_section.svg"),
        format: Format::Svg,
        contents: box_sets_svg(&refs, &overlay, &format!("Section of example {} at n = {generation}", example_name(which))),
    });

    let (report, timings) = r.finish("Venice mask", "not verified");
    Ok(Outcome {
        stem,
        report,
        timings,
        artifacts,
    })
}

fn kinds(rep: &EquilibriumReport) -> Value {
    json!({
        "sources": rep.count(EquilibriumKind::Source),
        "saddles": rep.count(EquilibriumKind::Saddle),
        "sinks": rep.count(EquilibriumKind::Sink),
        "degenerate": rep.count(EquilibriumKind::Degenerate),
        "equilibria": to_json(&rep.equilibria),
    })
}

pub fn plug(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let p = &cfg.plug;
    let params = json!({ "plug": to_json(p), "field": to_json(&cfg.field) });
    let mut r = ReportBuilder::new("plug", cfg.seed, params);
    let unperturbed = PlanarField {
        r_u: cfg.field.support_radius,
        ..PlanarField::cherry(cfg.field.base)
    };
    let field = cfg.plug_field()?;

    let before = record_result(&mut r, "cherry_configuration", "X1-X3", equilibria(&unperturbed, p.grid_n, EQ_TOL), |rep| {
        let passed = rep.equilibria.len() == 2 && rep.count(EquilibriumKind::Saddle) == 1 && rep.count(EquilibriumKind::Sink) == 1;
        (passed, verdict(passed, "one saddle and one sink", "unexpected equilibria"), kinds(rep))
    });

    let after = record_result(&mut r, "source_conversion", "X1-X3", equilibria(&field, p.grid_n, EQ_TOL), |rep| {
        let passed = rep.equilibria.len() == 4
            && rep.count(EquilibriumKind::Source) == 1
            && rep.count(EquilibriumKind::Saddle) == 2
            && rep.count(EquilibriumKind::Sink) == 1;
        (
            passed,
            format!("{} equilibria at τ = {}: {}", rep.equilibria.len(), p.tau, verdict(passed, "source, two saddles and a sink", "σ is not converted to a source")),
            kinds(rep),
        )
    });

    let mut paths = Vec::new();
    match &after {
        Some(rep) => {
            let products = productize(rep, p.lambda_ss)?;
            let passed = products.len() == 2 && products.iter().all(|s| s.lorenz_like);
            r.record(
                "lorenz_like_products",
                "X1-X3",
                passed,
                format!("{} product saddles, all Lorenz-like: {}", products.len(), products.iter().all(|s| s.lorenz_like)),
                to_json(&products),
            );
            let disk = SectionDisk::around_sink(&cfg.field.base);
            record_result(&mut r, "separatrix_targets", "X1-X3", separatrix_targets(&field, rep, &disk, &OdeOptions::default()), |t| {
                let hits: Vec<Value> = t.hits.iter().map(|h| json!({ "label": h.label, "saddle": h.saddle, "hit": h.hit, "time": h.time, "component": h.component })).collect();
                (
                    t.one_per_component,
                    verdict(t.one_per_component, "one unstable branch in each component of the section", "separatrices do not split the section"),
                    json!({ "p0": t.p0, "hits": hits, "one_per_component": t.one_per_component }),
                )
            })
            .map(|t| paths.extend(t.hits.into_iter().map(|h| h.path)));
        }
        None => {
            r.record("lorenz_like_products", "X1-X3", false, "not computed", json!(null));
            r.record("separatrix_targets", "X1-X3", false, "not computed", json!(null));
        }
    }

    let mut artifacts = Vec::new();
    for (file, f, rep, paths, title) in [
        ("plug_before.svg", &unperturbed, &before, Vec::new(), "Cherry field".to_string()),
        ("plug_after.svg", &field, &after, paths, format!("DA perturbation at τ = {}", p.tau)),
    ] {
        let eq = rep.as_ref().map_or(&[][..], |x| &x.equilibria[..]);
        artifacts.push(Artifact {
            file: file.into(),
            format: Format::Svg,
            contents: phase_portrait_svg(f, eq, &paths, p.portrait_grid, &title),
        });
    }
    artifacts.push(Artifact {
        file: "plug_equilibria.json".into(),
        format: Format::Json,
        contents: pretty(&json!({ "before": to_json(&before), "after": to_json(&after) })),
    });

    let (report, timings) = r.finish("plug verified", "plug not verified");
    Ok(Outcome {
        stem: "plug".into(),
        report,
        timings,
        artifacts,
    })
}

/// Report files the other commands write.
pub const REPORT_FILES: &[&str] = &[
    "verify_1d.json",
    "classes_g.json",
    "classes_h.json",
    "example_x.json",
    "example_y.json",
    "example_one_singularity.json",
    "plug.json",
];

pub fn summary(cfg: &RunConfig, out: &Path) -> anyhow::Result<Outcome> {
    let mut r = ReportBuilder::new("report", cfg.seed, json!({ "expected": REPORT_FILES }));
    let mut found = 0;
    for file in REPORT_FILES {
        let path = out.join(file);
        if !path.exists() {
            continue;
        }
        found += 1;
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let checks = v["checks"].as_array().cloned().unwrap_or_default();
        let tags: BTreeSet<&str> = checks.iter().filter_map(|c| c["tag"].as_str()).collect();
        let failed: Vec<&str> = checks.iter().filter(|c| c["passed"] == json!(false)).filter_map(|c| c["name"].as_str()).collect();
        let passed = v["passed"] == json!(true) && failed.is_empty();
        r.record(
            file,
            &tags.into_iter().collect::<Vec<_>>().join(","),
            passed,
            v["verdict"].as_str().unwrap_or("missing verdict"),
            json!({ "command": v["command"], "checks": checks.len(), "failed": failed }),
        );
    }
    if found == 0 {
        bail!("no reports found in {}", out.display());
    }
    let (report, timings) = r.finish("all reports pass", "some reports fail");
    Ok(Outcome {
        stem: "summary".into(),
        report,
        timings,
        artifacts: Vec::new(),
    })
}
