//! The ten acceptance criteria, one PASS/FAIL line each, at their stated
//! tolerances and runtime limits. Criteria 6, 7 and 10 drive the binary.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use venice_core::branched1d::{covering_radius, verify_arclength_eps, ArcLengthBudget};
use venice_core::cherryplug::{
    equilibria, productize, separatrix_targets, CherryField, Component, DaFamily, EquilibriumKind, PlanarField,
    SectionDisk,
};
use venice_core::ode::OdeOptions;
use venice_core::suspension::{Example, IntersectionStructure, SingularSuspension};
use venice_core::{BoxBudget, BranchedIntervalMap, Interval, Point2, SkewReturnMap, Tolerances};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn maps() -> [(&'static str, BranchedIntervalMap); 3] {
    [
        ("f", BranchedIntervalMap::standard()),
        ("f+", BranchedIntervalMap::standard_plus()),
        ("f-", BranchedIntervalMap::standard_minus()),
    ]
}

fn hypothesis_suite() -> Outcome {
    let tol = Tolerances {
        tol_lim: 1e-9,
        ..Tolerances::default()
    };
    for (name, m) in maps() {
        let rep = m.verify_hypotheses(&tol);
        for tag in ["H1", "H2", "H3", "H4", "H5"] {
            let c = rep.check(tag).ok_or(format!("{name}: no {tag} record"))?;
            ensure(rep.checks.iter().filter(|c| c.tag == tag).all(|c| c.passed), format!("{name} {tag}: {}", c.detail))?;
        }
    }
    let budget = ArcLengthBudget::new(0.05, 1e-8);
    let base = BranchedIntervalMap::standard();
    let mut deltas = Vec::new();
    for (m, b) in [(BranchedIntervalMap::standard_plus(), base.clone()), (BranchedIntervalMap::standard_minus(), base.reflect())] {
        let a = verify_arclength_eps(&b, &m, &budget).map_err(|e| e.to_string())?;
        ensure(a.passed, "arc-length sandwich fails")?;
        for s in &a.segments {
            ensure(s.base < s.modified && s.modified < s.base + 0.05, format!("segment {:?}", s.segment))?;
            deltas.push(s.delta());
        }
    }
    Ok(format!("f, f+, f- satisfy H1-H5; arc-length increases {deltas:.4?} < 0.05"))
}

fn leo_desk_scale() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = (0, 0.0f64);
    for (name, m) in maps() {
        for _ in 0..100 {
            let len = rng.gen_range(1e-3..=0.1);
            let lo = rng.gen_range(0.0..=1.0 - len);
            let (a, b) = (m.to_external(lo), m.to_external(lo + len));
            let i = Interval::open(a.min(b), a.max(b));
            let r = m.leo_check(&i, 40, 1e-6);
            let k = r.m.ok_or(format!("{name}: {i:?} not onto after 40 iterates, gap {}", r.gap))?;
            ensure(r.gap <= 1e-6, format!("{name}: gap {}", r.gap))?;
            worst = (worst.0.max(k), worst.1.max(r.gap));
        }
    }
    Ok(format!("300 intervals onto with m <= {}, gap <= {:.1e}", worst.0, worst.1))
}

fn density() -> Outcome {
    let f = BranchedIntervalMap::standard();
    let targets: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let net = f.periodic_net(20, 0.005, &targets, 1e-10);
    let mut xs: Vec<f64> = net.points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    let r_per = covering_radius(&xs, 0.0, 1.0);
    ensure(net.points.iter().all(|p| p.period <= 20), "period above 20")?;
    for p in &net.points {
        let mut y = p.x;
        for d in &p.itinerary {
            ensure(f.eval_with_branch(y).map(|(_, k)| k as u8) == Ok(*d), "itinerary mismatch")?;
            y = f.eval(y).map_err(|e| e.to_string())?;
        }
        ensure((y - p.x).abs() <= 1e-8 || p.identified, format!("{} does not close", p.x))?;
    }
    ensure(r_per <= 0.01, format!("periodic covering radius {r_per}"))?;
    let pre = f.preimage_tree(0.3, 15);
    let r_pre = covering_radius(&pre, 0.0, 1.0);
    ensure(r_pre <= 0.01, format!("preimage covering radius {r_pre}"))?;
    Ok(format!("period <= 20 radius {r_per:.2e}; 15 preimage levels radius {r_pre:.2e}"))
}

fn class_structure_h() -> Outcome {
    let h = SkewReturnMap::default_h();
    let r = h.class_intersection(12, 0.01, &BoxBudget::default()).map_err(|e| e.to_string())?;
    let bound = 2.0 * 3f64.powi(-12) + 1e-2;
    ensure(r.diameter <= bound, format!("diameter {} above {bound}", r.diameter))?;
    ensure(r.contains_p, "P not contained")?;
    let p = h.fixed_point_p();
    let d = p.dist(&Point2::new(0.0, 0.5));
    ensure(d <= 1e-10, format!("|P - (0, 0.5)| = {d}"))?;
    Ok(format!("diameter {:.3e} <= {bound:.3e}, |P - (0, 0.5)| = {d:.1e}", r.diameter))
}

fn class_structure_g() -> Outcome {
    let y = SingularSuspension::build_example(Example::Y).map_err(|e| e.to_string())?;
    let v = y.class_structure(12, 0.01, &BoxBudget::default()).map_err(|e| e.to_string())?;
    let i = &v.intersection;
    ensure(i.contains_p, "P not contained")?;
    ensure(i.diameter >= 0.1, format!("diameter {}", i.diameter))?;
    let h = v.traces.iter().map(|t| t.hausdorff).fold(0.0, f64::max);
    ensure(!v.traces.is_empty() && h <= 1e-2, format!("trace Hausdorff {h}"))?;
    ensure(v.intersection_kind == IntersectionStructure::SingularClosure, "not a singular closure")?;
    Ok(format!("diameter {:.3}, Hausdorff to traces {h:.2e}", i.diameter))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_venice"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "killed".to_string())
}

fn load(dir: &Path, stem: &str) -> Result<Value, String> {
    let text = std::fs::read_to_string(dir.join(format!("{stem}.json"))).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn record<'a>(r: &'a Value, name: &str) -> Result<&'a Value, String> {
    r["checks"]
        .as_array()
        .and_then(|a| a.iter().find(|c| c["name"] == name))
        .ok_or(format!("no record {name}"))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// Density at grid_eps 0.01 and n_max 20, and non-transitivity over 10⁴ × 10³.
fn example_common(r: &Value) -> Result<(), String> {
    ensure(r["verdict"] == "Venice mask", format!("verdict {}", r["verdict"]))?;
    let d = &record(r, "dense_periodic_orbits")?["witness"];
    ensure(f(&d["grid_eps"]) == 0.01 && d["n_max"] == 20, "density parameters")?;
    ensure(f(&d["coverage"]) == 1.0 && d["covered"] == d["witnesses"], format!("coverage {}", d["coverage"]))?;
    let t = &record(r, "non_transitive")?["witness"];
    ensure(t["verdict"] == "non_transitive", "not non-transitive")?;
    ensure(t["samples"] == 10_000 && t["iterations"] == 1_000, "transitivity budget")?;
    ensure(t["half_crossings"] == 0 && t["invariance_certificate"] == true, "half crossings or certificate")
}

fn example_x_verdict(dir: &Path) -> Outcome {
    let code = run_cli(dir, &["example", "--which", "X"])?;
    ensure(code == 0, format!("exit code {code}"))?;
    let r = load(dir, "example_x")?;
    example_common(&r)?;
    let cert = &record(&r, "section_map.half_invariance")?["witness"];
    ensure(cert["certificate"] == true && cert["half_crossings"] == 0, "L1 branch certificate")?;
    let c = &record(&r, "class_structure")?["witness"];
    ensure(c["intersection_kind"] == "periodic_orbit", format!("kind {}", c["intersection_kind"]))?;
    let (fm, bm) = (f(&c["certificate"]["fiber_multiplier"]), f(&c["certificate"]["base_multiplier"]));
    ensure(c["certificate"]["period"] == 1 && (fm - 1.0 / 3.0).abs() <= 1e-15 && fm < 1.0 && 1.0 < bm.abs(), "saddle multipliers")?;
    Ok(format!("coverage 100%, 0 half crossings, periodic orbit with multipliers {fm:.4} < 1 < {bm}"))
}

fn example_y_verdict(dir: &Path) -> Outcome {
    let code = run_cli(dir, &["example", "--which", "Y"])?;
    ensure(code == 0, format!("exit code {code}"))?;
    let r = load(dir, "example_y")?;
    example_common(&r)?;
    let c = &record(&r, "class_structure")?["witness"];
    ensure(c["intersection_kind"] == "singular_closure", format!("kind {}", c["intersection_kind"]))?;
    let traces = c["traces"].as_array().ok_or("no traces")?;
    for label in ["σ1", "σ2"] {
        let t = traces
            .iter()
            .find(|t| t["labels"].as_array().is_some_and(|l| l.len() == 1 && l[0] == label))
            .ok_or(format!("no trace of {label}"))?;
        ensure(f(&t["hausdorff"]) <= 1e-2, format!("{label} Hausdorff {}", t["hausdorff"]))?;
    }
    let joint = traces.iter().map(|t| f(&t["hausdorff"])).fold(0.0, f64::max);
    for (label, half) in [("σ1", "plus"), ("σ2", "minus")] {
        let u = record(&r, &format!("unstable_in_class.{label}"))?;
        ensure(u["passed"] == true && u["witness"]["halves"] == serde_json::json!([half]), format!("{label} not in A {half}"))?;
    }
    Ok(format!("coverage 100%, 0 half crossings, singular closure with Hausdorff <= {joint:.2e}, W^u(σ1) in A+, W^u(σ2) in A-"))
}

fn plug_pipeline() -> Outcome {
    let base = CherryField::default();
    let before = equilibria(&PlanarField::cherry(base), 64, 1e-12).map_err(|e| e.to_string())?;
    ensure(
        before.equilibria.len() == 2 && before.count(EquilibriumKind::Saddle) == 1 && before.count(EquilibriumKind::Sink) == 1,
        "Cherry field is not {saddle, sink}",
    )?;
    let fam = DaFamily::new(base);
    let field = fam.perturb(DaFamily::DEFAULT_TAU).map_err(|e| e.to_string())?;
    let after = equilibria(&field, 64, 1e-12).map_err(|e| e.to_string())?;
    ensure(after.equilibria.len() == 4, format!("{} equilibria", after.equilibria.len()))?;
    let src = after.equilibria.iter().find(|e| e.kind == EquilibriumKind::Source).ok_or("no source")?;
    ensure(src.position.dist(&Point2::new(0.0, 0.0)) <= 1e-10, "source is not σ")?;
    ensure(after.count(EquilibriumKind::Saddle) == 2 && after.count(EquilibriumKind::Sink) == 1, "saddles or sink missing")?;
    let sink = after.equilibria.iter().find(|e| e.kind == EquilibriumKind::Sink).ok_or("no sink")?;
    ensure(sink.position.dist(&base.sink()) <= 1e-10, "sink moved")?;
    let prod = productize(&after, -10.0).map_err(|e| e.to_string())?;
    let labels: Vec<&str> = prod.iter().map(|p| p.label.as_str()).collect();
    ensure(labels == ["σ1", "σ2"] && prod.iter().all(|p| p.lorenz_like), "products not Lorenz-like")?;
    for p in &prod {
        let s = p.spectrum;
        ensure(s.lambda_ss < s.lambda_s && s.lambda_s < 0.0 && -s.lambda_s < s.lambda_u, format!("{} spectrum", p.label))?;
    }
    let disk = SectionDisk::around_sink(&base);
    let t = separatrix_targets(&field, &after, &disk, &OdeOptions::default()).map_err(|e| e.to_string())?;
    let left = t.hits.iter().filter(|h| h.component == Component::Left).count();
    let right = t.hits.iter().filter(|h| h.component == Component::Right).count();
    ensure(t.one_per_component && left == 1 && right == 1, "separatrices do not split I0 \\ {p0}")?;
    Ok("{saddle, sink} -> {source σ, σ1, σ2, sink}; σ1, σ2 Lorenz-like; one branch per component".into())
}

fn audit() -> Outcome {
    let mut summary = Vec::new();
    for which in [Example::X, Example::Y] {
        let s = SingularSuspension::build_example(which).map_err(|e| e.to_string())?;
        let orbits = s.section_map.periodic_points_2d(10, 1e-10);
        ensure(orbits.iter().any(|q| q.period == 10), "no orbit of period 10")?;
        let a = s.sectional_expansion_audit(&orbits, 10).map_err(|e| e.to_string())?;
        ensure(a.lambda >= 1.2, format!("λ = {}", a.lambda))?;
        for (q, o) in orbits.iter().zip(&a.orbits) {
            let bound = 1.2f64.ln() / o.max_ceiling;
            ensure(o.rate > 0.0 && o.rate >= bound, format!("rate {} < {bound} at {q:?}", o.rate))?;
            ensure(o.fiber_multiplier.abs() <= (1.0f64 / 3.0).powi(q.period as i32) * (1.0 + 1e-12), "fiber multiplier")?;
        }
        summary.push(format!("{which:?}: {} orbits, min rate {:.4}", a.orbits.len(), a.min_rate));
    }
    Ok(summary.join("; "))
}

fn determinism(dir: &Path) -> Outcome {
    let (a, b) = (dir.join("a"), dir.join("b"));
    let cmds: [(&[&str], &str); 4] = [
        (&["verify-1d"], "verify_1d"),
        (&["classes", "--variant", "H"], "classes_h"),
        (&["plug"], "plug"),
        (&["report"], "summary"),
    ];
    for (args, stem) in cmds {
        for (d, w) in [(&a, "1"), (&b, "4")] {
            let mut all = args.to_vec();
            all.extend(["--workers", w, "--seed", "17"]);
            let code = run_cli(d, &all)?;
            ensure(code == 0, format!("{stem}: exit {code}"))?;
        }
        for file in std::fs::read_dir(&a).map_err(|e| e.to_string())? {
            let name = file.map_err(|e| e.to_string())?.file_name().into_string().unwrap_or_default();
            if !name.ends_with(".json") || name.ends_with(".timings.json") {
                continue;
            }
            let x = std::fs::read(a.join(&name)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.join(&name)).map_err(|e| e.to_string())?;
            ensure(x == y, format!("{name} differs between runs"))?;
        }
    }
    Ok("verify-1d, classes H, plug and report JSON byte-identical across runs with 1 and 4 workers".into())
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let owned = |name: &str| {
        let d = tmp.path().join(name);
        std::fs::create_dir_all(&d).expect("scratch directory");
        d
    };
    let (dx, dy, dd) = (owned("x"), owned("y"), owned("det"));
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Outcome>)> = vec![
        ("hypothesis suite", 5, Box::new(hypothesis_suite)),
        ("leo at desk scale", 30, Box::new(leo_desk_scale)),
        ("density", 60, Box::new(density)),
        ("class structure H", 60, Box::new(class_structure_h)),
        ("class structure G", 120, Box::new(class_structure_g)),
        ("example X verdict", 600, Box::new(move || example_x_verdict(&dx))),
        ("example Y verdict", 600, Box::new(move || example_y_verdict(&dy))),
        ("plug pipeline", 30, Box::new(plug_pipeline)),
        ("sectional-expansion audit", 60, Box::new(audit)),
        ("determinism", 600, Box::new(move || determinism(&dd))),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (ok, msg) = match result {
            Ok(m) if in_time => (true, m),
            Ok(m) => (false, format!("{m}; over the {limit} s limit")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {:>2} {name} ({:.1} s / {limit} s): {msg}",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
