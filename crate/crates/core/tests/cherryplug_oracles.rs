//! Plug oracles: saddle positions and eigenvalues in closed form, the
//! logistic separatrix, and an independent fixed-step RK4 trace.

use venice_core::cherryplug::{
    cutoff, equilibria, is_lorenz_like, p0, productize, separatrix_targets, CherryField, Component, DaFamily,
    EquilibriumKind, PlanarField, SectionDisk, VectorField2,
};
use venice_core::ode::OdeOptions;
use venice_core::Point2;

const TAU: f64 = 0.75;

/// The saddles of the perturbed field sit at `(0, ±r·s)` where
/// `λs + τ·cutoff(s) = 0`, i.e. `1 - 1/(1 - s²) = ln(-λs/τ)`.
fn analytic_saddle_height(base: &CherryField, r: f64) -> f64 {
    let l = (-base.lambda_s / TAU).ln();
    r * (1.0 - 1.0 / (1.0 - l)).sqrt()
}

#[test]
fn perturbed_saddles_match_closed_form() {
    let base = CherryField::default();
    let fam = DaFamily::new(base);
    let f = fam.perturb(TAU).unwrap();
    let rep = equilibria(&f, 64, 1e-12).unwrap();
    let h = analytic_saddle_height(&base, fam.r_u);
    let saddles: Vec<_> = rep.equilibria.iter().filter(|e| e.kind == EquilibriumKind::Saddle).collect();
    assert_eq!(saddles.len(), 2);
    for e in saddles {
        assert!(e.position.x.abs() <= 1e-10);
        assert!((e.position.y.abs() - h).abs() <= 1e-9, "{:?} vs ±{h}", e.position);
        // ∂ẏ/∂y = τ·y·w'(y) on the zero set, with w = cutoff(|y|/r)
        let s = h / fam.r_u;
        let w = cutoff(s);
        let dw = w * (-2.0 * s / (1.0 - s * s).powi(2)) / fam.r_u;
        let contracting = TAU * h * dw;
        assert!((e.eigenvalues[0] - contracting).abs() <= 1e-6);
        assert!((e.eigenvalues[1] - base.lambda_u).abs() <= 1e-6);
    }
    let src = rep.equilibria.iter().find(|e| e.kind == EquilibriumKind::Source).unwrap();
    assert!(src.position.dist(&Point2::new(0.0, 0.0)) <= 1e-10);
    assert!((src.eigenvalues[0] - (base.lambda_s + TAU)).abs() <= 1e-6);
    assert_eq!(rep.count(EquilibriumKind::Sink), 1);
}

#[test]
fn product_saddles_are_lorenz_like() {
    let f = DaFamily::new(CherryField::default()).perturb(TAU).unwrap();
    let rep = equilibria(&f, 64, 1e-12).unwrap();
    let prod = productize(&rep, -10.0).unwrap();
    assert_eq!(prod.iter().map(|p| p.label.as_str()).collect::<Vec<_>>(), ["σ1", "σ2"]);
    assert!(prod.iter().all(|p| p.lorenz_like && is_lorenz_like(&p.spectrum)));
    assert!(productize(&rep, 1.0).is_err());
}

#[test]
fn no_source_below_threshold() {
    let fam = DaFamily::new(CherryField::default());
    for t in [0.0, 0.25, 0.45] {
        let rep = equilibria(&fam.perturb(t).unwrap(), 64, 1e-12).unwrap();
        assert_eq!(rep.count(EquilibriumKind::Source), 0, "t = {t}");
    }
    assert_eq!(fam.source_threshold(), 0.5);
}

#[test]
fn unperturbed_separatrix_follows_the_logistic_solution() {
    let base = CherryField::default();
    let disk = SectionDisk::around_sink(&base);
    let hit = p0(&base, &disk, &OdeOptions::default()).unwrap();
    assert!(hit.dist(&Point2::new(base.sink_x - disk.radius, 0.0)) <= 1e-7);
}

fn rk4_until_disk(f: &dyn VectorField2, mut p: Point2, disk: &SectionDisk, h: f64) -> Point2 {
    let add = |p: Point2, k: [f64; 2], s: f64| Point2::new(p.x + s * k[0], p.y + s * k[1]);
    for _ in 0..10_000_000 {
        let k1 = f.eval(p);
        let k2 = f.eval(add(p, k1, 0.5 * h));
        let k3 = f.eval(add(p, k2, 0.5 * h));
        let k4 = f.eval(add(p, k3, h));
        let q = Point2::new(
            p.x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p.y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        );
        if q.dist(&disk.center) <= disk.radius {
            // linear interpolation onto the circle
            let (a, b) = (p.dist(&disk.center) - disk.radius, disk.radius - q.dist(&disk.center));
            let s = a / (a + b);
            return Point2::new(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y));
        }
        p = q;
    }
    panic!("no crossing");
}

#[test]
fn separatrix_hits_match_fixed_step_rk4() {
    let base = CherryField::default();
    let f: PlanarField = DaFamily::new(base).perturb(TAU).unwrap();
    let rep = equilibria(&f, 64, 1e-12).unwrap();
    let disk = SectionDisk::around_sink(&base);
    let t = separatrix_targets(&f, &rep, &disk, &OdeOptions::default()).unwrap();
    assert!(t.one_per_component);
    assert_eq!(t.hits.iter().filter(|h| h.component == Component::Left).count(), 1);
    for hit in &t.hits {
        // unstable direction of the saddles is the x axis
        let start = Point2::new(hit.saddle.x + 1e-6, hit.saddle.y);
        let oracle = rk4_until_disk(&f, start, &disk, 1e-3);
        assert!(hit.hit.dist(&oracle) <= 1e-5, "{} {:?} vs {:?}", hit.label, hit.hit, oracle);
    }
}

#[test]
fn equilibrium_set_is_stable_under_grid_refinement() {
    let f = DaFamily::new(CherryField::default()).perturb(TAU).unwrap();
    let a = equilibria(&f, 64, 1e-12).unwrap();
    let b = equilibria(&f, 128, 1e-12).unwrap();
    assert_eq!(a.equilibria.len(), b.equilibria.len());
    for (x, y) in a.equilibria.iter().zip(&b.equilibria) {
        assert!(x.position.dist(&y.position) <= 1e-10);
        assert_eq!(x.kind, y.kind);
    }
}
