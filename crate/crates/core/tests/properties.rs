//! Property tests for the structural invariants of every module.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use venice_core::cherryplug::{eigen2, is_lorenz_like, jacobian_fd, CherryField, DaFamily, SingularitySpectrum, VectorField2};
use venice_core::skew2d::{BoxBudget, Half, IntersectionKind, SkewReturnMap};
use venice_core::suspension::{Example, SingularSuspension};
use venice_core::{BranchedIntervalMap, Interval, IntervalSet, Point2, Tolerances};

fn bumped(a1: f64, a2: f64) -> BranchedIntervalMap {
    BranchedIntervalMap::standard().with_bumps(a1, a2)
}

fn amplitudes() -> impl Strategy<Value = (f64, f64)> {
    (0.0..0.4f64, 0.0..0.08f64)
}

fn interval_strategy() -> impl Strategy<Value = Interval> {
    (-2.0..2.0f64, 0.0..1.0f64, any::<bool>(), any::<bool>())
        .prop_map(|(lo, len, a, b)| Interval::new(lo, lo + len, a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn branch_images_are_the_four_fixed_images((a1, a2) in amplitudes()) {
        let f = bumped(a1, a2);
        prop_assume!(f.verify_hypotheses(&Tolerances::default()).all_passed());
        let want = [
            Interval::closed(0.0, 1.0),
            Interval::open(0.0, 0.4),
            Interval::open_closed(0.0, 1.0),
            Interval::closed_open(0.16, 0.4),
        ];
        for (br, w) in f.branches.iter().zip(want) {
            let img = f.image_of_interval(&br.domain).unwrap();
            prop_assert_eq!(img.len(), 1);
            let got = img.parts()[0];
            prop_assert!(got.approx_eq(&w, 1e-12), "{} vs {}", got, w);
        }
    }

    #[test]
    fn leo_steps_down_along_the_image(a in 0.0..0.95f64, len in 1e-3..0.05f64) {
        let f = BranchedIntervalMap::standard();
        let i = Interval::open(a, a + len);
        let r = f.leo_check(&i, 40, 1e-6);
        let m = r.m.expect("leo holds for the default map");
        prop_assume!(m >= 1);
        let image = f.image_of_interval(&i).unwrap();
        let next = f.leo_check_set(&image, m - 1, 1e-6);
        prop_assert!(next.m.is_some_and(|k| k <= m - 1), "{:?} after m = {}", next, m);
    }

    #[test]
    fn periodic_points_solve_the_cycle_equation((a1, a2) in amplitudes()) {
        let f = bumped(a1, a2);
        let tol_root = 1e-10;
        for p in f.periodic_points(6, tol_root) {
            let (mut y, mut d) = (p.x, 1.0);
            for _ in 0..p.period {
                d *= f.derivative(y).unwrap();
                y = f.eval(y).unwrap();
            }
            prop_assert!((y - p.x).abs() <= 4.0 * tol_root * d.abs().max(1.0), "{:?}", p);
        }
    }

    #[test]
    fn preimage_trees_grow_with_depth(x in 0.0..=1.0f64, k in 1usize..7) {
        let f = BranchedIntervalMap::standard_plus();
        let small = f.preimage_tree(x, k);
        let big = f.preimage_tree(x, k + 1);
        for y in &small {
            let pos = big.partition_point(|z| z < y);
            prop_assert!(big.get(pos) == Some(y), "{} lost at depth {}", y, k + 1);
        }
    }

    #[test]
    fn branches_are_strictly_monotone((a1, a2) in amplitudes(), reflect in any::<bool>()) {
        let mut f = bumped(a1, a2);
        prop_assume!(f.verify_hypotheses(&Tolerances::default()).all_passed());
        if reflect {
            f = f.reflect();
        }
        prop_assert!(f.branches_strictly_monotone(512));
        for br in &f.branches {
            let (lo, hi) = (br.domain.lo, br.domain.hi);
            let xs: Vec<f64> = (1..200).map(|i| f.to_external(lo + (hi - lo) * i as f64 / 200.0)).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| f.eval(x).unwrap()).collect();
            let up = ys.windows(2).all(|w| w[0] < w[1]);
            let down = ys.windows(2).all(|w| w[0] > w[1]);
            prop_assert!(up || down);
        }
    }

    #[test]
    fn reflection_is_an_involution((a1, a2) in amplitudes(), x in 0.0..=1.0f64) {
        let f = bumped(a1, a2);
        let r = f.reflect();
        prop_assert_eq!(&r.reflect(), &f);
        match (f.eval(x), r.eval(-x)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(b, -a),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn ini_round_trip_is_exact((a1, a2) in amplitudes(), reflect in any::<bool>()) {
        let mut f = bumped(a1, a2);
        if reflect {
            f = f.reflect();
        }
        let text = f.to_ini_string("map");
        prop_assert_eq!(BranchedIntervalMap::from_ini_str(&text, "map").unwrap(), f);
    }

    #[test]
    fn interval_sets_are_normalized(parts in prop::collection::vec(interval_strategy(), 0..8), probes in prop::collection::vec(-2.5..3.5f64, 32)) {
        let set = IntervalSet::new(parts.clone());
        for w in set.parts().windows(2) {
            let disjoint = w[0].hi < w[1].lo || (w[0].hi == w[1].lo && !w[0].hi_closed && !w[1].lo_closed);
            prop_assert!(disjoint, "{} and {} should have merged", w[0], w[1]);
        }
        prop_assert!(set.parts().iter().all(|p| !p.is_empty()));
        let endpoints = parts.iter().flat_map(|p| [p.lo, p.hi]);
        for x in probes.iter().copied().chain(endpoints) {
            prop_assert_eq!(set.contains(x), parts.iter().any(|p| p.contains(x)), "at {}", x);
        }
        prop_assert_eq!(IntervalSet::new(set.parts().to_vec()), set);
    }

    #[test]
    fn leaf_coordinate_ignores_the_fiber(x in -1.0..=1.0f64, y1 in 0.0..=1.0f64, y2 in 0.0..=1.0f64) {
        for m in [SkewReturnMap::default_g(), SkewReturnMap::default_h()] {
            match (m.apply(Point2::new(x, y1)), m.apply(Point2::new(x, y2))) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.x, b.x),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn fibers_contract_by_mu(x in -1.0..=1.0f64, y1 in 0.0..=1.0f64, y2 in 0.0..=1.0f64, k in 1usize..12) {
        let h = SkewReturnMap::default_h();
        let (mut p, mut q) = (Point2::new(x, y1), Point2::new(x, y2));
        for _ in 0..k {
            match (h.apply(p), h.apply(q)) {
                (Ok(a), Ok(b)) => (p, q) = (a, b),
                _ => return Ok(()),
            }
        }
        prop_assert!((p.y - q.y).abs() <= h.mu.powi(k as i32) * (y1 - y2).abs() + 1e-15);
    }

    #[test]
    fn g_commutes_with_theta(x in -1.0..=1.0f64, y in 0.0..=1.0f64) {
        let g = SkewReturnMap::default_g();
        let p = Point2::new(x, y);
        if let (Ok(a), Ok(b)) = (g.apply(SkewReturnMap::theta(p)), g.apply(p)) {
            let b = SkewReturnMap::theta(b);
            prop_assert!(a.dist(&b) <= 1e-12);
        }
    }

    #[test]
    fn perturbation_is_supported_near_the_saddle(t in 0.0..2.0f64, x in -1.0..=1.0f64, y in -1.0..=1.0f64) {
        let fam = DaFamily::new(CherryField::default());
        let f = fam.perturb(t).unwrap();
        let p = Point2::new(x, y);
        if !f.in_support(p) {
            prop_assert_eq!(f.eval(p), fam.base.eval(p));
        }
    }

    #[test]
    fn lorenz_like_is_scale_invariant(ss in -50.0..5.0f64, s in -5.0..5.0f64, u in -5.0..5.0f64, c in 1e-3..1e3f64) {
        let a = SingularitySpectrum::new(ss, s, u);
        let b = SingularitySpectrum::new(c * ss, c * s, c * u);
        prop_assert_eq!(is_lorenz_like(&a), is_lorenz_like(&b));
    }

    #[test]
    fn fd_jacobian_matches_analytic(x in -1.0..=1.0f64, y in -1.0..=1.0f64) {
        let base = CherryField::default();
        let p = Point2::new(x, y);
        let (fd, _) = eigen2(&jacobian_fd(&base, p, 1e-6));
        let (an, _) = eigen2(&base.analytic_jacobian(p));
        for (a, b) in fd.iter().zip(&an) {
            prop_assert!((a - b).abs() <= 1e-6, "{:?} vs {:?}", fd, an);
        }
    }

    #[test]
    fn ceiling_is_positive_off_the_singular_leaves(x in -1.0..=1.0f64, y in 0.0..=1.0f64) {
        let s = SingularSuspension::build_example(Example::Y).unwrap();
        let c = s.ceiling(Point2::new(x, y));
        prop_assert!(c >= 1.0);
        prop_assert!(c.is_finite() || x == 0.5 || x == -0.5);
    }
}

#[test]
fn g_equivariance_on_a_grid() {
    let g = SkewReturnMap::default_g();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let p = Point2::new(-1.0 + 2.0 * (i as f64 + 0.5) / 100.0, j as f64 / 99.0);
            let a = g.apply(SkewReturnMap::theta(p)).unwrap();
            let b = SkewReturnMap::theta(g.apply(p).unwrap());
            worst = worst.max(a.dist(&b));
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn h_halves_are_forward_invariant() {
    let h = SkewReturnMap::default_h();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for half in Half::BOTH {
        let d = h.singular_leaf(half);
        let mut n = 0;
        while n < 10_000 {
            let x = half.sign() * rng.gen_range(0.0..=1.0);
            if x == d {
                continue;
            }
            let q = h.apply(Point2::new(x, rng.gen_range(0.0..=1.0))).unwrap();
            assert!(half.sign() * q.x >= 0.0, "{x} left {half:?}");
            n += 1;
        }
    }
}

#[test]
fn generations_are_nested_for_both_variants() {
    for m in [SkewReturnMap::default_g(), SkewReturnMap::default_h()] {
        for half in Half::BOTH {
            let gens = m.attractor_generations(half, 7, &BoxBudget::default()).unwrap();
            for w in gens.windows(2) {
                assert!(w[1].is_nested_in(&w[0], 1e-12));
                assert!(w[1].max_fiber_width() <= m.mu * w[0].max_fiber_width() + 1e-15);
            }
        }
    }
}

#[test]
fn every_lifted_cycle_is_a_saddle() {
    for m in [SkewReturnMap::default_g(), SkewReturnMap::default_h()] {
        let pts = m.periodic_points_2d(7, 1e-12);
        assert!(pts.len() > 1000);
        for q in &pts {
            assert!(q.is_saddle(), "{q:?}");
            assert!(m.fiber_residual(q) <= 1e-12);
        }
    }
}

#[test]
fn h_intersection_diameter_is_monotone() {
    let h = SkewReturnMap::default_h();
    let mut last = f64::INFINITY;
    for n in 4..=14 {
        let r = h.class_intersection(n, 4.0 * h.mu.powi(n as i32), &BoxBudget::default()).unwrap();
        assert_eq!(r.kind, IntersectionKind::Point);
        assert!(r.diameter <= last, "n = {n}: {} > {last}", r.diameter);
        last = r.diameter;
    }
}

#[test]
fn audit_ignores_cycle_rotation() {
    let s = SingularSuspension::build_example(Example::X).unwrap();
    for q in s.section_map.periodic_points_2d(7, 1e-12).iter().filter(|q| q.period > 2).step_by(53) {
        let m = s.section_map.half_map(q.half);
        let mut cycle = Vec::with_capacity(q.period);
        let mut y = q.leaf;
        for _ in 0..q.period {
            cycle.push((y, m.derivative(y).unwrap()));
            y = m.eval(y).unwrap();
        }
        let base = s.audit_cycle(q.half, &cycle, q.fiber, q.period);
        for r in 1..q.period {
            let mut c = cycle.clone();
            c.rotate_left(r);
            let a = s.audit_cycle(q.half, &c, q.fiber, q.period);
            assert_eq!(a.rate, base.rate);
            assert_eq!(a.total_time, base.total_time);
            assert_eq!(a.max_ceiling, base.max_ceiling);
        }
    }
}

#[test]
fn dense_coverage_grows_with_n_max() {
    for which in [Example::X, Example::Y] {
        let s = SingularSuspension::build_example(which).unwrap();
        let cov: Vec<f64> = (1..=8).map(|n| s.dense_periodic_check(0.05, n).unwrap().coverage).collect();
        assert!(cov.windows(2).all(|w| w[0] <= w[1]), "{which:?}: {cov:?}");
        assert!(cov[7] > cov[0]);
    }
}

#[test]
fn flow_returns_match_the_ceiling() {
    let s = SingularSuspension::build_example(Example::Y).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let p = Point2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..=1.0));
        let Ok(o) = s.flow_orbit(p, 30, f64::INFINITY, 1e-10) else { continue };
        for st in &o.steps {
            assert_abs_diff_eq!(st.return_time, s.ceiling(st.point), epsilon = 1e-8);
        }
    }
}

#[test]
fn perturbation_support_on_a_grid() {
    let fam = DaFamily::new(CherryField::default());
    let f = fam.perturb(DaFamily::DEFAULT_TAU).unwrap();
    let mut outside = 0;
    for i in 0..100 {
        for j in 0..100 {
            let p = Point2::new(-1.0 + 2.0 * i as f64 / 99.0, -1.0 + 2.0 * j as f64 / 99.0);
            if !f.in_support(p) {
                assert_eq!(f.eval(p), fam.base.eval(p), "{p:?}");
                outside += 1;
            }
        }
    }
    assert!(outside > 9000);
}
