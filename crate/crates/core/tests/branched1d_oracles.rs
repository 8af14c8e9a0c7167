//! Independent oracles for the interval maps: closed-form affine composites,
//! analytic inverses and direct quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use venice_core::branched1d::{arc_length, verify_arclength_eps, ArcLengthBudget};
use venice_core::{BranchedIntervalMap, Interval, Tolerances};

/// The piecewise-affine default written out by hand: (domain, value at lo, slope).
fn affine_pieces() -> Vec<(Interval, f64, f64)> {
    vec![
        (Interval::closed(0.0, 0.25), 0.0, 4.0),
        (Interval::open(0.25, 0.5), 0.4, -1.6),
        (Interval::open_closed(0.5, 0.8), 0.0, 10.0 / 3.0),
        (Interval::open_closed(0.8, 1.0), 0.4, -1.2),
    ]
}

fn piece_of(x: f64) -> Option<usize> {
    affine_pieces().iter().position(|(d, _, _)| d.contains(x))
}

fn apply_piece(k: usize, x: f64) -> f64 {
    let (d, a, s) = affine_pieces()[k];
    a + s * (x - d.lo)
}

fn is_primitive(w: &[usize]) -> bool {
    let n = w.len();
    (1..n).filter(|p| n % p == 0).all(|p| (0..n).any(|i| w[i] != w[i % p]))
}

/// Periodic points of the affine map from the fixed point of every composite
/// `x ↦ αx + β`, kept when the orbit follows the word.
fn affine_periodic_oracle(n_max: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for code in 0..4usize.pow(n as u32) {
            let w: Vec<usize> = (0..n).map(|i| (code / 4usize.pow(i as u32)) % 4).collect();
            if !is_primitive(&w) {
                continue;
            }
            let (mut alpha, mut beta) = (1.0, 0.0);
            for &k in &w {
                let (d, a, s) = affine_pieces()[k];
                alpha *= s;
                beta = s * beta + a - s * d.lo;
            }
            let x = beta / (1.0 - alpha);
            let mut y = x;
            let follows = w.iter().all(|&k| {
                let ok = piece_of(y) == Some(k);
                y = apply_piece(k, y);
                ok
            });
            if follows {
                out.push((n, x));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

#[test]
fn affine_periodic_points_match_closed_form() {
    let f = BranchedIntervalMap::standard();
    let got: Vec<(usize, f64)> = f.periodic_points(5, 1e-12).iter().map(|p| (p.period, p.x)).collect();
    let want = affine_periodic_oracle(5);
    assert_eq!(got.len(), want.len(), "periodic point count");
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.0, w.0);
        assert!((g.1 - w.1).abs() <= 1e-11, "{g:?} vs {w:?}");
    }
}

#[test]
fn bumped_periodic_points_reevaluate() {
    let tol_root = 1e-10;
    for f in [BranchedIntervalMap::standard_plus(), BranchedIntervalMap::standard_minus()] {
        let pts = f.periodic_points(8, tol_root);
        assert!(pts.len() > 1000);
        for p in &pts {
            let mut y = p.x;
            let mut d = 1.0;
            for _ in 0..p.period {
                d *= f.derivative(y).unwrap();
                y = f.eval(y).unwrap();
            }
            let scale = d.abs().max(1.0);
            assert!((y - p.x).abs() <= 4.0 * tol_root * scale, "period {} at {}", p.period, p.x);
            assert!((d - p.multiplier).abs() <= 1e-9 * d.abs());
        }
    }
}

/// All `n`-th preimages of `y` under the affine map via the analytic inverse
/// of every branch whose image holds `y`.
fn affine_preimages(y: f64, n: usize) -> Vec<f64> {
    let mut level = vec![y];
    let mut all = level.clone();
    for _ in 0..n {
        let mut next = Vec::new();
        for &t in &level {
            for (d, a, s) in affine_pieces() {
                let x = d.lo + (t - a) / s;
                if d.contains(x) {
                    next.push(x);
                }
            }
        }
        all.extend_from_slice(&next);
        level = next;
    }
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

#[test]
fn preimages_of_generic_point_match_analytic_inverse() {
    let f = BranchedIntervalMap::standard();
    let got = f.preimage_tree(0.3, 7);
    let want = affine_preimages(0.3, 7);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-12);
    }
}

#[test]
fn affine_arc_length_is_closed_form() {
    let f = BranchedIntervalMap::standard();
    let exact: f64 = affine_pieces().iter().map(|(d, _, s)| d.length() * s.hypot(1.0)).sum();
    let got = arc_length(&f, 0.0, 1.0, 1e-10).unwrap();
    assert!((got - exact).abs() <= 1e-9, "{got} vs {exact}");
}

#[test]
fn bumped_arc_length_matches_fine_midpoint_rule() {
    let f = BranchedIntervalMap::standard_plus();
    let n = 400_000;
    let (lo, hi) = (0.0, 0.25);
    let h = (hi - lo) / n as f64;
    let direct: f64 = (0..n)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            h * f.derivative(x).unwrap().hypot(1.0)
        })
        .sum();
    let got = arc_length(&f, lo, hi, 1e-10).unwrap();
    assert!((got - direct).abs() <= 1e-8, "{got} vs {direct}");
    let report = verify_arclength_eps(&BranchedIntervalMap::standard(), &f, &ArcLengthBudget::default()).unwrap();
    assert!(report.passed);
    for s in &report.segments {
        assert!(s.delta() > 0.0 && s.delta() < 0.05);
    }
}

#[test]
fn leo_iterate_reaches_every_sampled_target() {
    // y ∈ f^m(I) iff some m-th preimage of y lies in I
    let f = BranchedIntervalMap::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let a = rng.gen_range(0.0..0.9);
        let i = Interval::open(a, a + 0.08);
        let res = f.leo_check(&i, 40, 1e-6);
        let m = res.m.expect("leo succeeds");
        for _ in 0..50 {
            let y = rng.gen_range(0.0..1.0);
            let mut level = vec![y];
            for _ in 0..m {
                level = level
                    .iter()
                    .flat_map(|&t| {
                        affine_pieces().into_iter().filter_map(move |(d, a, s)| {
                            let x = d.lo + (t - a) / s;
                            d.contains(x).then_some(x)
                        })
                    })
                    .collect();
            }
            assert!(level.iter().any(|x| i.contains(*x)), "{y} not reached from {i} in {m} steps");
        }
    }
}

#[test]
fn expansion_below_one_is_witnessed() {
    let mut f = BranchedIntervalMap::standard();
    f.expansion = 1.7;
    let report = f.verify_hypotheses(&Tolerances::default());
    let h5 = report.check("H5").unwrap();
    assert!(!h5.passed);
    let w = h5.witness.unwrap();
    assert!((0.25..0.5).contains(&w) || (0.8..=1.0).contains(&w));
}

#[test]
fn default_maps_pass_all_hypotheses() {
    for f in [
        BranchedIntervalMap::standard(),
        BranchedIntervalMap::standard_plus(),
        BranchedIntervalMap::standard_minus(),
    ] {
        let r = f.verify_hypotheses(&Tolerances::default());
        assert!(r.all_passed(), "{r:?}");
    }
}
