//! Dormand–Prince 5(4) integration of planar autonomous fields with a
//! sign-change stopping event.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub t_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            h_init: 1e-3,
            h_max: 0.05,
            t_max: 1e3,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeOutcome {
    pub path: Vec<(f64, Point2)>,
    /// Time and position where the event function first crossed from
    /// positive to non-positive.
    pub event: Option<(f64, Point2)>,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One step; returns the fifth-order solution and the error estimate.
fn dp_step(f: &dyn Fn(Point2) -> [f64; 2], p: Point2, h: f64) -> (Point2, f64) {
    let mut k = [[0.0f64; 2]; 7];
    for s in 0..7 {
        let (mut x, mut y) = (p.x, p.y);
        for (j, a) in A[s].iter().enumerate().take(s) {
            x += h * a * k[j][0];
            y += h * a * k[j][1];
        }
        k[s] = f(Point2::new(x, y));
    }
    let (mut x5, mut y5, mut ex, mut ey) = (p.x, p.y, 0.0, 0.0);
    for s in 0..7 {
        x5 += h * B5[s] * k[s][0];
        y5 += h * B5[s] * k[s][1];
        ex += h * (B5[s] - B4[s]) * k[s][0];
        ey += h * (B5[s] - B4[s]) * k[s][1];
    }
    (Point2::new(x5, y5), ex.hypot(ey))
}

/// Integrates from `start` until `event` turns non-positive, the time limit
/// or the step limit. The event time is refined by bisecting the step.
pub fn integrate(
    f: &dyn Fn(Point2) -> [f64; 2],
    start: Point2,
    opts: &OdeOptions,
    event: &dyn Fn(Point2) -> f64,
) -> OdeOutcome {
    let mut t = 0.0;
    let mut p = start;
    let mut h = opts.h_init;
    let mut path = vec![(t, p)];
    let mut g_prev = event(p);
    for _ in 0..opts.max_steps {
        if t >= opts.t_max {
            break;
        }
        h = h.min(opts.t_max - t).min(opts.h_max);
        let (q, err) = dp_step(f, p, h);
        let scale = opts.tol * (1.0 + p.x.abs().max(p.y.abs()));
        if err <= scale || h <= 1e-14 {
            let g = event(q);
            if g_prev > 0.0 && g <= 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if event(dp_step(f, p, mid).0) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let hit = dp_step(f, p, hi).0;
                path.push((t + hi, hit));
                return OdeOutcome {
                    path,
                    event: Some((t + hi, hit)),
                };
            }
            t += h;
            p = q;
            g_prev = g;
            path.push((t, p));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    OdeOutcome { path, event: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_decay_matches_exponential() {
        let f = |p: Point2| [-p.x, 2.0 * p.y];
        let out = integrate(
            &f,
            Point2::new(1.0, 1e-3),
            &OdeOptions::default(),
            &|p: Point2| 1.0 - p.y,
        );
        let (t, hit) = out.event.unwrap();
        // y = 1e-3 e^{2t} reaches 1 at t = ln(1000)/2
        assert!((t - 1000f64.ln() / 2.0).abs() < 1e-7);
        assert!((hit.x - (-t).exp()).abs() < 1e-7);
    }

    #[test]
    fn no_event_within_time_limit() {
        let f = |_: Point2| [0.0, 0.0];
        let opts = OdeOptions {
            t_max: 1.0,
            ..OdeOptions::default()
        };
        let out = integrate(&f, Point2::new(0.0, 0.0), &opts, &|_| 1.0);
        assert!(out.event.is_none());
        assert!((out.path.last().unwrap().0 - 1.0).abs() < 1e-12);
    }
}
