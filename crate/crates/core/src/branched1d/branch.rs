use serde::{Deserialize, Serialize};

use crate::interval::Interval;

/// Compactly supported C¹ bump `A·(s(1-s))²` with `s = (x - lo)/(hi - lo)`.
///
/// Value and first derivative vanish at both ends of the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64, amplitude: f64) -> Self {
        Self { lo, hi, amplitude }
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let s = (x - self.lo) / self.width();
        let q = s * (1.0 - s);
        self.amplitude * q * q
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let s = (x - self.lo) / self.width();
        self.amplitude / self.width() * 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    }

    /// Supremum of `|derivative|`, attained at `s = (3 - √3)/6`.
    pub fn max_slope(&self) -> f64 {
        self.amplitude.abs() / (self.width() * 3.0 * 3f64.sqrt())
    }

    /// Amplitude whose derivative peaks at exactly `slope`.
    pub fn amplitude_for_slope(lo: f64, hi: f64, slope: f64) -> f64 {
        slope * (hi - lo) * 3.0 * 3f64.sqrt()
    }
}

/// One maximal continuity piece of a branched interval map.
///
/// The function is a polynomial in `x - domain.lo` plus a sum of bumps.
/// `limit_lo` and `limit_hi` are the stored one-sided limits at the two
/// ends of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub domain: Interval,
    pub coeffs: Vec<f64>,
    pub bumps: Vec<Bump>,
    pub limit_lo: f64,
    pub limit_hi: f64,
}

impl Branch {
    pub fn affine(domain: Interval, value_at_lo: f64, slope: f64) -> Self {
        let mut b = Self {
            domain,
            coeffs: vec![value_at_lo, slope],
            bumps: Vec::new(),
            limit_lo: 0.0,
            limit_hi: 0.0,
        };
        b.refresh_limits();
        b
    }

    /// Recomputes the stored limits from the branch function.
    /// One-sided limits at the domain ends; limits within `EXACT_TOL` of 0
    /// or 1 are snapped onto them.
    pub fn refresh_limits(&mut self) {
        let snap = |v: f64| {
            if v.abs() <= super::EXACT_TOL {
                0.0
            } else if (v - 1.0).abs() <= super::EXACT_TOL {
                1.0
            } else {
                v
            }
        };
        self.limit_lo = snap(self.value(self.domain.lo));
        self.limit_hi = snap(self.value(self.domain.hi));
    }

    pub fn is_affine(&self) -> bool {
        self.coeffs.len() <= 2 && self.bumps.is_empty()
    }

    /// Value of the continuous extension to the closure of the domain.
    pub fn value(&self, x: f64) -> f64 {
        let t = x - self.domain.lo;
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
        poly + self.bumps.iter().map(|b| b.value(x)).sum::<f64>()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = x - self.domain.lo;
        let n = self.coeffs.len();
        let mut acc = 0.0;
        for k in (1..n).rev() {
            acc = acc * t + self.coeffs[k] * k as f64;
        }
        acc + self.bumps.iter().map(|b| b.derivative(x)).sum::<f64>()
    }

    pub fn is_increasing(&self) -> bool {
        self.value(self.domain.hi) >= self.value(self.domain.lo)
    }

    /// Image of `k ⊆ domain`, assuming the branch is monotone.
    /// Value with the stored limits at the domain ends.
    fn end_value(&self, x: f64) -> f64 {
        if x == self.domain.lo {
            self.limit_lo
        } else if x == self.domain.hi {
            self.limit_hi
        } else {
            self.value(x)
        }
    }

    pub fn image_of(&self, k: &Interval) -> Interval {
        let a = self.end_value(k.lo);
        let b = self.end_value(k.hi);
        if self.is_increasing() {
            Interval::new(a, b, k.lo_closed, k.hi_closed)
        } else {
            Interval::new(b, a, k.hi_closed, k.lo_closed)
        }
    }

    pub fn image(&self) -> Interval {
        self.image_of(&self.domain)
    }

    /// Preimage of `y` in the closure of the domain, clamped to it.
    pub fn inverse(&self, y: f64) -> f64 {
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        if self.is_affine() && self.coeffs.len() == 2 && self.coeffs[1] != 0.0 {
            return (lo + (y - self.coeffs[0]) / self.coeffs[1]).clamp(lo, hi);
        }
        let increasing = self.is_increasing();
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let below = self.value(m) < y;
            if below == increasing {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}
