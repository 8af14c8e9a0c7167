//! Real intervals with open/closed endpoint flags and normalized finite unions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, false)
    }

    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, true)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi) || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// True when the interval has positive length.
    pub fn is_proper(&self) -> bool {
        self.lo < self.hi
    }

    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn closure_contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }

    /// Image under `x ↦ -x`.
    pub fn mirror(&self) -> Interval {
        Interval::new(-self.hi, -self.lo, self.hi_closed, self.lo_closed)
    }

    pub fn distance_to(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// Gap between the closures, zero when they meet.
    pub fn gap_to(&self, other: &Interval) -> f64 {
        if other.lo > self.hi {
            other.lo - self.hi
        } else if self.lo > other.hi {
            self.lo - other.hi
        } else {
            0.0
        }
    }

    pub fn approx_eq(&self, other: &Interval, tol: f64) -> bool {
        (self.lo - other.lo).abs() <= tol
            && (self.hi - other.hi).abs() <= tol
            && self.lo_closed == other.lo_closed
            && self.hi_closed == other.hi_closed
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo < other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo < self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed || other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi > other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi > self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed || other.hi_closed)
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("malformed interval `{s}`"));
        if s.len() < 5 || !s.is_ascii() {
            return Err(bad());
        }
        let lo_closed = match &s[..1] {
            "[" => true,
            "(" => false,
            _ => return Err(bad()),
        };
        let hi_closed = match &s[s.len() - 1..] {
            "]" => true,
            ")" => false,
            _ => return Err(bad()),
        };
        let (a, b) = s[1..s.len() - 1].split_once(',').ok_or_else(bad)?;
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(bad());
        }
        Ok(Interval::new(lo, hi, lo_closed, hi_closed))
    }
}

/// Finite union of intervals kept sorted, with touching or overlapping parts merged.
///
/// Two parts sharing an endpoint are merged only if at least one of them
/// contains that endpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(parts: impl IntoIterator<Item = Interval>) -> Self {
        let mut parts: Vec<Interval> = parts.into_iter().filter(|i| !i.is_empty()).collect();
        parts.sort_by(|a, b| {
            a.lo.total_cmp(&b.lo)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for next in parts {
            if let Some(cur) = merged.last_mut() {
                let connected =
                    next.lo < cur.hi || (next.lo == cur.hi && (cur.hi_closed || next.lo_closed));
                if connected {
                    if next.hi > cur.hi {
                        cur.hi = next.hi;
                        cur.hi_closed = next.hi_closed;
                    } else if next.hi == cur.hi {
                        cur.hi_closed |= next.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(next);
        }
        Self { parts: merged }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::new(self.parts.iter().chain(other.parts.iter()).copied())
    }

    /// Length of `within` not covered by the closure of this set.
    pub fn uncovered_measure(&self, within: &Interval) -> f64 {
        let covered: f64 = self
            .parts
            .iter()
            .map(|p| {
                let c = p.intersect(within);
                if c.lo <= c.hi {
                    c.hi - c.lo
                } else {
                    0.0
                }
            })
            .sum();
        (within.length() - covered).max(0.0)
    }

    pub fn mirror(&self) -> IntervalSet {
        IntervalSet::new(self.parts.iter().map(Interval::mirror))
    }
}

impl From<Interval> for IntervalSet {
    fn from(i: Interval) -> Self {
        IntervalSet::new([i])
    }
}
