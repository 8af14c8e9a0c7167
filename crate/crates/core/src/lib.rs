//! Numerical models of non-transitive sectional-Anosov flows with dense
//! periodic orbits, built from branched interval maps, foliated skew return
//! maps, planar singularity plugs and singular suspensions.

pub mod branched1d;
pub mod cherryplug;
pub mod error;
pub mod geometry;
pub mod interval;
pub mod ode;
pub mod skew2d;
pub mod suspension;
pub mod svg;

pub use branched1d::{BranchedIntervalMap, Orientation, Side, Tolerances};
pub use error::{Error, Result};
pub use geometry::Point2;
pub use interval::{Interval, IntervalSet};
pub use skew2d::{BoxBudget, BoxSet, Half, IntersectionKind, IntersectionReport, SkewReturnMap, Variant};
