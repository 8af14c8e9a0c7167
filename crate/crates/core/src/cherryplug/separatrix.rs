use serde::{Deserialize, Serialize};

use super::equilibria::{eigen2, eigenvector, jacobian_fd, H_FD};
use super::{CherryField, EquilibriumReport, PlanarField, VectorField2};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::ode::{integrate, OdeOptions};

/// Offset of the separatrix start point from the saddle.
const START_OFFSET: f64 = 1e-6;

/// Round section around the sink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionDisk {
    pub center: Point2,
    pub radius: f64,
}

impl SectionDisk {
    pub fn around_sink(base: &CherryField) -> Self {
        Self {
            center: base.sink(),
            radius: 0.1,
        }
    }

    fn outside(&self, p: Point2) -> f64 {
        p.dist(&self.center) - self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixHit {
    pub label: String,
    pub saddle: Point2,
    pub hit: Point2,
    pub time: f64,
    pub component: Component,
    pub path: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixTargets {
    pub p0: Point2,
    pub hits: Vec<SeparatrixHit>,
    pub one_per_component: bool,
}

fn trace(
    f: &dyn VectorField2,
    label: &str,
    from: Point2,
    towards: Point2,
    disk: &SectionDisk,
    opts: &OdeOptions,
) -> Result<(Point2, f64, Vec<Point2>)> {
    let j = jacobian_fd(f, from, H_FD);
    let (eigs, complex) = eigen2(&j);
    if complex || eigs[1] <= 0.0 {
        return Err(Error::InvalidInput(format!("{label} has no unstable direction")));
    }
    let mut v = eigenvector(&j, eigs[1]);
    if v.x * (towards.x - from.x) + v.y * (towards.y - from.y) < 0.0 {
        v = Point2::new(-v.x, -v.y);
    }
    let start = Point2::new(from.x + START_OFFSET * v.x, from.y + START_OFFSET * v.y);
    let rhs = |p: Point2| f.eval(p);
    let out = integrate(&rhs, start, opts, &|p| disk.outside(p));
    let (t, hit) = out.event.ok_or_else(|| Error::NoCrossing { label: label.to_string() })?;
    Ok((hit, t, out.path.into_iter().map(|(_, p)| p).collect()))
}

/// First hit of the unstable separatrix of the unperturbed saddle on the
/// section circle.
pub fn p0(base: &CherryField, disk: &SectionDisk, opts: &OdeOptions) -> Result<Point2> {
    trace(base, "σ", Point2::new(0.0, 0.0), disk.center, disk, opts).map(|(p, _, _)| p)
}

/// For every saddle of `field`, follows the unstable branch heading to the
/// sink until it meets the section circle and records on which side of `p0`
/// it lands. Sides are taken relative to the base flow direction at `p0`.
pub fn separatrix_targets(
    field: &PlanarField,
    report: &EquilibriumReport,
    disk: &SectionDisk,
    opts: &OdeOptions,
) -> Result<SeparatrixTargets> {
    let p0 = p0(&field.base, disk, opts)?;
    let dir = field.base.eval(p0);
    let mut hits = Vec::new();
    for (label, e) in report.labelled_saddles() {
        let (hit, time, path) = trace(field, &label, e.position, disk.center, disk, opts)?;
        let side = dir[0] * (hit.y - p0.y) - dir[1] * (hit.x - p0.x);
        hits.push(SeparatrixHit {
            label,
            saddle: e.position,
            hit,
            time,
            component: if side > 0.0 { Component::Left } else { Component::Right },
            path,
        });
    }
    let left = hits.iter().filter(|h| h.component == Component::Left).count();
    let right = hits.len() - left;
    Ok(SeparatrixTargets {
        p0,
        one_per_component: left == 1 && right == 1,
        hits,
    })
}
