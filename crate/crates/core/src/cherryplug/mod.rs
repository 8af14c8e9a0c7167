//! Planar Cherry field on `Q = [-1, 1]²`, its DA perturbation and the
//! three-dimensional singularity spectra obtained by adding a strong
//! contracting direction.

mod equilibria;
mod separatrix;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub use equilibria::{eigen2, equilibria, jacobian_fd, EquilibriumKind, EquilibriumReport, Equilibrium};
pub use separatrix::{p0, separatrix_targets, Component, SeparatrixHit, SeparatrixTargets, SectionDisk};

pub trait VectorField2: Sync {
    fn eval(&self, p: Point2) -> [f64; 2];
}

impl<F: Fn(Point2) -> [f64; 2] + Sync> VectorField2 for F {
    fn eval(&self, p: Point2) -> [f64; 2] {
        self(p)
    }
}

/// `ẋ = λu·x·(1 - x/x_p)`, `ẏ = λs·y`: a saddle at the origin and a sink at
/// `(x_p, 0)`. The flow enters `Q` through the right, top and bottom edges
/// and leaves through the left edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CherryField {
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub sink_x: f64,
}

impl Default for CherryField {
    fn default() -> Self {
        Self {
            lambda_s: -0.5,
            lambda_u: 1.0,
            sink_x: 0.6,
        }
    }
}

impl CherryField {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_s < 0.0 && 0.0 < -self.lambda_s && -self.lambda_s < self.lambda_u) {
            return Err(Error::Config(format!(
                "saddle eigenvalues must satisfy λs < 0 < -λs < λu, got ({}, {})",
                self.lambda_s, self.lambda_u
            )));
        }
        if !(self.sink_x > 0.0 && self.sink_x < 1.0) {
            return Err(Error::Config(format!("sink abscissa {} must lie in (0, 1)", self.sink_x)));
        }
        Ok(())
    }

    pub fn sink(&self) -> Point2 {
        Point2::new(self.sink_x, 0.0)
    }

    pub fn analytic_jacobian(&self, p: Point2) -> [[f64; 2]; 2] {
        [[self.lambda_u * (1.0 - 2.0 * p.x / self.sink_x), 0.0], [0.0, self.lambda_s]]
    }
}

impl VectorField2 for CherryField {
    fn eval(&self, p: Point2) -> [f64; 2] {
        [self.lambda_u * p.x * (1.0 - p.x / self.sink_x), self.lambda_s * p.y]
    }
}

/// `exp(1 - 1/(1 - s²))` on `|s| < 1`, zero elsewhere. Smooth, equal to 1 at 0.
pub fn cutoff(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

/// Localized push `(0, amplitude·cutoff(|p - center|/radius))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub center: Point2,
    pub radius: f64,
    pub amplitude: f64,
}

impl Drift {
    /// Pushes both separatrices that leave the origin towards the sink onto
    /// the upper side of the sink.
    pub fn mistuned() -> Self {
        Self {
            center: Point2::new(0.3, 0.0),
            radius: 0.2,
            amplitude: 1.0,
        }
    }
}

/// Base field plus the DA term `t·cutoff(r/r_U)·(0, y)` around the saddle.
///
/// At the origin the linearization becomes `diag(λu, λs + t)`, the
/// generator of the derivative `diag(1, e^t)` composed with the base flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarField {
    pub base: CherryField,
    pub t: f64,
    pub r_u: f64,
    pub drift: Option<Drift>,
}

impl PlanarField {
    pub fn cherry(base: CherryField) -> Self {
        Self {
            base,
            t: 0.0,
            r_u: DaFamily::DEFAULT_RADIUS,
            drift: None,
        }
    }

    pub fn with_drift(mut self, drift: Drift) -> Self {
        self.drift = Some(drift);
        self
    }

    pub fn in_support(&self, p: Point2) -> bool {
        p.x.hypot(p.y) < self.r_u
    }
}

impl VectorField2 for PlanarField {
    fn eval(&self, p: Point2) -> [f64; 2] {
        let [u, mut v] = self.base.eval(p);
        if self.t != 0.0 {
            let w = cutoff(p.x.hypot(p.y) / self.r_u);
            if w != 0.0 {
                v += self.t * w * p.y;
            }
        }
        if let Some(d) = &self.drift {
            v += d.amplitude * cutoff(p.dist(&d.center) / d.radius);
        }
        [u, v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DaFamily {
    pub base: CherryField,
    pub r_u: f64,
}

impl DaFamily {
    pub const DEFAULT_RADIUS: f64 = 0.15;
    pub const DEFAULT_TAU: f64 = 0.75;

    pub fn new(base: CherryField) -> Self {
        Self {
            base,
            r_u: Self::DEFAULT_RADIUS,
        }
    }

    pub fn perturb(&self, t: f64) -> Result<PlanarField> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("perturbation parameter {t} must be >= 0")));
        }
        Ok(PlanarField {
            base: self.base,
            t,
            r_u: self.r_u,
            drift: None,
        })
    }

    /// The origin is a source of `perturb(t)` iff `t > -λs`.
    pub fn source_threshold(&self) -> f64 {
        -self.base.lambda_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularitySpectrum {
    pub lambda_ss: f64,
    pub lambda_s: f64,
    pub lambda_u: f64,
}

impl SingularitySpectrum {
    pub fn new(lambda_ss: f64, lambda_s: f64, lambda_u: f64) -> Self {
        Self {
            lambda_ss,
            lambda_s,
            lambda_u,
        }
    }
}

/// `λss < λs < 0 < -λs < λu`, evaluated exactly.
pub fn is_lorenz_like(s: &SingularitySpectrum) -> bool {
    let all_finite = s.lambda_ss.is_finite() && s.lambda_s.is_finite() && s.lambda_u.is_finite();
    all_finite && s.lambda_ss < s.lambda_s && s.lambda_s < 0.0 && 0.0 < -s.lambda_s && -s.lambda_s < s.lambda_u
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSaddle {
    pub label: String,
    pub position: Point2,
    pub spectrum: SingularitySpectrum,
    pub lorenz_like: bool,
}

/// Adds the strong contraction `lambda_ss` to every planar saddle.
pub fn productize(report: &EquilibriumReport, lambda_ss: f64) -> Result<Vec<ProductSaddle>> {
    if !(lambda_ss < 0.0) {
        return Err(Error::InvalidInput(format!("strong contraction {lambda_ss} must be negative")));
    }
    Ok(report
        .labelled_saddles()
        .into_iter()
        .map(|(label, e)| {
            let (ls, lu) = (e.eigenvalues[0].min(e.eigenvalues[1]), e.eigenvalues[0].max(e.eigenvalues[1]));
            let spectrum = SingularitySpectrum::new(lambda_ss, ls, lu);
            ProductSaddle {
                label,
                position: e.position,
                lorenz_like: is_lorenz_like(&spectrum),
                spectrum,
            }
        })
        .collect())
}

/// Declarative description of how the plug is assembled. No geometry is
/// built from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlugMetadata {
    pub holes: usize,
    pub repelling_orbits: Vec<String>,
    pub removed_tori: Vec<String>,
    pub face_inward: Vec<bool>,
    pub lands_in_interior: bool,
}

impl Default for PlugMetadata {
    fn default() -> Self {
        Self {
            holes: 2,
            repelling_orbits: vec!["O1".into(), "O2".into()],
            removed_tori: vec!["V1".into(), "V2".into()],
            face_inward: vec![true, false],
            lands_in_interior: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorenz_like_examples() {
        assert!(is_lorenz_like(&SingularitySpectrum::new(-3.0, -1.0, 2.0)));
        assert!(!is_lorenz_like(&SingularitySpectrum::new(-3.0, -2.0, 1.0)));
        assert!(!is_lorenz_like(&SingularitySpectrum::new(-0.5, -1.0, 2.0)));
        assert!(!is_lorenz_like(&SingularitySpectrum::new(-1.0, -1.0, 2.0)));
        assert!(!is_lorenz_like(&SingularitySpectrum::new(-3.0, -1.0, 1.0)));
        assert!(!is_lorenz_like(&SingularitySpectrum::new(f64::NAN, -1.0, 2.0)));
    }

    #[test]
    fn identity_at_zero_and_outside_support() {
        let fam = DaFamily::new(CherryField::default());
        let a = PlanarField::cherry(CherryField::default());
        let b0 = fam.perturb(0.0).unwrap();
        let bt = fam.perturb(0.75).unwrap();
        for i in 0..=40 {
            for j in 0..=40 {
                let p = Point2::new(-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0);
                assert_eq!(b0.eval(p), a.eval(p));
                if !bt.in_support(p) {
                    assert_eq!(bt.eval(p), a.eval(p));
                }
            }
        }
    }

    #[test]
    fn negative_parameter_rejected() {
        assert!(DaFamily::new(CherryField::default()).perturb(-0.1).is_err());
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert_eq!(cutoff(1.5), 0.0);
        assert!(cutoff(0.999) < 1e-200);
    }
}
