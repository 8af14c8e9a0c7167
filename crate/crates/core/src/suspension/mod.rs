//! Singular suspensions of the skew return maps.
//!
//! The flow is the suspension of a [`SkewReturnMap`] under a ceiling that
//! diverges logarithmically at the singular leaves; each singular leaf is the
//! local stable set of a Lorenz-like singularity. Near a singular leaf the
//! transit through the singularity follows the linear model.

mod checks;
mod dense;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::branched1d::Side;
use crate::cherryplug::{
    equilibria, is_lorenz_like, productize, CherryField, DaFamily, PlanarField, PlugMetadata, SingularitySpectrum,
};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::skew2d::{Half, SkewReturnMap, Variant};

pub use checks::{
    AuditReport, IntersectionStructure, OrbitAudit, SaddleCertificate, TheoremVerdict, TraceMatch,
    TransitivityEvidence, TransitivityVerdict, UnstableCheck,
};
pub use dense::{DenseReport, HalfCoverage};

/// Cap on the distance entering the ceiling.
pub const CEILING_CAP: f64 = 0.5;
/// Distance to a singular leaf below which the linear local model is used.
pub const DELTA_SING: f64 = 1e-6;
/// Strong contraction added to the planar saddles.
pub const DEFAULT_LAMBDA_SS: f64 = -10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    X,
    Y,
    OneSingularity,
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Example::X),
            "y" => Ok(Example::Y),
            "one_singularity" | "one-singularity" => Ok(Example::OneSingularity),
            _ => Err(Error::InvalidInput(format!("unknown example {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub half: Half,
    pub leaf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub label: String,
    pub spectrum: SingularitySpectrum,
    /// Singular leaves forming the local stable set.
    pub leaves: Vec<Attachment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSuspension {
    pub example: Option<Example>,
    pub section_map: SkewReturnMap,
    pub singularities: Vec<Singularity>,
    pub plug: PlugMetadata,
    /// Halves carrying dynamics; a single entry gives the one-half toy model.
    pub halves: Vec<Half>,
    pub ceiling_cap: f64,
    pub delta_sing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub step: usize,
    pub label: String,
    pub leaf: f64,
    pub distance: f64,
    /// Side of the singular leaf the orbit arrives on and leaves along.
    pub side: Side,
    /// Time spent in the linear model, `-ln(distance)/λu`.
    pub transit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowStep {
    pub point: Point2,
    pub return_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Returns,
    TimeBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOrbit {
    pub steps: Vec<FlowStep>,
    pub passages: Vec<Passage>,
    pub total_time: f64,
    pub stop: StopReason,
}

impl FlowOrbit {
    /// `leaf,fiber,return_time,passage_label`, one row per section point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("leaf,fiber,return_time,passage_label\n");
        let mut passages = self.passages.iter().peekable();
        for (i, st) in self.steps.iter().enumerate() {
            let label = match passages.peek() {
                Some(p) if p.step == i => passages.next().map_or("", |p| p.label.as_str()),
                _ => "",
            };
            let _ = writeln!(s, "{},{},{},{}", st.point.x, st.point.y, st.return_time, label);
        }
        s
    }
}

fn plug_spectra(field: &PlanarField, lambda_ss: f64) -> Result<Vec<(String, SingularitySpectrum)>> {
    let report = equilibria(field, 64, 1e-12)?;
    Ok(productize(&report, lambda_ss)?
        .into_iter()
        .map(|s| (s.label, s.spectrum))
        .collect())
}

impl SingularSuspension {
    /// Validates the data: every spectrum Lorenz-like, every singular leaf
    /// on a listed half and equal to that half's singular point.
    pub fn new(
        section_map: SkewReturnMap,
        singularities: Vec<Singularity>,
        plug: PlugMetadata,
        halves: Vec<Half>,
    ) -> Result<Self> {
        section_map.validate()?;
        if halves.is_empty() || singularities.is_empty() {
            return Err(Error::Config("a suspension needs at least one half and one singularity".into()));
        }
        for s in &singularities {
            if !is_lorenz_like(&s.spectrum) {
                return Err(Error::Config(format!(
                    "singularity {} has spectrum ({}, {}, {}), which is not Lorenz-like",
                    s.label, s.spectrum.lambda_ss, s.spectrum.lambda_s, s.spectrum.lambda_u
                )));
            }
            if s.leaves.is_empty() {
                return Err(Error::Config(format!("singularity {} has no singular leaf", s.label)));
            }
            for a in &s.leaves {
                if !halves.contains(&a.half) || a.leaf != section_map.singular_leaf(a.half) {
                    return Err(Error::Config(format!(
                        "singularity {} is attached to {} which is not a singular leaf",
                        s.label, a.leaf
                    )));
                }
            }
        }
        Ok(Self {
            example: None,
            section_map,
            singularities,
            plug,
            halves,
            ceiling_cap: CEILING_CAP,
            delta_sing: DELTA_SING,
        })
    }

    pub fn build_example(which: Example) -> Result<Self> {
        Self::build_example_with(which, DEFAULT_LAMBDA_SS)
    }

    pub fn build_example_with(which: Example, lambda_ss: f64) -> Result<Self> {
        let map = match which {
            Example::X => SkewReturnMap::default_h(),
            Example::Y | Example::OneSingularity => SkewReturnMap::default_g(),
        };
        let field = DaFamily::new(CherryField::default()).perturb(DaFamily::DEFAULT_TAU)?;
        Self::build_example_on(which, map, &field, lambda_ss)
    }

    /// Example `which` over a given section map, with spectra taken from the
    /// saddles of the perturbed plug field `field`.
    pub fn build_example_on(which: Example, map: SkewReturnMap, field: &PlanarField, lambda_ss: f64) -> Result<Self> {
        let want = match which {
            Example::X => Variant::H,
            Example::Y | Example::OneSingularity => Variant::G,
        };
        if map.variant != want {
            return Err(Error::Config(format!("example {which:?} needs a {want:?} section map")));
        }
        let at = |half| Attachment {
            half,
            leaf: map.singular_leaf(half),
        };
        let singularities = match which {
            Example::X | Example::Y => {
                let spectra = plug_spectra(field, lambda_ss)?;
                if spectra.len() != 2 {
                    return Err(Error::Config(format!("plug produced {} saddles, expected 2", spectra.len())));
                }
                spectra
                    .into_iter()
                    .zip(Half::BOTH)
                    .map(|((label, spectrum), half)| Singularity {
                        label,
                        spectrum,
                        leaves: vec![at(half)],
                    })
                    .collect()
            }
            Example::OneSingularity => {
                let base = field.base;
                vec![Singularity {
                    label: "σ".into(),
                    spectrum: SingularitySpectrum::new(lambda_ss, base.lambda_s, base.lambda_u),
                    leaves: vec![at(Half::Plus), at(Half::Minus)],
                }]
            }
        };
        let mut s = Self::new(map, singularities, PlugMetadata::default(), Half::BOTH.to_vec())?;
        s.example = Some(which);
        Ok(s)
    }

    /// Only the plus half of the H map with one singularity: a transitive
    /// single-class model.
    pub fn one_half_toy() -> Result<Self> {
        let map = SkewReturnMap::default_h();
        let base = CherryField::default();
        let sigma = Singularity {
            label: "σ".into(),
            spectrum: SingularitySpectrum::new(DEFAULT_LAMBDA_SS, base.lambda_s, base.lambda_u),
            leaves: vec![Attachment {
                half: Half::Plus,
                leaf: map.singular_leaf(Half::Plus),
            }],
        };
        Self::new(map, vec![sigma], PlugMetadata::default(), vec![Half::Plus])
    }

    pub fn singularity(&self, label: &str) -> Option<&Singularity> {
        self.singularities.iter().find(|s| s.label == label)
    }

    fn attachments(&self) -> impl Iterator<Item = (&Singularity, &Attachment)> {
        self.singularities.iter().flat_map(|s| s.leaves.iter().map(move |a| (s, a)))
    }

    /// Nearest singular leaf to `leaf` with its singularity and distance.
    pub fn nearest_singular(&self, leaf: f64) -> (&Singularity, &Attachment, f64) {
        self.attachments()
            .map(|(s, a)| (s, a, (leaf - a.leaf).abs()))
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .expect("at least one singular leaf")
    }

    /// `1 + (-ln min(dist, c0))/λu` with the distance to the nearest singular
    /// leaf; infinite on a singular leaf.
    pub fn ceiling(&self, p: Point2) -> f64 {
        let (s, _, d) = self.nearest_singular(p.x);
        if d == 0.0 {
            return f64::INFINITY;
        }
        1.0 + (-d.min(self.ceiling_cap).ln()) / s.spectrum.lambda_u
    }

    /// Largest ceiling on `R` outside the `δ_sing` neighbourhoods.
    pub fn max_regular_ceiling(&self) -> f64 {
        self.singularities
            .iter()
            .map(|s| 1.0 + (-self.delta_sing.min(self.ceiling_cap).ln()) / s.spectrum.lambda_u)
            .fold(0.0, f64::max)
    }

    pub fn in_domain(&self, p: Point2) -> bool {
        let leaf_ok = self.halves.iter().any(|h| match h {
            Half::Plus => (0.0..=1.0).contains(&p.x),
            Half::Minus => (-1.0..=0.0).contains(&p.x),
        });
        leaf_ok && (0.0..=1.0).contains(&p.y)
    }

    /// Follows the suspended orbit of a section point for `n_returns`
    /// returns or until the accumulated time exceeds `budget`.
    pub fn flow_orbit(&self, start: Point2, n_returns: usize, budget: f64, tol_root: f64) -> Result<FlowOrbit> {
        if !self.in_domain(start) {
            return Err(Error::InvalidInput(format!("start ({}, {}) is outside the section", start.x, start.y)));
        }
        let mut steps = Vec::with_capacity(n_returns.min(1 << 16));
        let mut passages = Vec::new();
        let mut p = start;
        let mut total = 0.0;
        let mut stop = StopReason::Returns;
        for step in 0..n_returns {
            let (s, a, d) = self.nearest_singular(p.x);
            if d <= tol_root {
                return Err(Error::StagnationAtSingularity { leaf: a.leaf });
            }
            let tau = self.ceiling(p);
            if d <= self.delta_sing {
                passages.push(Passage {
                    step,
                    label: s.label.clone(),
                    leaf: a.leaf,
                    distance: d,
                    side: if p.x < a.leaf { Side::Left } else { Side::Right },
                    transit: -d.ln() / s.spectrum.lambda_u,
                });
            }
            steps.push(FlowStep {
                point: p,
                return_time: tau,
            });
            total += tau;
            p = self.section_map.apply(p)?;
            if total > budget {
                stop = StopReason::TimeBudget;
                break;
            }
        }
        Ok(FlowOrbit {
            steps,
            passages,
            total_time: total,
            stop,
        })
    }
}
