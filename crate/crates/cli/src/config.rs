//! INI run configuration.
//!
//! Every section and key is optional; unknown sections and keys are errors.
//!
//! ```text
//! [run]
//! seed = 7
//! workers = 4
//! out = results
//! formats = csv,json,svg
//!
//! [tolerances]
//! tol_root = 1e-10
//!
//! [skew]
//! mu = 0.3333333333333333
//! plus_offsets = 0.3333333333333333 0.58 0.62 0.1
//!
//! [plug]
//! tau = 0.75
//! lambda_ss = -10
//! ```
//!
//! The 1D maps are read from `[map]`, `[map_plus]` and `[map_minus]` in the
//! form written by [`BranchedIntervalMap::to_ini_string`], with their branch
//! sections `[map.branch0]`, ...

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, Properties};
use serde::Serialize;
use venice_core::cherryplug::{CherryField, DaFamily, PlanarField};
use venice_core::skew2d::{SkewReturnMap, Variant};
use venice_core::suspension::DEFAULT_LAMBDA_SS;
use venice_core::{BoxBudget, BranchedIntervalMap, Error, Orientation, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(cfg(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verify1dParams {
    pub leo_intervals: usize,
    pub leo_min_length: f64,
    pub leo_max_length: f64,
    pub leo_m_max: usize,
    pub net_period: usize,
    pub net_eps: f64,
    pub preimage_point: f64,
    pub preimage_depth: usize,
    pub arclength_eps: f64,
}

impl Default for Verify1dParams {
    fn default() -> Self {
        Self {
            leo_intervals: 100,
            leo_min_length: 1e-3,
            leo_max_length: 0.1,
            leo_m_max: 40,
            net_period: 20,
            net_eps: 0.01,
            preimage_point: 0.3,
            preimage_depth: 15,
            arclength_eps: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassesParams {
    pub n: usize,
    pub eps: f64,
    pub saddle_period: usize,
    pub invariance_samples: usize,
}

impl Default for ClassesParams {
    fn default() -> Self {
        Self {
            n: 12,
            eps: 0.01,
            saddle_period: 8,
            invariance_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleParams {
    pub grid_eps: f64,
    pub n_max: usize,
    pub samples: usize,
    pub iterations: usize,
    pub n: usize,
    pub eps: f64,
    pub audit_period: usize,
    pub lambda_ss: f64,
    pub flow_returns: usize,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self {
            grid_eps: 0.01,
            n_max: 20,
            samples: 10_000,
            iterations: 1_000,
            n: 12,
            eps: 0.01,
            audit_period: 10,
            lambda_ss: DEFAULT_LAMBDA_SS,
            flow_returns: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlugParams {
    pub tau: f64,
    pub lambda_ss: f64,
    pub grid_n: usize,
    pub portrait_grid: usize,
}

impl Default for PlugParams {
    fn default() -> Self {
        Self {
            tau: DaFamily::DEFAULT_TAU,
            lambda_ss: DEFAULT_LAMBDA_SS,
            grid_n: 64,
            portrait_grid: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewParams {
    pub mu: f64,
    pub plus_offsets: Vec<f64>,
    /// Minus-half offsets of the H map; the G map mirrors the plus offsets.
    pub minus_offsets: Vec<f64>,
}

impl Default for SkewParams {
    fn default() -> Self {
        let h = SkewReturnMap::default_h();
        Self {
            mu: h.mu,
            plus_offsets: h.plus_offsets,
            minus_offsets: h.minus_offsets,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldParams {
    pub base: CherryField,
    pub support_radius: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            base: CherryField::default(),
            support_radius: DaFamily::DEFAULT_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
    pub tolerances: Tolerances,
    pub budget: BoxBudget,
    pub map: BranchedIntervalMap,
    pub map_plus: BranchedIntervalMap,
    pub map_minus: BranchedIntervalMap,
    pub skew: SkewParams,
    pub field: FieldParams,
    pub verify_1d: Verify1dParams,
    pub classes: ClassesParams,
    pub example: ExampleParams,
    pub plug: PlugParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: None,
            out: PathBuf::from("venice-out"),
            formats: [Format::Csv, Format::Json, Format::Svg].into(),
            tolerances: Tolerances::default(),
            budget: BoxBudget::default(),
            map: BranchedIntervalMap::standard(),
            map_plus: BranchedIntervalMap::standard_plus(),
            map_minus: BranchedIntervalMap::standard_minus(),
            skew: SkewParams::default(),
            field: FieldParams::default(),
            verify_1d: Verify1dParams::default(),
            classes: ClassesParams::default(),
            example: ExampleParams::default(),
            plug: PlugParams::default(),
        }
    }
}

/// Upper limits on the command budgets.
pub mod caps {
    pub const WORKERS: usize = 256;
    pub const GENERATION: usize = 16;
    pub const PERIOD: usize = 24;
    pub const SADDLE_PERIOD: usize = 10;
    pub const AUDIT_PERIOD: usize = 12;
    pub const PREIMAGE_DEPTH: usize = 18;
    pub const LEO_INTERVALS: usize = 10_000;
    pub const LEO_M_MAX: usize = 64;
    pub const SAMPLES: usize = 100_000;
    pub const ITERATIONS: usize = 10_000;
    pub const FLOW_RETURNS: usize = 10_000;
    pub const GRID_N: usize = 1024;
    pub const PORTRAIT_GRID: usize = 128;
    pub const BOX_CAP: usize = 10_000_000;
    pub const MIN_GRID_EPS: f64 = 1e-3;
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["seed", "workers", "out", "formats"]),
    ("tolerances", &["tol_root", "tol_lim", "tol_cover", "tol_quad", "n_deriv"]),
    ("budget", &["box_cap", "coarsen_tol"]),
    ("skew", &["mu", "plus_offsets", "minus_offsets"]),
    ("field", &["lambda_s", "lambda_u", "sink_x", "support_radius"]),
    (
        "verify_1d",
        &[
            "leo_intervals",
            "leo_min_length",
            "leo_max_length",
            "leo_m_max",
            "net_period",
            "net_eps",
            "preimage_point",
            "preimage_depth",
            "arclength_eps",
        ],
    ),
    ("classes", &["n", "eps", "saddle_period", "invariance_samples"]),
    (
        "example",
        &["grid_eps", "n_max", "samples", "iterations", "n", "eps", "audit_period", "lambda_ss", "flow_returns"],
    ),
    ("plug", &["tau", "lambda_ss", "grid_n", "portrait_grid"]),
];

const MAP_SECTIONS: &[&str] = &["map", "map_plus", "map_minus"];

struct Section<'a> {
    name: &'a str,
    props: Option<&'a Properties>,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn real(&self, key: &str, into: &mut f64) -> Result<()> {
        if let Some(raw) = self.raw(key) {
            let v: f64 = raw
                .parse()
                .map_err(|_| cfg(format!("[{}] {key}: `{raw}` is not a decimal number", self.name)))?;
            if !v.is_finite() {
                return Err(cfg(format!("[{}] {key}: value must be finite", self.name)));
            }
            *into = v;
        }
        Ok(())
    }

    fn count<T: FromStr>(&self, key: &str, into: &mut T) -> Result<()> {
        if let Some(raw) = self.raw(key) {
            *into = raw
                .parse()
                .map_err(|_| cfg(format!("[{}] {key}: `{raw}` is not a non-negative integer", self.name)))?;
        }
        Ok(())
    }

    fn reals(&self, key: &str, into: &mut Vec<f64>) -> Result<()> {
        if let Some(raw) = self.raw(key) {
            let mut v = Vec::new();
            for t in raw.split_whitespace() {
                let mut x = 0.0;
                Section {
                    name: self.name,
                    props: None,
                }
                .real_token(key, t, &mut x)?;
                v.push(x);
            }
            *into = v;
        }
        Ok(())
    }

    fn real_token(&self, key: &str, t: &str, into: &mut f64) -> Result<()> {
        let v: f64 = t
            .parse()
            .map_err(|_| cfg(format!("[{}] {key}: `{t}` is not a decimal number", self.name)))?;
        if !v.is_finite() {
            return Err(cfg(format!("[{}] {key}: value must be finite", self.name)));
        }
        *into = v;
        Ok(())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| cfg(format!("malformed configuration: {e}")))?;
        Self::from_ini(&ini)
    }

    pub fn from_ini(ini: &Ini) -> Result<Self> {
        for (name, props) in ini.iter() {
            match name {
                None => {
                    if let Some((k, _)) = props.iter().next() {
                        return Err(cfg(format!("key `{k}` outside any section")));
                    }
                }
                Some(n) => {
                    let known = SECTIONS.iter().find(|(s, _)| *s == n);
                    if let Some((_, keys)) = known {
                        if let Some((k, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                            return Err(cfg(format!("[{n}] unknown key `{k}`")));
                        }
                    } else {
                        let root = n.split('.').next().unwrap_or(n);
                        if !MAP_SECTIONS.contains(&root) {
                            return Err(cfg(format!("unknown section [{n}]")));
                        }
                        if root != n && ini.section(Some(root)).is_none() {
                            return Err(cfg(format!("section [{n}] without [{root}]")));
                        }
                    }
                }
            }
        }
        let sec = |name: &'static str| Section {
            name,
            props: ini.section(Some(name)),
        };
        let mut c = RunConfig::default();

        let run = sec("run");
        run.count("seed", &mut c.seed)?;
        if run.raw("workers").is_some() {
            let mut w = 0usize;
            run.count("workers", &mut w)?;
            c.workers = Some(w);
        }
        if let Some(out) = run.raw("out") {
            c.out = PathBuf::from(out);
        }
        if let Some(raw) = run.raw("formats") {
            c.formats = raw.split(',').map(Format::from_str).collect::<Result<_>>()?;
        }

        let t = sec("tolerances");
        t.real("tol_root", &mut c.tolerances.tol_root)?;
        t.real("tol_lim", &mut c.tolerances.tol_lim)?;
        t.real("tol_cover", &mut c.tolerances.tol_cover)?;
        t.real("tol_quad", &mut c.tolerances.tol_quad)?;
        t.count("n_deriv", &mut c.tolerances.n_deriv)?;

        let b = sec("budget");
        b.count("box_cap", &mut c.budget.cap)?;
        b.real("coarsen_tol", &mut c.budget.coarsen_tol)?;

        for (name, slot) in [("map", &mut c.map), ("map_plus", &mut c.map_plus), ("map_minus", &mut c.map_minus)] {
            if ini.section(Some(name)).is_some() {
                *slot = BranchedIntervalMap::from_ini(ini, name)?;
            }
        }

        let s = sec("skew");
        s.real("mu", &mut c.skew.mu)?;
        s.reals("plus_offsets", &mut c.skew.plus_offsets)?;
        s.reals("minus_offsets", &mut c.skew.minus_offsets)?;

        let f = sec("field");
        f.real("lambda_s", &mut c.field.base.lambda_s)?;
        f.real("lambda_u", &mut c.field.base.lambda_u)?;
        f.real("sink_x", &mut c.field.base.sink_x)?;
        f.real("support_radius", &mut c.field.support_radius)?;

        let v = sec("verify_1d");
        let p = &mut c.verify_1d;
        v.count("leo_intervals", &mut p.leo_intervals)?;
        v.real("leo_min_length", &mut p.leo_min_length)?;
        v.real("leo_max_length", &mut p.leo_max_length)?;
        v.count("leo_m_max", &mut p.leo_m_max)?;
        v.count("net_period", &mut p.net_period)?;
        v.real("net_eps", &mut p.net_eps)?;
        v.real("preimage_point", &mut p.preimage_point)?;
        v.count("preimage_depth", &mut p.preimage_depth)?;
        v.real("arclength_eps", &mut p.arclength_eps)?;

        let k = sec("classes");
        k.count("n", &mut c.classes.n)?;
        k.real("eps", &mut c.classes.eps)?;
        k.count("saddle_period", &mut c.classes.saddle_period)?;
        k.count("invariance_samples", &mut c.classes.invariance_samples)?;

        let e = sec("example");
        let p = &mut c.example;
        e.real("grid_eps", &mut p.grid_eps)?;
        e.count("n_max", &mut p.n_max)?;
        e.count("samples", &mut p.samples)?;
        e.count("iterations", &mut p.iterations)?;
        e.count("n", &mut p.n)?;
        e.real("eps", &mut p.eps)?;
        e.count("audit_period", &mut p.audit_period)?;
        e.real("lambda_ss", &mut p.lambda_ss)?;
        e.count("flow_returns", &mut p.flow_returns)?;

        let g = sec("plug");
        g.real("tau", &mut c.plug.tau)?;
        g.real("lambda_ss", &mut c.plug.lambda_ss)?;
        g.count("grid_n", &mut c.plug.grid_n)?;
        g.count("portrait_grid", &mut c.plug.portrait_grid)?;

        c.validate()?;
        Ok(c)
    }

    /// Positivity of tolerances, budget caps and parameter domains.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(cfg(format!("{name} must be > 0, got {v}")))
            }
        };
        let within = |name: &str, v: usize, lo: usize, hi: usize| {
            if (lo..=hi).contains(&v) {
                Ok(())
            } else {
                Err(cfg(format!("{name} = {v} is outside [{lo}, {hi}]")))
            }
        };
        if let Some(w) = self.workers {
            within("workers", w, 1, caps::WORKERS)?;
        }
        if self.formats.is_empty() {
            return Err(cfg("at least one output format is required"));
        }
        let t = &self.tolerances;
        positive("tol_root", t.tol_root)?;
        positive("tol_lim", t.tol_lim)?;
        positive("tol_cover", t.tol_cover)?;
        positive("tol_quad", t.tol_quad)?;
        within("n_deriv", t.n_deriv, 1, 1 << 20)?;
        within("box_cap", self.budget.cap, 1, caps::BOX_CAP)?;
        positive("coarsen_tol", self.budget.coarsen_tol)?;

        for (name, m, orientation) in [
            ("map", &self.map, Orientation::Direct),
            ("map_plus", &self.map_plus, Orientation::Direct),
            ("map_minus", &self.map_minus, Orientation::Mirrored),
        ] {
            if m.orientation != orientation {
                return Err(cfg(format!("[{name}] orientation must be {orientation:?}")));
            }
        }
        let s = &self.skew;
        if !(s.mu > 0.0 && s.mu < 1.0) {
            return Err(cfg(format!("[skew] mu = {} must lie in (0, 1)", s.mu)));
        }
        for (name, offs, m) in [
            ("plus_offsets", &s.plus_offsets, &self.map_plus),
            ("minus_offsets", &s.minus_offsets, &self.map_minus),
        ] {
            if offs.len() != m.branches.len() {
                return Err(cfg(format!("[skew] {name} needs one offset per branch ({})", m.branches.len())));
            }
        }
        self.field.base.validate()?;
        positive("support_radius", self.field.support_radius)?;

        let v = &self.verify_1d;
        within("leo_intervals", v.leo_intervals, 1, caps::LEO_INTERVALS)?;
        positive("leo_min_length", v.leo_min_length)?;
        if !(v.leo_min_length <= v.leo_max_length && v.leo_max_length < 1.0) {
            return Err(cfg("leo lengths need leo_min_length <= leo_max_length < 1"));
        }
        within("leo_m_max", v.leo_m_max, 1, caps::LEO_M_MAX)?;
        within("net_period", v.net_period, 1, caps::PERIOD)?;
        positive("net_eps", v.net_eps)?;
        if !(0.0..=1.0).contains(&v.preimage_point) {
            return Err(cfg("preimage_point must lie in [0, 1]"));
        }
        within("preimage_depth", v.preimage_depth, 0, caps::PREIMAGE_DEPTH)?;
        positive("arclength_eps", v.arclength_eps)?;

        let k = &self.classes;
        within("[classes] n", k.n, 4, caps::GENERATION)?;
        positive("[classes] eps", k.eps)?;
        within("saddle_period", k.saddle_period, 1, caps::SADDLE_PERIOD)?;
        within("invariance_samples", k.invariance_samples, 1, caps::SAMPLES)?;

        let e = &self.example;
        if !(e.grid_eps >= caps::MIN_GRID_EPS && e.grid_eps <= 0.5) {
            return Err(cfg(format!("grid_eps = {} is outside [{}, 0.5]", e.grid_eps, caps::MIN_GRID_EPS)));
        }
        within("n_max", e.n_max, 1, caps::PERIOD)?;
        within("samples", e.samples, 1, caps::SAMPLES)?;
        within("iterations", e.iterations, 1, caps::ITERATIONS)?;
        within("[example] n", e.n, 4, caps::GENERATION)?;
        positive("[example] eps", e.eps)?;
        within("audit_period", e.audit_period, 1, caps::AUDIT_PERIOD)?;
        if !(e.lambda_ss < 0.0) {
            return Err(cfg(format!("[example] lambda_ss = {} must be negative", e.lambda_ss)));
        }
        within("flow_returns", e.flow_returns, 1, caps::FLOW_RETURNS)?;

        let p = &self.plug;
        if !(p.tau >= 0.0) {
            return Err(cfg(format!("[plug] tau = {} must be >= 0", p.tau)));
        }
        if !(p.lambda_ss < 0.0) {
            return Err(cfg(format!("[plug] lambda_ss = {} must be negative", p.lambda_ss)));
        }
        within("grid_n", p.grid_n, 8, caps::GRID_N)?;
        within("portrait_grid", p.portrait_grid, 4, caps::PORTRAIT_GRID)?;
        Ok(())
    }

    pub fn skew_map(&self, variant: Variant) -> Result<SkewReturnMap> {
        let m = match variant {
            Variant::G => SkewReturnMap {
                variant,
                minus: self.map_plus.reflect(),
                plus: self.map_plus.clone(),
                mu: self.skew.mu,
                plus_offsets: self.skew.plus_offsets.clone(),
                minus_offsets: self.skew.plus_offsets.clone(),
            },
            Variant::H => SkewReturnMap {
                variant,
                plus: self.map_plus.clone(),
                minus: self.map_minus.clone(),
                mu: self.skew.mu,
                plus_offsets: self.skew.plus_offsets.clone(),
                minus_offsets: self.skew.minus_offsets.clone(),
            },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn da_family(&self) -> DaFamily {
        DaFamily {
            base: self.field.base,
            r_u: self.field.support_radius,
        }
    }

    /// The plug field at the configured `tau`.
    pub fn plug_field(&self) -> Result<PlanarField> {
        self.da_family().perturb(self.plug.tau)
    }
}
