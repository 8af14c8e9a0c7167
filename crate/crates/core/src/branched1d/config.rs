//! Plain-text INI form of a map.
//!
//! ```text
//! [map]
//! branch_point = 0.4
//! d1 = 0.25
//! d_star = 0.5
//! d2 = 0.8
//! expansion = 1.2
//! orientation = direct
//! branches = 4
//!
//! [map.branch0]
//! domain = [0, 0.25]
//! kind = affine
//! coefficients = 0 4
//! limits = 0 1
//! bump0 = 0 0.25 1.8
//! ```
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`.

use ini::{Ini, Properties};

use super::{Branch, BranchedIntervalMap, Bump, Orientation};
use crate::error::{Error, Result};
use crate::interval::Interval;

const MAP_KEYS: &[&str] = &["branch_point", "d1", "d_star", "d2", "expansion", "orientation", "branches"];

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn parse_real(section: &str, key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| cfg(format!("[{section}] {key}: `{raw}` is not a decimal number")))?;
    if !v.is_finite() {
        return Err(cfg(format!("[{section}] {key}: value must be finite")));
    }
    Ok(v)
}

fn parse_reals(section: &str, key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split_whitespace().map(|t| parse_real(section, key, t)).collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

/// Rejects keys outside `allowed`, where a trailing `*` matches any suffix.
pub fn reject_unknown(section: &str, props: &Properties, allowed: &[&str]) -> Result<()> {
    for (k, _) in props.iter() {
        let ok = allowed.iter().any(|a| match a.strip_suffix('*') {
            Some(prefix) => k.starts_with(prefix) && k[prefix.len()..].chars().all(|c| c.is_ascii_digit()),
            None => *a == k,
        });
        if !ok {
            return Err(cfg(format!("[{section}] unknown key `{k}`")));
        }
    }
    Ok(())
}

fn required<'a>(section: &str, props: &'a Properties, key: &str) -> Result<&'a str> {
    props.get(key).ok_or_else(|| cfg(format!("[{section}] missing key `{key}`")))
}

impl BranchedIntervalMap {
    pub fn write_ini(&self, ini: &mut Ini, name: &str) {
        ini.with_section(Some(name))
            .set("branch_point", self.branch_point.to_string())
            .set("d1", self.d1.to_string())
            .set("d_star", self.d_star.to_string())
            .set("d2", self.d2.to_string())
            .set("expansion", self.expansion.to_string())
            .set(
                "orientation",
                match self.orientation {
                    Orientation::Direct => "direct",
                    Orientation::Mirrored => "mirrored",
                },
            )
            .set("branches", self.branches.len().to_string());
        for (k, br) in self.branches.iter().enumerate() {
            let sec = format!("{name}.branch{k}");
            let mut s = ini.with_section(Some(sec.as_str()));
            s.set("domain", br.domain.to_string())
                .set("kind", if br.coeffs.len() <= 2 { "affine" } else { "poly" })
                .set("coefficients", join(&br.coeffs))
                .set("limits", join(&[br.limit_lo, br.limit_hi]));
            for (j, b) in br.bumps.iter().enumerate() {
                s.set(format!("bump{j}"), join(&[b.lo, b.hi, b.amplitude]));
            }
        }
    }

    pub fn to_ini_string(&self, name: &str) -> String {
        let mut ini = Ini::new();
        self.write_ini(&mut ini, name);
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("ini output is utf-8")
    }

    pub fn from_ini_str(text: &str, name: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| cfg(e.to_string()))?;
        Self::from_ini(&ini, name)
    }

    pub fn from_ini(ini: &Ini, name: &str) -> Result<Self> {
        let props = ini.section(Some(name)).ok_or_else(|| cfg(format!("missing section [{name}]")))?;
        reject_unknown(name, props, MAP_KEYS)?;
        let real = |k: &str| required(name, props, k).and_then(|v| parse_real(name, k, v));
        let orientation = match props.get("orientation").unwrap_or("direct").trim() {
            "direct" => Orientation::Direct,
            "mirrored" => Orientation::Mirrored,
            other => return Err(cfg(format!("[{name}] orientation: unknown value `{other}`"))),
        };
        let n: usize = required(name, props, "branches")?
            .trim()
            .parse()
            .map_err(|_| cfg(format!("[{name}] branches must be a count")))?;
        if n == 0 || n > 64 {
            return Err(cfg(format!("[{name}] branches must be between 1 and 64")));
        }
        let mut branches = Vec::with_capacity(n);
        for k in 0..n {
            let sec = format!("{name}.branch{k}");
            let p = ini.section(Some(sec.as_str())).ok_or_else(|| cfg(format!("missing section [{sec}]")))?;
            branches.push(parse_branch(&sec, p)?);
        }
        for s in ini.sections().flatten() {
            if let Some(rest) = s.strip_prefix(&format!("{name}.")) {
                let idx = rest.strip_prefix("branch").and_then(|i| i.parse::<usize>().ok());
                if !idx.is_some_and(|i| i < n) {
                    return Err(cfg(format!("unexpected section [{s}]")));
                }
            }
        }
        Ok(Self {
            branch_point: real("branch_point")?,
            d1: real("d1")?,
            d_star: real("d_star")?,
            d2: real("d2")?,
            expansion: real("expansion")?,
            branches,
            orientation,
        })
    }
}

fn parse_branch(sec: &str, p: &Properties) -> Result<Branch> {
    reject_unknown(sec, p, &["domain", "kind", "coefficients", "limits", "bump*"])?;
    let domain: Interval = required(sec, p, "domain")?
        .parse()
        .map_err(|e: Error| cfg(format!("[{sec}] domain: {e}")))?;
    let coeffs = parse_reals(sec, "coefficients", required(sec, p, "coefficients")?)?;
    match p.get("kind").unwrap_or("poly").trim() {
        "affine" if coeffs.len() == 2 => {}
        "affine" => return Err(cfg(format!("[{sec}] affine branch needs exactly 2 coefficients"))),
        "poly" if !coeffs.is_empty() => {}
        "poly" => return Err(cfg(format!("[{sec}] poly branch needs coefficients"))),
        other => return Err(cfg(format!("[{sec}] kind: unknown value `{other}`"))),
    }
    let mut bumps = Vec::new();
    let mut bump_keys: Vec<(usize, &str)> = p
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("bump").and_then(|i| i.parse().ok()).map(|i| (i, v)))
        .collect();
    bump_keys.sort_by_key(|(i, _)| *i);
    for (_, v) in bump_keys {
        match parse_reals(sec, "bump", v)?.as_slice() {
            [lo, hi, a] if lo < hi => bumps.push(Bump::new(*lo, *hi, *a)),
            _ => return Err(cfg(format!("[{sec}] bump needs `lo hi amplitude` with lo < hi"))),
        }
    }
    let mut br = Branch {
        domain,
        coeffs,
        bumps,
        limit_lo: 0.0,
        limit_hi: 0.0,
    };
    br.refresh_limits();
    if let Some(raw) = p.get("limits") {
        match parse_reals(sec, "limits", raw)?.as_slice() {
            [lo, hi] => {
                br.limit_lo = *lo;
                br.limit_hi = *hi;
            }
            _ => return Err(cfg(format!("[{sec}] limits needs two values"))),
        }
    }
    Ok(br)
}
