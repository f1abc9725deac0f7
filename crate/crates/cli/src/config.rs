//! Config files and parameter resolution.
//!
//! A config file is TOML with the same keys as the long flags (dashes become
//! underscores). Flags override file values, which override defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tiltlab_core::estimators::DepthRule;

/// A number or a string (`p = 0.2` or `p = "tree=0.3,lattice=0.01"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn text(&self) -> String {
        match self {
            Scalar::Number(x) => format!("{x}"),
            Scalar::Text(s) => s.clone(),
        }
    }
}

/// A single value or a list (`lambda = 0.3` or `lambda = [0.3, 0.7]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(Scalar),
    Many(Vec<f64>),
}

impl Values {
    pub fn text(&self) -> String {
        match self {
            Values::One(s) => s.text(),
            Values::Many(v) => v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub p: Option<Scalar>,
    pub lambda: Option<Values>,
    pub h: Option<f64>,
    pub delta: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub budget_vertices: Option<u32>,
    pub budget_height: Option<i32>,
    pub slab: Option<String>,
    pub n_max: Option<i32>,
    pub depth: Option<Scalar>,
    pub k_max: Option<i32>,
    pub thresholds: Option<Values>,
    pub slope_window: Option<String>,
    pub p_tree: Option<Values>,
    pub p_lattice: Option<Values>,
    pub lambdas: Option<Values>,
    pub tolerance: Option<f64>,
    pub margin: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Parses `"0.1,0.2"`, `"0.1:0.5:0.1"` (inclusive range) or a single number.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("`{s}` is not a number")))
            .collect::<Result<_>>()?;
        let [lo, hi, step] = parts[..] else { bail!("range must be lo:hi:step, got `{text}`") };
        if !(step > 0.0) || hi < lo {
            bail!("range `{text}` needs lo <= hi and a positive step");
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| round12(lo + step * i as f64)).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("`{s}` is not a number")))
        .collect()
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

pub fn parse_depth(text: &str) -> Result<DepthRule> {
    let text = text.trim();
    if text == "auto" {
        return Ok(DepthRule::default());
    }
    let d: i32 = text.parse().with_context(|| format!("depth must be `auto` or an integer, got `{text}`"))?;
    if d < 0 {
        bail!("depth must be nonnegative, got {d}");
    }
    Ok(DepthRule::Fixed(d))
}
