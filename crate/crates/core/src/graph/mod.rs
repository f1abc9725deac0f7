//! Graph families with an exact integer height cocycle.
//!
//! Every model is vertex-transitive under a nonunimodular automorphism
//! group whose modular function is `Δ(u, v) = base^(height(v) - height(u))`,
//! with `base = k - 1` for the fixed-end tree family and `base = 2` for the
//! (1,1,2)-oriented 4-regular tree. Heights are stored as integers in units of
//! `log(base)`.

pub(crate) mod registry;
pub(crate) mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use registry::{Coords, EdgeKey, Neighbor, Registry, VertexHandle};

/// Largest supported lattice dimension for [`GraphModel::TreeTimesLattice`].
pub const MAX_LATTICE_DIM: u32 = 4;

/// Edge orbit labels. Anisotropic percolation assigns one probability per orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOrbit {
    Tree,
    Lattice,
    Oriented,
    Unoriented,
    Grandparent,
}

impl EdgeOrbit {
    pub fn label(self) -> &'static str {
        match self {
            EdgeOrbit::Tree => "tree",
            EdgeOrbit::Lattice => "lattice",
            EdgeOrbit::Oriented => "oriented",
            EdgeOrbit::Unoriented => "unoriented",
            EdgeOrbit::Grandparent => "grandparent",
        }
    }
}

impl fmt::Display for EdgeOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EdgeOrbit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tree" => Ok(EdgeOrbit::Tree),
            "lattice" => Ok(EdgeOrbit::Lattice),
            "oriented" => Ok(EdgeOrbit::Oriented),
            "unoriented" => Ok(EdgeOrbit::Unoriented),
            "grandparent" => Ok(EdgeOrbit::Grandparent),
            other => Err(Error::InvalidProbability(format!("unknown edge orbit `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphModel {
    /// `k`-regular tree with the automorphisms fixing one end.
    FixedEndTree { k: u32 },
    /// 4-regular tree with a (1,1,2)-orientation: one outgoing, two incoming
    /// and one unoriented edge at every vertex.
    OrientedTree112,
    /// `T_k × Z^d` with the end-fixing group acting on the tree factor.
    TreeTimesLattice { k: u32, d: u32 },
    /// Fixed-end `k`-regular tree plus an edge from every vertex to its grandparent.
    Grandparent { k: u32 },
}

const TREE_ORBITS: &[EdgeOrbit] = &[EdgeOrbit::Tree];
const ORIENTED_ORBITS: &[EdgeOrbit] = &[EdgeOrbit::Oriented, EdgeOrbit::Unoriented];
const PRODUCT_ORBITS: &[EdgeOrbit] = &[EdgeOrbit::Tree, EdgeOrbit::Lattice];
const GRANDPARENT_ORBITS: &[EdgeOrbit] = &[EdgeOrbit::Tree, EdgeOrbit::Grandparent];

impl GraphModel {
    pub fn fixed_end_tree(k: u32) -> Result<Self> {
        Self::FixedEndTree { k }.validated()
    }

    pub fn tree_times_lattice(k: u32, d: u32) -> Result<Self> {
        Self::TreeTimesLattice { k, d }.validated()
    }

    pub fn grandparent(k: u32) -> Result<Self> {
        Self::Grandparent { k }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            GraphModel::FixedEndTree { k } | GraphModel::Grandparent { k } if k < 3 => {
                Err(Error::InvalidModel(format!("tree degree k must be at least 3, got {k}")))
            }
            GraphModel::TreeTimesLattice { k, .. } if k < 3 => {
                Err(Error::InvalidModel(format!("tree degree k must be at least 3, got {k}")))
            }
            GraphModel::TreeTimesLattice { d, .. } if d == 0 || d > MAX_LATTICE_DIM => Err(
                Error::InvalidModel(format!("lattice dimension d must be in 1..={MAX_LATTICE_DIM}, got {d}")),
            ),
            GraphModel::FixedEndTree { k } | GraphModel::Grandparent { k } if k > 64 => {
                Err(Error::InvalidModel(format!("tree degree k={k} is unreasonably large")))
            }
            m => Ok(m),
        }
    }

    pub fn degree(&self) -> u32 {
        match *self {
            GraphModel::FixedEndTree { k } => k,
            GraphModel::OrientedTree112 => 4,
            GraphModel::TreeTimesLattice { k, d } => k + 2 * d,
            GraphModel::Grandparent { k } => k + 1 + (k - 1) * (k - 1),
        }
    }

    /// Base of the modular function: `Δ(v, u) = base^(height(u) - height(v))`.
    pub fn height_base(&self) -> f64 {
        match *self {
            GraphModel::FixedEndTree { k }
            | GraphModel::TreeTimesLattice { k, .. }
            | GraphModel::Grandparent { k } => f64::from(k - 1),
            GraphModel::OrientedTree112 => 2.0,
        }
    }

    /// Largest height increment across a single edge.
    pub fn heights_per_layer(&self) -> u32 {
        match self {
            GraphModel::Grandparent { .. } => 2,
            _ => 1,
        }
    }

    /// `t0 = sup over edges of log Δ`.
    pub fn t0(&self) -> f64 {
        f64::from(self.heights_per_layer()) * self.height_base().ln()
    }

    /// Whether layers coincide with integer height levels.
    pub fn has_simple_layers(&self) -> bool {
        self.heights_per_layer() == 1
    }

    pub fn orbits(&self) -> &'static [EdgeOrbit] {
        match self {
            GraphModel::FixedEndTree { .. } => TREE_ORBITS,
            GraphModel::OrientedTree112 => ORIENTED_ORBITS,
            GraphModel::TreeTimesLattice { .. } => PRODUCT_ORBITS,
            GraphModel::Grandparent { .. } => GRANDPARENT_ORBITS,
        }
    }

    pub fn orbit_index(&self, orbit: EdgeOrbit) -> Option<usize> {
        self.orbits().iter().position(|&o| o == orbit)
    }

    pub fn is_tree(&self) -> bool {
        matches!(self, GraphModel::FixedEndTree { .. } | GraphModel::OrientedTree112)
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphModel::FixedEndTree { k } => write!(f, "fixed-end-tree:k={k}"),
            GraphModel::OrientedTree112 => f.write_str("oriented-tree-112"),
            GraphModel::TreeTimesLattice { k, d } => write!(f, "tree-x-lattice:k={k},d={d}"),
            GraphModel::Grandparent { k } => write!(f, "grandparent:k={k}"),
        }
    }
}

const FAMILY_NAMES: &[&str] = &["fixed-end-tree", "oriented-tree-112", "tree-x-lattice", "grandparent"];

fn closest_family(name: &str) -> Option<&'static str> {
    FAMILY_NAMES
        .iter()
        .map(|cand| (edit_distance(name, cand), *cand))
        .filter(|(dist, _)| *dist <= 4)
        .min()
        .map(|(_, cand)| cand)
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cur = row[j + 1];
            row[j + 1] = if ca == *cb { prev } else { 1 + prev.min(cur).min(row[j]) };
            prev = cur;
        }
    }
    row[b.len()]
}

fn parse_params(input: &str, params: &str) -> Result<Vec<(String, u32)>> {
    params
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidModel(format!("`{input}`: expected key=value, got `{kv}`")))?;
            let value = value
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidModel(format!("`{input}`: `{value}` is not a positive integer")))?;
            Ok((key.trim().to_string(), value))
        })
        .collect()
}

fn take(params: &[(String, u32)], key: &str, input: &str) -> Result<u32> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidModel(format!("`{input}`: missing parameter `{key}`")))
}

fn reject_extra(params: &[(String, u32)], allowed: &[&str], input: &str) -> Result<()> {
    match params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(Error::InvalidModel(format!("`{input}`: unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

impl FromStr for GraphModel {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let input = input.trim();
        let (family, params) = input.split_once(':').unwrap_or((input, ""));
        let params = parse_params(input, params)?;
        let model = match family {
            "fixed-end-tree" => {
                reject_extra(&params, &["k"], input)?;
                GraphModel::FixedEndTree { k: take(&params, "k", input)? }
            }
            "oriented-tree-112" => {
                reject_extra(&params, &[], input)?;
                GraphModel::OrientedTree112
            }
            "tree-x-lattice" => {
                reject_extra(&params, &["k", "d"], input)?;
                GraphModel::TreeTimesLattice {
                    k: take(&params, "k", input)?,
                    d: take(&params, "d", input)?,
                }
            }
            "grandparent" => {
                reject_extra(&params, &["k"], input)?;
                GraphModel::Grandparent { k: take(&params, "k", input)? }
            }
            other => {
                let hint = closest_family(other)
                    .map(|c| format!(" (did you mean `{c}`?)"))
                    .unwrap_or_default();
                return Err(Error::UnknownModel { input: input.to_string(), hint });
            }
        };
        model.validated()
    }
}
