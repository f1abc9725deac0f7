//! Separating layers and slabs.
//!
//! A frame anchored at a vertex `v` with offset `U in (0, 1)` puts `x` in
//! layer `n` when `n + U - 1 <= logbar Δ(v, x) <= n + U`, where `logbar` is
//! the logarithm in units of `t0`. With integer heights measured in units of
//! `t0 / heights_per_layer` this is `n = ceil(height / heights_per_layer - U)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphModel, VertexHandle};
use crate::rng::{mix64, open_unit_f64};

const FRAME_SALT: u64 = 0x6c62_272e_07bb_0142;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerFrame {
    /// Height of the anchor vertex.
    pub origin_height: i32,
    pub offset: f64,
    pub t0: f64,
    pub heights_per_layer: u32,
}

impl LayerFrame {
    /// Frame anchored at `origin` with an offset drawn from `seed`.
    pub fn new(model: &GraphModel, origin: VertexHandle, seed: u64) -> Self {
        Self::anchored(model, origin.height, seed)
    }

    pub fn anchored(model: &GraphModel, origin_height: i32, seed: u64) -> Self {
        Self::with_offset(model, origin_height, open_unit_f64(mix64(seed ^ FRAME_SALT)))
    }

    pub fn with_offset(model: &GraphModel, origin_height: i32, offset: f64) -> Self {
        debug_assert!(offset > 0.0 && offset < 1.0);
        LayerFrame { origin_height, offset, t0: model.t0(), heights_per_layer: model.heights_per_layer() }
    }

    /// Same offset, re-anchored at another height.
    pub fn reanchored(&self, origin_height: i32) -> Self {
        LayerFrame { origin_height, ..*self }
    }

    #[inline]
    pub fn layer_of_height(&self, height: i32) -> i32 {
        let rel = height - self.origin_height;
        if self.heights_per_layer == 1 {
            rel
        } else {
            (f64::from(rel) / f64::from(self.heights_per_layer) - self.offset).ceil() as i32
        }
    }

    pub fn layer_index(&self, v: VertexHandle) -> i32 {
        self.layer_of_height(v.height)
    }

    pub fn in_slab(&self, v: VertexHandle, slab: SlabSpec) -> bool {
        slab.contains(self.layer_index(v))
    }
}

/// Closed band of layers `lo..=hi`; `None` is an infinite end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlabSpec {
    pub lo: Option<i32>,
    pub hi: Option<i32>,
}

impl SlabSpec {
    pub const EVERYTHING: SlabSpec = SlabSpec { lo: None, hi: None };

    pub fn new(lo: Option<i32>, hi: Option<i32>) -> Result<Self> {
        match (lo, hi) {
            (Some(l), Some(h)) if l > h => Err(Error::InvalidSlab(format!("lower end {l} exceeds upper end {h}"))),
            _ => Ok(SlabSpec { lo, hi }),
        }
    }

    pub fn bounded(lo: i32, hi: i32) -> Result<Self> {
        Self::new(Some(lo), Some(hi))
    }

    #[inline]
    pub fn contains(&self, layer: i32) -> bool {
        self.lo.map_or(true, |l| layer >= l) && self.hi.map_or(true, |h| layer <= h)
    }
}

impl Default for SlabSpec {
    fn default() -> Self {
        Self::EVERYTHING
    }
}

impl fmt::Display for SlabSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some(l) => write!(f, "{l}")?,
            None => f.write_str("-inf")?,
        }
        f.write_str(":")?;
        match self.hi {
            Some(h) => write!(f, "{h}"),
            None => f.write_str("+inf"),
        }
    }
}

impl FromStr for SlabSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidSlab(format!("expected lo:hi, got `{s}`")))?;
        let end = |text: &str, inf: &str| -> Result<Option<i32>> {
            let text = text.trim();
            if text == inf || (inf == "+inf" && text == "inf") {
                Ok(None)
            } else {
                text.parse::<i32>()
                    .map(Some)
                    .map_err(|_| Error::InvalidSlab(format!("`{text}` is neither an integer nor {inf}")))
            }
        };
        SlabSpec::new(end(lo, "-inf")?, end(hi, "+inf")?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Registry;
    use proptest::prelude::*;

    #[test]
    fn frames_are_deterministic() {
        let m = GraphModel::FixedEndTree { k: 4 };
        let reg = Registry::new(m);
        let a = LayerFrame::new(&m, reg.origin(), 11);
        let b = LayerFrame::new(&m, reg.origin(), 11);
        assert_eq!(a, b);
        assert!(a.offset > 0.0 && a.offset < 1.0);
        assert_eq!(a.layer_index(reg.origin()), 0);
        assert_ne!(a.offset, LayerFrame::new(&m, reg.origin(), 12).offset);
    }

    #[test]
    fn simple_layers_follow_height() {
        let m = GraphModel::FixedEndTree { k: 4 };
        let f = LayerFrame::with_offset(&m, 0, 0.37);
        assert_eq!(f.layer_of_height(0), 0);
        assert_eq!(f.layer_of_height(-3), -3);
    }

    #[test]
    fn slab_membership() {
        let m = GraphModel::FixedEndTree { k: 4 };
        let f = LayerFrame::with_offset(&m, 0, 0.5);
        assert!(SlabSpec::EVERYTHING.contains(f.layer_of_height(-1_000_000)));
        assert!(!SlabSpec::bounded(0, 3).unwrap().contains(f.layer_of_height(5)));
        assert!(SlabSpec::bounded(0, 0).unwrap().contains(f.layer_of_height(0)));
        assert!(SlabSpec::bounded(2, 1).is_err());
    }

    #[test]
    fn slab_parsing() {
        assert_eq!("-inf:+inf".parse::<SlabSpec>().unwrap(), SlabSpec::EVERYTHING);
        assert_eq!("-16:4".parse::<SlabSpec>().unwrap(), SlabSpec::bounded(-16, 4).unwrap());
        assert_eq!("0:+inf".parse::<SlabSpec>().unwrap(), SlabSpec { lo: Some(0), hi: None });
        assert!("3".parse::<SlabSpec>().is_err());
        assert!("a:b".parse::<SlabSpec>().is_err());
        assert!("4:1".parse::<SlabSpec>().is_err());
        let s = SlabSpec { lo: None, hi: Some(-2) };
        assert_eq!(s.to_string().parse::<SlabSpec>().unwrap(), s);
    }

    #[test]
    fn grandparent_layers_are_half_heights() {
        let m = GraphModel::Grandparent { k: 3 };
        let f = LayerFrame::with_offset(&m, 0, 0.3);
        assert_eq!(f.layer_of_height(0), 0);
        assert_eq!(f.layer_of_height(1), 1);
        assert_eq!(f.layer_of_height(2), 1);
        assert_eq!(f.layer_of_height(-1), 0);
        let g = LayerFrame::with_offset(&m, 0, 0.7);
        assert_eq!(g.layer_of_height(1), 0);
    }

    proptest! {
        #[test]
        fn height_equals_layer_for_any_offset(h in -10_000i32..10_000, u in 0.0001f64..0.9999) {
            let f = LayerFrame::with_offset(&GraphModel::OrientedTree112, 0, u);
            prop_assert_eq!(f.layer_of_height(h), h);
        }

        #[test]
        fn reanchoring_shifts_layers(
            hx in -200i32..200, hu in -200i32..200, u in 0.0001f64..0.9999, gp in any::<bool>()
        ) {
            let m = if gp { GraphModel::Grandparent { k: 3 } } else { GraphModel::FixedEndTree { k: 4 } };
            let hpl = m.heights_per_layer() as i32;
            // Anchors must differ by a whole number of layers to share the offset.
            let hu = hu * hpl;
            let f = LayerFrame::with_offset(&m, 0, u);
            let k = f.layer_of_height(hu);
            let g = f.reanchored(hu);
            prop_assert_eq!(g.layer_of_height(hx), f.layer_of_height(hx) - k);
        }

        #[test]
        fn edges_cross_at_most_one_boundary(h in -500i32..500, u in 0.0001f64..0.9999, delta in -2i32..=2) {
            let f = LayerFrame::with_offset(&GraphModel::Grandparent { k: 4 }, 0, u);
            prop_assert!((f.layer_of_height(h + delta) - f.layer_of_height(h)).abs() <= 1);
        }
    }
}
