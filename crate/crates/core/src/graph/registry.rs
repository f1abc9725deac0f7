use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};

use super::store::{GrandparentStore, ProductStore, Store, TreeShape, TreeStore};
use super::{EdgeOrbit, GraphModel};
use crate::error::{Error, Result};

static NEXT_TAG: AtomicU32 = AtomicU32::new(1);

/// A materialized vertex. Only meaningful together with the [`Registry`]
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexHandle {
    pub id: u32,
    /// Height relative to the registry origin, in units of `log(base)`.
    pub height: i32,
    registry: u32,
}

/// Canonical identity of an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: VertexHandle,
    pub orbit: EdgeOrbit,
    pub height_delta: i32,
    pub edge: EdgeKey,
}

/// Model-specific address of a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coords {
    /// Canonical 64-bit identity of the abstract vertex.
    pub canonical: u64,
    /// Tree distance from the origin's tree node.
    pub tree_depth: u32,
    /// Lattice coordinates (empty for pure trees).
    pub lattice: Vec<i32>,
}

#[derive(Debug, Clone)]
pub(crate) enum StoreKind {
    Tree(TreeStore),
    Product(ProductStore),
    Grandparent(GrandparentStore),
}

/// Dispatches `$body` on the concrete store type so hot loops are monomorphized.
macro_rules! with_store {
    ($store:expr, $s:ident => $body:expr) => {
        match $store {
            $crate::graph::registry::StoreKind::Tree($s) => $body,
            $crate::graph::registry::StoreKind::Product($s) => $body,
            $crate::graph::registry::StoreKind::Grandparent($s) => $body,
        }
    };
}
pub(crate) use with_store;

/// Per-task lazily materialized copy of a model around a fixed origin.
///
/// Registries are single-writer; each sampling task owns one.
#[derive(Debug, Clone)]
pub struct Registry {
    model: GraphModel,
    pub(crate) store: StoreKind,
    tag: u32,
}

impl Registry {
    pub fn new(model: GraphModel) -> Self {
        let store = match model {
            GraphModel::FixedEndTree { k } => StoreKind::Tree(TreeStore::new(TreeShape::FixedEnd { k })),
            GraphModel::OrientedTree112 => StoreKind::Tree(TreeStore::new(TreeShape::Oriented112)),
            GraphModel::TreeTimesLattice { k, d } => StoreKind::Product(ProductStore::new(k, d)),
            GraphModel::Grandparent { k } => StoreKind::Grandparent(GrandparentStore::new(k)),
        };
        Registry { model, store, tag: NEXT_TAG.fetch_add(1, Ordering::Relaxed) }
    }

    pub fn model(&self) -> GraphModel {
        self.model
    }

    /// Drops every vertex except the origin. Previously issued handles become foreign.
    pub fn clear(&mut self) {
        with_store!(&mut self.store, s => s.reset());
        self.tag = NEXT_TAG.fetch_add(1, Ordering::Relaxed);
    }

    pub fn len(&self) -> usize {
        with_store!(&self.store, s => s.len())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> VertexHandle {
        self.handle(0)
    }

    pub(crate) fn handle(&self, id: u32) -> VertexHandle {
        let height = with_store!(&self.store, s => s.height(id));
        VertexHandle { id, height, registry: self.tag }
    }

    fn check(&self, v: VertexHandle) -> Result<()> {
        if v.registry == self.tag && (v.id as usize) < self.len() {
            Ok(())
        } else {
            Err(Error::ForeignHandle)
        }
    }

    /// All `degree` neighbors of `v`, materializing unseen ones.
    pub fn neighbors(&mut self, v: VertexHandle) -> Result<Vec<Neighbor>> {
        self.check(v)?;
        let orbits = self.model.orbits();
        let raw: Vec<(u32, usize, i32, u64)> = with_store!(&mut self.store, s => {
            (0..s.slot_count())
                .map(|slot| {
                    let key = s.edge_key(v.id, slot);
                    let w = s.materialize(v.id, slot);
                    (w, s.slot_orbit(slot), s.slot_delta(slot), key)
                })
                .collect()
        });
        Ok(raw
            .into_iter()
            .map(|(w, orbit, delta, key)| Neighbor {
                vertex: self.handle(w),
                orbit: orbits[orbit],
                height_delta: delta,
                edge: EdgeKey(key),
            })
            .collect())
    }

    pub fn graph_distance(&self, u: VertexHandle, v: VertexHandle) -> Result<u32> {
        self.check(u)?;
        self.check(v)?;
        Ok(with_store!(&self.store, s => s.distance(u.id, v.id)))
    }

    pub fn edge_key(&mut self, u: VertexHandle, v: VertexHandle) -> Result<EdgeKey> {
        self.check(v)?;
        self.neighbors(u)?
            .into_iter()
            .find(|n| n.vertex.id == v.id)
            .map(|n| n.edge)
            .ok_or(Error::NotAdjacent(u.id, v.id))
    }

    /// `Δ(u, v)`.
    pub fn modular_function(&self, u: VertexHandle, v: VertexHandle) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.model.height_base().powi(v.height - u.height))
    }

    pub fn coords(&self, v: VertexHandle) -> Result<Coords> {
        self.check(v)?;
        Ok(match &self.store {
            StoreKind::Tree(s) => Coords {
                canonical: s.hash(v.id),
                tree_depth: s.origin_distance(v.id),
                lattice: Vec::new(),
            },
            StoreKind::Grandparent(s) => Coords {
                canonical: s.hash(v.id),
                tree_depth: s.distance(0, v.id),
                lattice: Vec::new(),
            },
            StoreKind::Product(s) => Coords {
                canonical: s.hash(v.id),
                tree_depth: s.origin_distance(v.id)
                    - s.lattice_point(v.id).iter().map(|c| c.unsigned_abs()).sum::<u32>(),
                lattice: s.lattice_point(v.id).to_vec(),
            },
        })
    }

    pub(crate) fn canonical_hash(&self, id: u32) -> u64 {
        with_store!(&self.store, s => s.hash(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deltas(reg: &mut Registry, v: VertexHandle) -> Vec<i32> {
        let mut d: Vec<i32> = reg.neighbors(v).unwrap().iter().map(|n| n.height_delta).collect();
        d.sort_unstable();
        d
    }

    #[test]
    fn origin_has_height_zero() {
        for m in [
            GraphModel::FixedEndTree { k: 4 },
            GraphModel::OrientedTree112,
            GraphModel::TreeTimesLattice { k: 4, d: 2 },
            GraphModel::Grandparent { k: 3 },
        ] {
            let reg = Registry::new(m);
            assert_eq!(reg.origin().height, 0);
            assert_eq!(reg.origin(), reg.origin());
        }
        let reg = Registry::new(GraphModel::TreeTimesLattice { k: 4, d: 2 });
        assert_eq!(reg.coords(reg.origin()).unwrap().lattice, vec![0, 0]);
    }

    #[test]
    fn neighbor_lists_match_models() {
        let mut reg = Registry::new(GraphModel::FixedEndTree { k: 4 });
        let o = reg.origin();
        assert_eq!(deltas(&mut reg, o), vec![-1, -1, -1, 1]);

        let mut reg = Registry::new(GraphModel::OrientedTree112);
        let o = reg.origin();
        let ns = reg.neighbors(o).unwrap();
        assert_eq!(deltas(&mut reg, o), vec![-1, -1, 0, 1]);
        let flat = ns.iter().find(|n| n.height_delta == 0).unwrap();
        assert_eq!(flat.orbit, EdgeOrbit::Unoriented);
        // Any other vertex has the same pattern.
        let child = ns.iter().find(|n| n.height_delta == -1).unwrap().vertex;
        assert_eq!(deltas(&mut reg, child), vec![-1, -1, 0, 1]);

        let mut reg = Registry::new(GraphModel::TreeTimesLattice { k: 4, d: 1 });
        let o = reg.origin();
        let ns = reg.neighbors(o).unwrap();
        let tree: Vec<i32> = ns.iter().filter(|n| n.orbit == EdgeOrbit::Tree).map(|n| n.height_delta).collect();
        let lattice: Vec<i32> =
            ns.iter().filter(|n| n.orbit == EdgeOrbit::Lattice).map(|n| n.height_delta).collect();
        assert_eq!(tree.len(), 4);
        assert_eq!(tree.iter().sum::<i32>(), -2);
        assert_eq!(lattice, vec![0, 0]);
    }

    #[test]
    fn edges_reported_identically_from_both_ends() {
        for m in [
            GraphModel::FixedEndTree { k: 3 },
            GraphModel::OrientedTree112,
            GraphModel::TreeTimesLattice { k: 3, d: 1 },
            GraphModel::Grandparent { k: 3 },
        ] {
            let mut reg = Registry::new(m);
            let o = reg.origin();
            for n in reg.neighbors(o).unwrap() {
                let back = reg.neighbors(n.vertex).unwrap();
                let rev = back.iter().find(|b| b.vertex == o).expect("adjacency is symmetric");
                assert_eq!(rev.edge, n.edge, "{m}");
                assert_eq!(rev.orbit, n.orbit);
                assert_eq!(rev.height_delta, -n.height_delta);
                assert_eq!(reg.edge_key(n.vertex, o).unwrap(), reg.edge_key(o, n.vertex).unwrap());
            }
        }
    }

    #[test]
    fn distances() {
        let mut reg = Registry::new(GraphModel::FixedEndTree { k: 4 });
        let o = reg.origin();
        let ns = reg.neighbors(o).unwrap();
        let parent = ns.iter().find(|n| n.height_delta == 1).unwrap().vertex;
        let siblings: Vec<VertexHandle> =
            ns.iter().filter(|n| n.height_delta == -1).map(|n| n.vertex).collect();
        let gp = reg.neighbors(parent).unwrap().into_iter().find(|n| n.height_delta == 1).unwrap().vertex;
        assert_eq!(reg.graph_distance(o, gp).unwrap(), 2);
        assert_eq!(reg.graph_distance(siblings[0], siblings[1]).unwrap(), 2);

        let mut reg = Registry::new(GraphModel::TreeTimesLattice { k: 4, d: 1 });
        let mut v = reg.origin();
        for _ in 0..3 {
            v = reg.neighbors(v).unwrap().into_iter().find(|n| n.orbit == EdgeOrbit::Lattice).unwrap().vertex;
        }
        assert_eq!(reg.coords(v).unwrap().lattice.iter().map(|c| c.abs()).sum::<i32>(), 3);
        assert_eq!(reg.graph_distance(reg.origin(), v).unwrap(), 3);
    }

    #[test]
    fn distinct_directions_have_distinct_keys() {
        let mut reg = Registry::new(GraphModel::TreeTimesLattice { k: 4, d: 2 });
        let o = reg.origin();
        let mut keys: Vec<EdgeKey> = reg.neighbors(o).unwrap().iter().map(|n| n.edge).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 8);
    }

    #[test]
    fn foreign_and_non_adjacent_handles_are_rejected() {
        let mut a = Registry::new(GraphModel::FixedEndTree { k: 4 });
        let b = Registry::new(GraphModel::FixedEndTree { k: 4 });
        assert_eq!(a.neighbors(b.origin()), Err(Error::ForeignHandle));
        let o = a.origin();
        let ns = a.neighbors(o).unwrap();
        let (x, y) = (ns[1].vertex, ns[2].vertex);
        assert!(matches!(a.edge_key(x, y), Err(Error::NotAdjacent(..))));
        a.clear();
        assert_eq!(a.neighbors(o), Err(Error::ForeignHandle));
    }
}
