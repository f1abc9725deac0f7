//! Lazily materialized vertex stores.
//!
//! Vertex ids are dense `u32`s in materialization order, reset per sample.
//! Each vertex also carries a 64-bit canonical hash that depends only on the
//! abstract vertex (its position relative to the origin), not on the order in
//! which it was reached. Edge keys are built from these hashes, so the same
//! edge gets the same key from either endpoint and across explorations that
//! share an origin.

use rustc_hash::FxHashMap;

use crate::graph::MAX_LATTICE_DIM;
use crate::rng::mix64;

pub(crate) const NONE: u32 = u32::MAX;

const ORIGIN_HASH: u64 = 0x243f_6a88_85a3_08d3;
const TREE_EDGE_SALT: u64 = 0x1319_8a2e_0370_7344;
const GRANDPARENT_EDGE_SALT: u64 = 0xa409_3822_299f_31d0;
const LATTICE_SALT: u64 = 0x082e_fa98_ec4e_6c89;
const AXIS_SALT: u64 = 0x4528_21e6_38d0_1377;

#[inline]
pub(crate) fn derive_hash(parent: u64, slot: usize) -> u64 {
    mix64(parent ^ mix64(slot as u64 + 0x51))
}

#[inline]
fn pair_key(a: u64, b: u64, salt: u64) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    mix64(lo ^ mix64(hi ^ salt))
}

/// Operations the explorer needs from a lazily grown graph.
pub(crate) trait Store {
    fn slot_count(&self) -> usize;
    fn len(&self) -> usize;
    fn reset(&mut self);
    fn height(&self, v: u32) -> i32;
    fn hash(&self, v: u32) -> u64;
    fn slot_delta(&self, slot: usize) -> i32;
    /// Index into the model's orbit list.
    fn slot_orbit(&self, slot: usize) -> usize;
    /// Cached neighbor id, or [`NONE`] if not linked yet. A `NONE` result does
    /// not imply the neighbor is unmaterialized.
    fn linked(&self, v: u32, slot: usize) -> u32;
    fn edge_key(&self, v: u32, slot: usize) -> u64;
    fn materialize(&mut self, v: u32, slot: usize) -> u32;
    fn origin_distance(&self, v: u32) -> u32;
    fn distance(&self, u: u32, v: u32) -> u32;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TreeShape {
    /// Slot 0 is the parent (toward the fixed end), slots `1..k` are children.
    FixedEnd { k: u32 },
    /// Slot 0 outgoing (+1), slots 1 and 2 incoming (-1), slot 3 unoriented.
    Oriented112,
}

#[derive(Debug, Clone)]
pub(crate) struct TreeStore {
    slots: usize,
    deltas: Vec<i32>,
    orbits: Vec<usize>,
    reverse: Vec<usize>,
    links: Vec<u32>,
    height: Vec<i32>,
    hash: Vec<u64>,
    back: Vec<u32>,
    dist0: Vec<u32>,
}

impl TreeStore {
    pub(crate) fn new(shape: TreeShape) -> Self {
        let (deltas, orbits, reverse) = match shape {
            TreeShape::FixedEnd { k } => {
                let k = k as usize;
                let mut deltas = vec![-1; k];
                deltas[0] = 1;
                let mut reverse = vec![0; k];
                reverse[0] = 1;
                (deltas, vec![0; k], reverse)
            }
            TreeShape::Oriented112 => (vec![1, -1, -1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 3]),
        };
        let mut store = TreeStore {
            slots: deltas.len(),
            deltas,
            orbits,
            reverse,
            links: Vec::new(),
            height: Vec::new(),
            hash: Vec::new(),
            back: Vec::new(),
            dist0: Vec::new(),
        };
        store.reset();
        store
    }

    fn push(&mut self, height: i32, hash: u64, back: u32, dist0: u32) -> u32 {
        let id = self.height.len() as u32;
        self.height.push(height);
        self.hash.push(hash);
        self.back.push(back);
        self.dist0.push(dist0);
        self.links.extend(std::iter::repeat(NONE).take(self.slots));
        id
    }

    #[inline]
    pub(crate) fn link(&self, v: u32, slot: usize) -> u32 {
        self.links[v as usize * self.slots + slot]
    }

    #[inline]
    pub(crate) fn neighbor_hash(&self, v: u32, slot: usize) -> u64 {
        match self.link(v, slot) {
            NONE => derive_hash(self.hash[v as usize], slot),
            w => self.hash[w as usize],
        }
    }

    #[inline]
    pub(crate) fn tree_edge_key(&self, v: u32, slot: usize) -> u64 {
        pair_key(self.hash[v as usize], self.neighbor_hash(v, slot), TREE_EDGE_SALT)
    }

    pub(crate) fn slot_toward(&self, from: u32, to: u32) -> Option<usize> {
        (0..self.slots).find(|&s| self.link(from, s) == to)
    }

    pub(crate) fn tree_distance(&self, u: u32, v: u32) -> u32 {
        let (mut a, mut b) = (u, v);
        let mut d = 0;
        while self.dist0[a as usize] > self.dist0[b as usize] {
            a = self.back[a as usize];
            d += 1;
        }
        while self.dist0[b as usize] > self.dist0[a as usize] {
            b = self.back[b as usize];
            d += 1;
        }
        while a != b {
            a = self.back[a as usize];
            b = self.back[b as usize];
            d += 2;
        }
        d
    }
}

impl Store for TreeStore {
    fn slot_count(&self) -> usize {
        self.slots
    }

    fn len(&self) -> usize {
        self.height.len()
    }

    fn reset(&mut self) {
        self.links.clear();
        self.height.clear();
        self.hash.clear();
        self.back.clear();
        self.dist0.clear();
        self.push(0, ORIGIN_HASH, NONE, 0);
    }

    #[inline]
    fn height(&self, v: u32) -> i32 {
        self.height[v as usize]
    }

    #[inline]
    fn hash(&self, v: u32) -> u64 {
        self.hash[v as usize]
    }

    #[inline]
    fn slot_delta(&self, slot: usize) -> i32 {
        self.deltas[slot]
    }

    #[inline]
    fn slot_orbit(&self, slot: usize) -> usize {
        self.orbits[slot]
    }

    #[inline]
    fn linked(&self, v: u32, slot: usize) -> u32 {
        self.link(v, slot)
    }

    #[inline]
    fn edge_key(&self, v: u32, slot: usize) -> u64 {
        self.tree_edge_key(v, slot)
    }

    fn materialize(&mut self, v: u32, slot: usize) -> u32 {
        let existing = self.link(v, slot);
        if existing != NONE {
            return existing;
        }
        let vi = v as usize;
        let w = self.push(
            self.height[vi] + self.deltas[slot],
            derive_hash(self.hash[vi], slot),
            v,
            self.dist0[vi] + 1,
        );
        let back_slot = self.reverse[slot];
        self.links[vi * self.slots + slot] = w;
        self.links[w as usize * self.slots + back_slot] = v;
        w
    }

    #[inline]
    fn origin_distance(&self, v: u32) -> u32 {
        self.dist0[v as usize]
    }

    fn distance(&self, u: u32, v: u32) -> u32 {
        self.tree_distance(u, v)
    }
}

type LatticePoint = [i32; MAX_LATTICE_DIM as usize];

/// `T_k × Z^d`. The tree factor lives in its own [`TreeStore`].
#[derive(Debug, Clone)]
pub(crate) struct ProductStore {
    tree: TreeStore,
    k: usize,
    d: usize,
    tree_of: Vec<u32>,
    point: Vec<LatticePoint>,
    hash: Vec<u64>,
    links: Vec<u32>,
    index: FxHashMap<(u32, LatticePoint), u32>,
}

impl ProductStore {
    pub(crate) fn new(k: u32, d: u32) -> Self {
        let mut store = ProductStore {
            tree: TreeStore::new(TreeShape::FixedEnd { k }),
            k: k as usize,
            d: d as usize,
            tree_of: Vec::new(),
            point: Vec::new(),
            hash: Vec::new(),
            links: Vec::new(),
            index: FxHashMap::default(),
        };
        store.reset();
        store
    }

    fn point_hash(&self, z: &LatticePoint) -> u64 {
        let mut h = LATTICE_SALT;
        for &c in &z[..self.d] {
            h = mix64(h ^ u64::from(c as u32));
        }
        h
    }

    #[inline]
    fn vertex_hash(&self, tree_hash: u64, z: &LatticePoint) -> u64 {
        mix64(tree_hash ^ self.point_hash(z))
    }

    fn intern(&mut self, t: u32, z: LatticePoint) -> u32 {
        if let Some(&id) = self.index.get(&(t, z)) {
            return id;
        }
        let id = self.tree_of.len() as u32;
        let hash = self.vertex_hash(self.tree.hash(t), &z);
        self.tree_of.push(t);
        self.point.push(z);
        self.hash.push(hash);
        self.links.extend(std::iter::repeat(NONE).take(self.k + 2 * self.d));
        self.index.insert((t, z), id);
        id
    }

    pub(crate) fn lattice_point(&self, v: u32) -> &[i32] {
        &self.point[v as usize][..self.d]
    }

    #[inline]
    fn stride(&self) -> usize {
        self.k + 2 * self.d
    }

    #[inline]
    fn axis_of(&self, slot: usize) -> (usize, i32) {
        let rel = slot - self.k;
        (rel / 2, if rel % 2 == 0 { 1 } else { -1 })
    }
}

impl Store for ProductStore {
    fn slot_count(&self) -> usize {
        self.stride()
    }

    fn len(&self) -> usize {
        self.tree_of.len()
    }

    fn reset(&mut self) {
        self.tree.reset();
        self.tree_of.clear();
        self.point.clear();
        self.hash.clear();
        self.links.clear();
        self.index.clear();
        self.intern(0, [0; MAX_LATTICE_DIM as usize]);
    }

    #[inline]
    fn height(&self, v: u32) -> i32 {
        self.tree.height(self.tree_of[v as usize])
    }

    #[inline]
    fn hash(&self, v: u32) -> u64 {
        self.hash[v as usize]
    }

    #[inline]
    fn slot_delta(&self, slot: usize) -> i32 {
        if slot < self.k {
            self.tree.slot_delta(slot)
        } else {
            0
        }
    }

    #[inline]
    fn slot_orbit(&self, slot: usize) -> usize {
        usize::from(slot >= self.k)
    }

    #[inline]
    fn linked(&self, v: u32, slot: usize) -> u32 {
        self.links[v as usize * self.stride() + slot]
    }

    fn edge_key(&self, v: u32, slot: usize) -> u64 {
        let t = self.tree_of[v as usize];
        let z = &self.point[v as usize];
        if slot < self.k {
            mix64(self.tree.tree_edge_key(t, slot) ^ self.point_hash(z))
        } else {
            let (axis, sign) = self.axis_of(slot);
            let mut low = *z;
            if sign < 0 {
                low[axis] -= 1;
            }
            mix64(self.tree.hash(t) ^ mix64(self.point_hash(&low) ^ AXIS_SALT ^ axis as u64))
        }
    }

    fn materialize(&mut self, v: u32, slot: usize) -> u32 {
        let existing = self.linked(v, slot);
        if existing != NONE {
            return existing;
        }
        let t = self.tree_of[v as usize];
        let mut z = self.point[v as usize];
        let (w, back_slot) = if slot < self.k {
            let t2 = self.tree.materialize(t, slot);
            let back = self.tree.slot_toward(t2, t).expect("tree links are symmetric");
            (self.intern(t2, z), back)
        } else {
            let (axis, sign) = self.axis_of(slot);
            z[axis] += sign;
            (self.intern(t, z), if sign > 0 { slot + 1 } else { slot - 1 })
        };
        let stride = self.stride();
        self.links[v as usize * stride + slot] = w;
        self.links[w as usize * stride + back_slot] = v;
        w
    }

    fn origin_distance(&self, v: u32) -> u32 {
        let l1: u32 = self.lattice_point(v).iter().map(|c| c.unsigned_abs()).sum();
        self.tree.origin_distance(self.tree_of[v as usize]) + l1
    }

    fn distance(&self, u: u32, v: u32) -> u32 {
        let l1: u32 = self
            .lattice_point(u)
            .iter()
            .zip(self.lattice_point(v))
            .map(|(a, b)| a.abs_diff(*b))
            .sum();
        self.tree.tree_distance(self.tree_of[u as usize], self.tree_of[v as usize]) + l1
    }
}

#[derive(Debug, Clone, Copy)]
enum GpSlot {
    Tree(usize),
    Up2,
    Down2(usize, usize),
}

/// Grandparent graph over the fixed-end `k`-regular tree. Vertex ids are the
/// tree store's ids; intermediate tree nodes are materialized as needed.
#[derive(Debug, Clone)]
pub(crate) struct GrandparentStore {
    tree: TreeStore,
    k: usize,
}

impl GrandparentStore {
    pub(crate) fn new(k: u32) -> Self {
        GrandparentStore { tree: TreeStore::new(TreeShape::FixedEnd { k }), k: k as usize }
    }

    #[inline]
    fn decode(&self, slot: usize) -> GpSlot {
        if slot < self.k {
            GpSlot::Tree(slot)
        } else if slot == self.k {
            GpSlot::Up2
        } else {
            let g = slot - self.k - 1;
            GpSlot::Down2(g / (self.k - 1) + 1, g % (self.k - 1) + 1)
        }
    }

    fn two_step_hash(&self, v: u32, first: usize, second: usize) -> u64 {
        match self.tree.link(v, first) {
            NONE => derive_hash(derive_hash(self.tree.hash(v), first), second),
            mid => self.tree.neighbor_hash(mid, second),
        }
    }

    fn two_step_link(&self, v: u32, first: usize, second: usize) -> u32 {
        match self.tree.link(v, first) {
            NONE => NONE,
            mid => self.tree.link(mid, second),
        }
    }

    /// Distance in the grandparent graph given the tree path shape.
    fn distance_from_tree(tree_distance: u32, height_u: i32, height_v: i32) -> u32 {
        let dt = tree_distance as i64;
        let up = (dt + i64::from(height_v) - i64::from(height_u)) / 2;
        let down = dt - up;
        ((up + 1) / 2 + (down + 1) / 2) as u32
    }
}

impl Store for GrandparentStore {
    fn slot_count(&self) -> usize {
        self.k + 1 + (self.k - 1) * (self.k - 1)
    }

    fn len(&self) -> usize {
        self.tree.len()
    }

    fn reset(&mut self) {
        self.tree.reset();
    }

    #[inline]
    fn height(&self, v: u32) -> i32 {
        self.tree.height(v)
    }

    #[inline]
    fn hash(&self, v: u32) -> u64 {
        self.tree.hash(v)
    }

    #[inline]
    fn slot_delta(&self, slot: usize) -> i32 {
        match self.decode(slot) {
            GpSlot::Tree(s) => self.tree.slot_delta(s),
            GpSlot::Up2 => 2,
            GpSlot::Down2(..) => -2,
        }
    }

    #[inline]
    fn slot_orbit(&self, slot: usize) -> usize {
        usize::from(slot >= self.k)
    }

    fn linked(&self, v: u32, slot: usize) -> u32 {
        match self.decode(slot) {
            GpSlot::Tree(s) => self.tree.link(v, s),
            GpSlot::Up2 => self.two_step_link(v, 0, 0),
            GpSlot::Down2(i, j) => self.two_step_link(v, i, j),
        }
    }

    fn edge_key(&self, v: u32, slot: usize) -> u64 {
        let target = match self.decode(slot) {
            GpSlot::Tree(s) => return self.tree.tree_edge_key(v, s),
            GpSlot::Up2 => self.two_step_hash(v, 0, 0),
            GpSlot::Down2(i, j) => self.two_step_hash(v, i, j),
        };
        pair_key(self.tree.hash(v), target, GRANDPARENT_EDGE_SALT)
    }

    fn materialize(&mut self, v: u32, slot: usize) -> u32 {
        match self.decode(slot) {
            GpSlot::Tree(s) => self.tree.materialize(v, s),
            GpSlot::Up2 => {
                let mid = self.tree.materialize(v, 0);
                self.tree.materialize(mid, 0)
            }
            GpSlot::Down2(i, j) => {
                let mid = self.tree.materialize(v, i);
                self.tree.materialize(mid, j)
            }
        }
    }

    fn origin_distance(&self, v: u32) -> u32 {
        Self::distance_from_tree(self.tree.origin_distance(v), 0, self.tree.height(v))
    }

    fn distance(&self, u: u32, v: u32) -> u32 {
        Self::distance_from_tree(self.tree.tree_distance(u, v), self.tree.height(u), self.tree.height(v))
    }
}
