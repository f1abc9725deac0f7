//! Bond percolation cluster exploration.
//!
//! Exploration is breadth-first from a start vertex inside a slab, or
//! closest-layer-first toward a target layer. An edge is
//! open when the uniform attached to its canonical key in the sample's stream
//! falls below its orbit's probability; re-examining an edge from the other
//! side reproduces the same coin, and running the same stream at a larger `p`
//! yields a superset cluster.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::store::{Store, NONE};
use crate::graph::{registry::with_store, EdgeOrbit, GraphModel, Registry};
use crate::layers::{LayerFrame, SlabSpec};
use crate::rng::Stream;

/// Edge retention probabilities, one per orbit of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercConfig {
    pub model: GraphModel,
    probabilities: Vec<f64>,
    pub master_seed: u64,
}

impl PercConfig {
    pub fn isotropic(model: GraphModel, p: f64, master_seed: u64) -> Result<Self> {
        Self::per_orbit(model, vec![p; model.orbits().len()], master_seed)
    }

    /// Probabilities in the order of [`GraphModel::orbits`].
    pub fn per_orbit(model: GraphModel, probabilities: Vec<f64>, master_seed: u64) -> Result<Self> {
        if probabilities.len() != model.orbits().len() {
            return Err(Error::InvalidProbability(format!(
                "{model} has {} edge orbits, got {} probabilities",
                model.orbits().len(),
                probabilities.len()
            )));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(format!("{p} is outside [0, 1]")));
        }
        Ok(PercConfig { model, probabilities, master_seed })
    }

    pub fn anisotropic(model: GraphModel, entries: &[(EdgeOrbit, f64)], master_seed: u64) -> Result<Self> {
        let mut probs = vec![f64::NAN; model.orbits().len()];
        for &(orbit, p) in entries {
            let idx = model
                .orbit_index(orbit)
                .ok_or_else(|| Error::InvalidProbability(format!("{model} has no `{orbit}` edges")))?;
            probs[idx] = p;
        }
        if let Some(idx) = probs.iter().position(|p| p.is_nan()) {
            return Err(Error::InvalidProbability(format!(
                "missing probability for `{}` edges",
                model.orbits()[idx]
            )));
        }
        Self::per_orbit(model, probs, master_seed)
    }

    /// Parses `0.3` or `tree=0.3,lattice=0.01`.
    pub fn parse(model: GraphModel, text: &str, master_seed: u64) -> Result<Self> {
        let text = text.trim();
        if let Ok(p) = text.parse::<f64>() {
            return Self::isotropic(model, p, master_seed);
        }
        let entries = text
            .split(',')
            .map(|kv| {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidProbability(format!("expected orbit=value, got `{kv}`")))?;
                let p = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidProbability(format!("`{v}` is not a number")))?;
                Ok((k.parse::<EdgeOrbit>()?, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::anisotropic(model, &entries, master_seed)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn with_seed(&self, master_seed: u64) -> Self {
        PercConfig { master_seed, ..self.clone() }
    }

    pub fn with_probabilities(&self, probabilities: Vec<f64>) -> Result<Self> {
        Self::per_orbit(self.model, probabilities, self.master_seed)
    }

    /// `0.3` when isotropic, otherwise `tree=0.3,lattice=0.01`.
    pub fn label(&self) -> String {
        if self.is_isotropic() {
            format!("{}", self.probabilities[0])
        } else {
            self.model
                .orbits()
                .iter()
                .zip(&self.probabilities)
                .map(|(o, p)| format!("{o}={p}"))
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    pub fn is_isotropic(&self) -> bool {
        self.probabilities.windows(2).all(|w| w[0] == w[1])
    }

    pub fn stream(&self, sample_index: u64) -> Stream {
        Stream::for_sample(self.master_seed, sample_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_vertices: u32,
    pub max_abs_height: i32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_vertices: 100_000, max_abs_height: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    None,
    VertexBudget,
    HeightBudget,
}

/// Integer histogram over a contiguous range of keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DenseCounts {
    min: i32,
    counts: Vec<u64>,
}

impl DenseCounts {
    #[inline]
    pub fn add(&mut self, key: i32) {
        if self.counts.is_empty() {
            self.min = key;
            self.counts.push(1);
            return;
        }
        if key < self.min {
            let grow = (self.min - key) as usize;
            self.counts.splice(0..0, std::iter::repeat(0).take(grow));
            self.min = key;
        }
        let idx = (key - self.min) as usize;
        if idx >= self.counts.len() {
            self.counts.resize(idx + 1, 0);
        }
        self.counts[idx] += 1;
    }

    pub fn get(&self, key: i32) -> u64 {
        if key < self.min {
            return 0;
        }
        self.counts.get((key - self.min) as usize).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, c)| **c > 0).map(move |(i, c)| (self.min + i as i32, *c))
    }

    pub fn max_key(&self) -> Option<i32> {
        self.iter().map(|(k, _)| k).last()
    }

    pub fn min_key(&self) -> Option<i32> {
        self.iter().map(|(k, _)| k).next()
    }

    pub fn clear(&mut self) {
        self.counts.clear();
        self.min = 0;
    }
}

/// One explored cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSample {
    pub vertex_count: u64,
    /// `X_k`: reached vertices per layer.
    pub level_counts: DenseCounts,
    /// Reached vertices per height (equal to `level_counts` on simple-layer models).
    pub height_counts: DenseCounts,
    pub height_base: f64,
    /// No reached vertex other than the start is at or above the start's height.
    pub is_peak: bool,
    pub extrinsic_radius: u32,
    pub intrinsic_radius: u32,
    pub truncated: bool,
    pub truncation_reason: TruncationReason,
    /// Exploration stopped deliberately once its target statistic was decided.
    pub stopped_early: bool,
    pub layer_offset: f64,
}

impl ClusterSample {
    /// `Σ Δ(start, x)^λ` over reached vertices.
    pub fn tilted_volume(&self, lambda: f64) -> f64 {
        let ratio = self.height_base.powf(lambda);
        self.height_counts.iter().map(|(h, c)| c as f64 * ratio.powi(h)).sum()
    }

    pub fn reaches_layer(&self, layer: i32) -> bool {
        self.level_counts.get(layer) > 0
    }
}

/// Optional early exits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Stop as soon as a vertex in this layer is reached.
    pub stop_at_layer: Option<i32>,
    /// Stop as soon as the start is known not to be the peak.
    pub stop_when_not_peak: bool,
    /// Skip radius bookkeeping.
    pub skip_radii: bool,
    /// Expand the frontier vertex closest to this layer first (ties in
    /// discovery order) instead of breadth-first. Complete clusters are
    /// unchanged; a truncated one keeps more of the part near the target.
    /// Hop counts are then path lengths, not distances.
    pub toward_layer: Option<i32>,
}

/// Reusable per-task scratch space for explorations over one registry.
#[derive(Debug, Clone, Default)]
pub struct Explorer {
    epoch: u32,
    marks: Vec<u32>,
    queue: Vec<(u32, u32)>,
    frontier: BinaryHeap<(i32, Reverse<u32>)>,
}

impl Explorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ids reached by the last exploration, in discovery order.
    pub fn visited(&self) -> impl Iterator<Item = u32> + '_ {
        self.queue.iter().map(|(v, _)| *v)
    }

    fn begin(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.queue.clear();
        self.frontier.clear();
    }

    fn push(&mut self, v: u32, hop: u32, priority: Option<i32>) {
        if let Some(pr) = priority {
            self.frontier.push((pr, Reverse(self.queue.len() as u32)));
        }
        self.queue.push((v, hop));
    }

    #[inline]
    fn is_marked(&self, v: u32) -> bool {
        self.marks.get(v as usize).is_some_and(|&m| m == self.epoch)
    }

    #[inline]
    fn mark(&mut self, v: u32) {
        let i = v as usize;
        if i >= self.marks.len() {
            self.marks.resize((i + 1).max(self.marks.len() * 2), 0);
        }
        self.marks[i] = self.epoch;
    }
}

/// Registry plus explorer scratch: everything a sampling task owns.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub registry: Registry,
    pub explorer: Explorer,
}

impl Workspace {
    pub fn new(model: GraphModel) -> Self {
        Workspace { registry: Registry::new(model), explorer: Explorer::new() }
    }
}

/// Inputs to one exploration.
#[derive(Debug, Clone, Copy)]
pub struct Exploration<'a> {
    pub frame: &'a LayerFrame,
    pub probabilities: &'a [f64],
    pub stream: Stream,
    pub slab: SlabSpec,
    pub budget: Budget,
    pub options: ExploreOptions,
}

/// Explores the open cluster of `start` without clearing the registry.
pub fn explore_from(ws: &mut Workspace, start: u32, job: &Exploration<'_>) -> ClusterSample {
    let base = ws.registry.model().height_base();
    let explorer = &mut ws.explorer;
    with_store!(&mut ws.registry.store, s => explore_impl(s, explorer, start, job, base))
}

fn explore_impl<S: Store>(
    store: &mut S,
    ex: &mut Explorer,
    start: u32,
    job: &Exploration<'_>,
    height_base: f64,
) -> ClusterSample {
    ex.begin();
    let frame = job.frame;
    let probs = job.probabilities;
    let slots = store.slot_count();
    let h0 = store.height(start);
    let max_vertices = job.budget.max_vertices.max(1) as u64;
    let track_radii = !job.options.skip_radii;
    let measure_from_origin = start == 0;

    let mut sample = ClusterSample {
        vertex_count: 1,
        level_counts: DenseCounts::default(),
        height_counts: DenseCounts::default(),
        height_base,
        is_peak: true,
        extrinsic_radius: 0,
        intrinsic_radius: 0,
        truncated: false,
        truncation_reason: TruncationReason::None,
        stopped_early: false,
        layer_offset: frame.offset,
    };
    sample.level_counts.add(frame.layer_of_height(h0));
    sample.height_counts.add(0);
    let toward = job.options.toward_layer;
    let priority = |layer: i32| toward.map(|t| -(layer - t).abs());
    ex.mark(start);
    ex.push(start, 0, priority(frame.layer_of_height(h0)));
    if job.options.stop_at_layer == Some(frame.layer_of_height(h0)) {
        sample.stopped_early = true;
        return sample;
    }

    let mut head = 0;
    'bfs: loop {
        let next = match toward {
            None => (head < ex.queue.len()).then(|| {
                head += 1;
                head - 1
            }),
            Some(_) => ex.frontier.pop().map(|(_, Reverse(i))| i as usize),
        };
        let Some(next) = next else { break };
        let (v, hop) = ex.queue[next];
        let hv = store.height(v);
        for slot in 0..slots {
            let p = probs[store.slot_orbit(slot)];
            if p <= 0.0 {
                continue;
            }
            let hw = hv + store.slot_delta(slot);
            let layer = frame.layer_of_height(hw);
            if !job.slab.contains(layer) {
                continue;
            }
            let cached = store.linked(v, slot);
            if cached != NONE && ex.is_marked(cached) {
                continue;
            }
            if p < 1.0 && job.stream.uniform(store.edge_key(v, slot)) >= p {
                continue;
            }
            if (hw - h0).abs() > job.budget.max_abs_height {
                sample.truncated = true;
                if sample.truncation_reason == TruncationReason::None {
                    sample.truncation_reason = TruncationReason::HeightBudget;
                }
                continue;
            }
            let w = if cached != NONE { cached } else { store.materialize(v, slot) };
            if ex.is_marked(w) {
                continue;
            }
            if sample.vertex_count >= max_vertices {
                sample.truncated = true;
                sample.truncation_reason = TruncationReason::VertexBudget;
                break 'bfs;
            }
            ex.mark(w);
            ex.push(w, hop + 1, priority(layer));
            sample.vertex_count += 1;
            sample.level_counts.add(layer);
            sample.height_counts.add(hw - h0);
            if hw >= h0 {
                sample.is_peak = false;
                if job.options.stop_when_not_peak {
                    sample.stopped_early = true;
                    break 'bfs;
                }
            }
            if track_radii {
                sample.intrinsic_radius = sample.intrinsic_radius.max(hop + 1);
                let d = if measure_from_origin { store.origin_distance(w) } else { store.distance(start, w) };
                sample.extrinsic_radius = sample.extrinsic_radius.max(d);
            }
            if job.options.stop_at_layer == Some(layer) {
                sample.stopped_early = true;
                break 'bfs;
            }
        }
    }
    sample
}

/// Samples the open cluster of the origin for sample `sample_index`.
///
/// Clears the registry first; the result is a pure function of
/// `(config, frame, slab, budget, sample_index)`.
pub fn explore_cluster(
    ws: &mut Workspace,
    frame: &LayerFrame,
    config: &PercConfig,
    slab: SlabSpec,
    budget: Budget,
    sample_index: u64,
) -> ClusterSample {
    explore_cluster_with(ws, frame, config, slab, budget, sample_index, ExploreOptions::default())
}

pub fn explore_cluster_with(
    ws: &mut Workspace,
    frame: &LayerFrame,
    config: &PercConfig,
    slab: SlabSpec,
    budget: Budget,
    sample_index: u64,
    options: ExploreOptions,
) -> ClusterSample {
    debug_assert_eq!(ws.registry.model(), config.model);
    ws.registry.clear();
    let job = Exploration {
        frame,
        probabilities: config.probabilities(),
        stream: config.stream(sample_index),
        slab,
        budget,
        options,
    };
    explore_from(ws, 0, &job)
}

/// Frame for sample `sample_index`, with an offset drawn from its stream.
pub fn sample_frame(config: &PercConfig, sample_index: u64) -> LayerFrame {
    LayerFrame::anchored(&config.model, 0, config.stream(sample_index).fork(0xf4a3e).seed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    const TREE: GraphModel = GraphModel::FixedEndTree { k: 4 };

    fn run(config: &PercConfig, slab: SlabSpec, idx: u64) -> (ClusterSample, HashSet<u64>, Workspace) {
        let mut ws = Workspace::new(config.model);
        let frame = sample_frame(config, idx);
        let s = explore_cluster(&mut ws, &frame, config, slab, Budget::default(), idx);
        let ids: HashSet<u64> = ws.explorer.visited().map(|v| ws.registry.canonical_hash(v)).collect();
        (s, ids, ws)
    }

    /// Open cluster by plain BFS over `Registry::neighbors`, heights kept in `slab`.
    fn brute_cluster(config: &PercConfig, slab: SlabSpec, idx: u64) -> (HashSet<u64>, DenseCounts) {
        let mut reg = Registry::new(config.model);
        let stream = config.stream(idx);
        let origin = reg.origin();
        let mut seen = HashSet::from([reg.canonical_hash(origin.id)]);
        let mut counts = DenseCounts::default();
        counts.add(0);
        let mut queue = VecDeque::from([origin]);
        while let Some(v) = queue.pop_front() {
            for nb in reg.neighbors(v).unwrap() {
                let p = config.probabilities()[config.model.orbit_index(nb.orbit).unwrap()];
                let h = nb.vertex.height;
                if !slab.contains(h) || stream.uniform(nb.edge.0) >= p {
                    continue;
                }
                if seen.insert(reg.canonical_hash(nb.vertex.id)) {
                    counts.add(h);
                    queue.push_back(nb.vertex);
                }
            }
        }
        (seen, counts)
    }

    #[test]
    fn closed_edges_leave_the_origin_alone() {
        for model in [TREE, GraphModel::OrientedTree112, GraphModel::TreeTimesLattice { k: 4, d: 2 }] {
            let config = PercConfig::isotropic(model, 0.0, 1).unwrap();
            let (s, _, _) = run(&config, SlabSpec::EVERYTHING, 0);
            assert_eq!(s.vertex_count, 1);
            assert_eq!(s.level_counts.get(0), 1);
            assert!(s.is_peak && !s.truncated);
            assert_eq!((s.extrinsic_radius, s.intrinsic_radius), (0, 0));
        }
    }

    #[test]
    fn open_tree_slab_matches_path_enumeration() {
        let config = PercConfig::isotropic(TREE, 1.0, 3).unwrap();
        for n in 1..=3 {
            let slab = SlabSpec::bounded(0, n).unwrap();
            let (s, ids, _) = run(&config, slab, 0);
            let (brute, counts) = brute_cluster(&config, slab, 0);
            assert_eq!(ids, brute);
            assert_eq!(s.level_counts.get(n), 1);
            for k in 0..=n {
                assert_eq!(s.level_counts.get(k), counts.get(k));
                assert_eq!(s.level_counts.get(k), 3u64.pow((n - k) as u32));
            }
            assert_eq!(s.level_counts.get(n + 1) + s.level_counts.get(-1), 0);
        }
    }

    #[test]
    fn explorer_agrees_with_brute_force_on_products() {
        let model = GraphModel::TreeTimesLattice { k: 3, d: 1 };
        let config = PercConfig::parse(model, "tree=0.4,lattice=0.45", 9).unwrap();
        let slab = SlabSpec::bounded(-3, 2).unwrap();
        for idx in 0..40 {
            let (_, ids, _) = run(&config, slab, idx);
            assert_eq!(ids, brute_cluster(&config, slab, idx).0, "sample {idx}");
        }
    }

    #[test]
    fn peak_probability_brute_force_and_monte_carlo() {
        // Depth-1 truncation: the origin is the peak iff its single up-edge is closed.
        let p: f64 = 0.25;
        let exact: f64 = (0..16u32)
            .filter(|state| state & 1 == 0)
            .map(|state| (0..4).map(|e| if state >> e & 1 == 1 { p } else { 1.0 - p }).product::<f64>())
            .sum();
        assert!((exact - 0.75).abs() < 1e-15);
        let config = PercConfig::isotropic(TREE, p, 5).unwrap();
        let mut ws = Workspace::new(TREE);
        let n = 20_000;
        let hits = (0..n)
            .filter(|&i| {
                let frame = sample_frame(&config, i);
                explore_cluster(&mut ws, &frame, &config, SlabSpec::EVERYTHING, Budget::default(), i).is_peak
            })
            .count() as f64;
        let mean = hits / n as f64;
        let se = (mean * (1.0 - mean) / n as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn budgets_truncate() {
        let config = PercConfig::isotropic(TREE, 0.9, 2).unwrap();
        let mut ws = Workspace::new(TREE);
        let frame = sample_frame(&config, 0);
        let budget = Budget { max_vertices: 50, max_abs_height: 10_000 };
        let s = explore_cluster(&mut ws, &frame, &config, SlabSpec::EVERYTHING, budget, 0);
        assert!(s.truncated && s.truncation_reason == TruncationReason::VertexBudget);
        assert_eq!(s.vertex_count, 50);
        let budget = Budget { max_vertices: 1_000_000, max_abs_height: 2 };
        let slab = SlabSpec::bounded(-1, 5).unwrap();
        let s = explore_cluster(&mut ws, &frame, &config, slab, budget, 0);
        assert_eq!(s.truncation_reason, TruncationReason::HeightBudget);
        assert!(s.height_counts.max_key().unwrap() <= 2);
    }

    #[test]
    fn parse_probabilities() {
        let model = GraphModel::TreeTimesLattice { k: 4, d: 1 };
        let c = PercConfig::parse(model, "lattice=0.01, tree=0.3", 0).unwrap();
        assert_eq!(c.probabilities(), &[0.3, 0.01]);
        assert_eq!(c.label(), "tree=0.3,lattice=0.01");
        assert!(PercConfig::parse(model, "tree=0.3", 0).is_err());
        assert!(PercConfig::parse(model, "1.5", 0).is_err());
        assert!(PercConfig::parse(TREE, "lattice=0.2", 0).is_err());
        assert_eq!(PercConfig::parse(TREE, "0.3", 0).unwrap().label(), "0.3");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn larger_p_gives_a_superset(seed in any::<u64>(), p in 0.05f64..0.4, dp in 0.0f64..0.2, grand in any::<bool>()) {
            let model = if grand { GraphModel::Grandparent { k: 3 } } else { GraphModel::TreeTimesLattice { k: 3, d: 1 } };
            let lo = PercConfig::isotropic(model, p, seed).unwrap();
            let hi = lo.with_probabilities(vec![p + dp; model.orbits().len()]).unwrap();
            let (_, small, _) = run(&lo, SlabSpec::EVERYTHING, 0);
            let (b, big, _) = run(&hi, SlabSpec::EVERYTHING, 0);
            prop_assume!(!b.truncated);
            prop_assert!(small.is_subset(&big));
        }

        #[test]
        fn sample_invariants(seed in any::<u64>(), idx in 0u64..1000, p in 0.0f64..0.45, lo in -4i32..=0, hi in 0i32..4) {
            let model = GraphModel::TreeTimesLattice { k: 3, d: 2 };
            let config = PercConfig::isotropic(model, p, seed).unwrap();
            let slab = SlabSpec::bounded(lo, hi).unwrap();
            let (a, ids, _) = run(&config, slab, idx);
            let (b, _, _) = run(&config, slab, idx);
            prop_assert_eq!(&a, &b);
            prop_assert!(a.extrinsic_radius <= a.intrinsic_radius);
            prop_assert!(a.level_counts.get(0) >= 1);
            prop_assert!(a.level_counts.iter().all(|(k, _)| slab.contains(k)));
            prop_assert_eq!(ids.len() as u64, a.vertex_count);
            if a.is_peak {
                prop_assert!(a.level_counts.iter().all(|(k, _)| k <= 0));
            }
            if !a.truncated {
                prop_assert_eq!(&ids, &brute_cluster(&config, slab, idx).0);
            }
        }

        #[test]
        fn ordering_toward_a_layer_only_affects_truncated_clusters(
            seed in any::<u64>(), idx in 0u64..1000, p in 0.1f64..0.6, target in -3i32..=3, cap in 20u32..400,
        ) {
            let model = GraphModel::TreeTimesLattice { k: 3, d: 1 };
            let config = PercConfig::isotropic(model, p, seed).unwrap();
            let slab = SlabSpec::bounded(-3, 3).unwrap();
            let frame = sample_frame(&config, idx);
            let budget = Budget { max_vertices: cap, ..Budget::default() };
            let toward = ExploreOptions { skip_radii: true, toward_layer: Some(target), ..ExploreOptions::default() };
            let mut ws = Workspace::new(model);
            let bfs = explore_cluster_with(&mut ws, &frame, &config, slab, budget, idx, ExploreOptions { skip_radii: true, ..ExploreOptions::default() });
            let ordered = explore_cluster_with(&mut ws, &frame, &config, slab, budget, idx, toward);
            prop_assert_eq!(bfs.truncated, ordered.truncated);
            prop_assert_eq!(bfs.vertex_count, ordered.vertex_count);
            if !bfs.truncated {
                prop_assert_eq!(&bfs.level_counts, &ordered.level_counts);
            } else {
                let full = explore_cluster_with(&mut ws, &frame, &config, slab, Budget::default(), idx, toward);
                prop_assert!(ordered.level_counts.get(target) <= full.level_counts.get(target));
            }
        }
    }
}
