//! Percolation laboratory for nonunimodular transitive graphs.
//!
//! The crate grows infinite vertex-transitive graphs lazily around an origin,
//! explores Bernoulli bond percolation clusters inside height slabs, and turns
//! those explorations into Monte Carlo estimates of tilted quantities
//! (tilted susceptibility, slab-crossing decay rates, triangle diagram,
//! magnetization, peak survival, cluster tails). Exact tree oracles live in
//! [`oracles`] and are used to validate the estimators.
//!
//! Sampling is deterministic: every sample draws its edge coins from a
//! counter-based stream keyed by `(master seed, sample index, edge)`, so the
//! result of a run does not depend on the number of worker threads.

pub mod checks;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod graph;
pub mod layers;
pub mod oracles;
pub mod parallel;
pub mod percolation;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{EdgeKey, EdgeOrbit, GraphModel, Neighbor, Registry, VertexHandle};
pub use layers::{LayerFrame, SlabSpec};
pub use parallel::Execution;
pub use percolation::{Budget, ClusterSample, PercConfig, TruncationReason};
