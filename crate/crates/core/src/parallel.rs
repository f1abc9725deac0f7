//! Deterministic fan-out over sample indices.
//!
//! Samples are grouped into fixed-size chunks; each chunk is accumulated
//! sequentially with its own [`Workspace`], and chunk results are merged in
//! chunk order. The output is therefore bit-identical for any thread count,
//! and identical between the parallel and sequential paths.

use serde::{Deserialize, Serialize};

use crate::graph::GraphModel;
use crate::percolation::Workspace;

/// Samples per chunk. Part of the determinism contract: changing it changes
/// floating-point merge order.
pub const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Rayon data-parallel (falls back to sequential without the `parallel` feature).
    #[default]
    Parallel,
}

/// Accumulator that can absorb another accumulator of the same shape.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

/// Runs `body(workspace, index, acc)` for every index in `0..n`.
pub fn run_samples<A, M, F>(exec: Execution, model: GraphModel, n: u64, make: M, body: F) -> A
where
    A: Merge + Send,
    M: Fn() -> A + Sync,
    F: Fn(&mut Workspace, u64, &mut A) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let run_chunk = |ws: &mut Workspace, c: u64| {
        let mut acc = make();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            body(ws, i, &mut acc);
        }
        acc
    };
    let parts: Vec<A> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map_init(|| Workspace::new(model), run_chunk).collect()
        }
        _ => {
            let mut ws = Workspace::new(model);
            (0..chunks).map(|c| run_chunk(&mut ws, c)).collect()
        }
    };
    let mut total = make();
    for part in parts {
        total.merge(part);
    }
    total
}

/// Maps `f` over `items` in parallel (or sequentially), preserving order.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
