//! Root-to-pointed distances of large uniform quadrangulations.

use rayon::prelude::*;

use crate::cvs::bijection::cvs_forward;
use crate::cvs::tree::sample_uniform;
use crate::error::{param, Result};

/// `d_Q(root vertex, pointed vertex)` by breadth-first search on the map of a
/// uniform labeled tree.
pub fn root_distance(n_edges: usize, seed: u64) -> Result<u32> {
    let tree = sample_uniform(n_edges, seed)?;
    let q = cvs_forward(&tree, 1)?;
    let d = q.bfs_labels(q.pointed());
    Ok(d[q.origin(q.root())])
}

/// Root-to-pointed distances rescaled by `n^(1/4)`, one per seed.
pub fn scaling_profile(n_edges: usize, seeds: &[u64]) -> Result<Vec<f64>> {
    if n_edges < 1 {
        return Err(param("n_edges must be positive"));
    }
    let scale = (n_edges as f64).powf(0.25);
    seeds.par_iter().map(|&s| Ok(root_distance(n_edges, s)? as f64 / scale)).collect()
}
