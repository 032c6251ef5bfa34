//! The mating-of-trees pseudometric and marked sphere samples.
//!
//! `d_h(s, t)` is the infimum over chains `s = s_1, t_1, s_2, ..., t_k = t` of
//! `sum d_g(s_i, t_i)` where consecutive `t_j, s_{j+1}` are glued in the tree of
//! `f`. On the grid a chain of `k` hops is computed for all targets at once by
//! `k` rounds of a relaxation: glue (take the minimum over each glue class of
//! `f`), then hop (a min-plus transform against `d_g`, linear time on the
//! Cartesian tree of `g`).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rtree::CodedTree;
use crate::snake::{first_argmin, marks, ContourPair};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SphereOptions {
    /// Maximum number of `d_g` hops in a chain.
    pub k_max: usize,
    /// Times with `d_f <= delta` are glued; `0` glues exactly the tree classes.
    pub delta: f64,
    /// A row has converged once a round changes it by less than this fraction
    /// of the label range.
    pub conv_rel: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions { k_max: 50, delta: 0.0, conv_rel: 1e-6 }
    }
}

/// Sources relaxed together; per-lane arithmetic is identical to a lone run.
const LANES: usize = 8;
type Lane = [f64; LANES];

enum Glue {
    /// Exact tree classes: every member takes the class minimum.
    Classes { class_of: Vec<u32>, count: usize },
    /// Balls `d_f <= delta`: node `k` takes the minimum over `nodes[start[k]..start[k + 1]]`.
    Balls { start: Vec<u32>, nodes: Vec<u32> },
}

/// Single-source relaxation engine for `d_h` on the full grid of a snake.
///
/// Internally the nodes of the Cartesian tree of `g` are numbered in preorder,
/// so both tree passes of a hop stream through memory.
pub struct ChainSolver {
    n: usize,
    parent: Vec<u32>,
    value: Vec<f64>,
    node_of_time: Vec<u32>,
    glue: Glue,
    range: f64,
}

/// One row of chain distances from a source grid time.
#[derive(Clone, Debug)]
pub struct ChainRow {
    pub values: Vec<f64>,
    /// Number of hops used.
    pub rounds: usize,
    pub converged: bool,
}

impl ChainSolver {
    pub fn new(h: &ContourPair, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(param(format!("glue tolerance must be finite and >= 0, got {delta}")));
        }
        let n = h.n;
        let g_tree = CodedTree::new(&h.g);
        let pre = g_tree.preorder();
        let mut rank = vec![0u32; n];
        for (k, &node) in pre.iter().enumerate() {
            rank[node as usize] = k as u32;
        }
        let parent: Vec<u32> = pre.iter().map(|&node| rank[g_tree.parent(node as usize)]).collect();
        let value: Vec<f64> = pre.iter().map(|&node| g_tree.value(node as usize)).collect();
        let node_of_time: Vec<u32> = (0..=n).map(|t| rank[g_tree.node(t)]).collect();

        let f_tree = CodedTree::new(&h.f);
        let glue = if delta == 0.0 {
            let class = f_tree.zero_classes();
            let mut class_of = vec![0u32; n];
            for t in 0..n {
                class_of[node_of_time[t] as usize] = class[t];
            }
            let count = class.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
            Glue::Classes { class_of, count }
        } else {
            let adj = f_tree.adjacency();
            let mut start = vec![0u32; n + 1];
            let mut nodes = Vec::new();
            let mut members = vec![Vec::new(); n];
            let mut stack: Vec<(u32, u32, f64)> = Vec::new();
            for fnode in 0..n {
                let k = node_of_time[f_tree.time(fnode)] as usize;
                stack.clear();
                stack.push((fnode as u32, u32::MAX, 0.0));
                while let Some((u, from, r)) = stack.pop() {
                    members[k].push(node_of_time[f_tree.time(u as usize)]);
                    for &(w, len) in &adj[u as usize] {
                        if w != from && r + len <= delta {
                            stack.push((w, u, r + len));
                        }
                    }
                }
            }
            for (k, list) in members.iter().enumerate() {
                nodes.extend_from_slice(list);
                start[k + 1] = nodes.len() as u32;
            }
            Glue::Balls { start, nodes }
        };
        Ok(ChainSolver { n, parent, value, node_of_time, glue, range: h.label_range() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One `d_g` hop: `d[k] <- min_j d[j] + d_g(j, k)`, in place.
    fn hop(&self, d: &mut [Lane]) {
        let n = self.n;
        for k in 0..n {
            let v = self.value[k];
            for x in d[k].iter_mut() {
                *x += v;
            }
        }
        for k in (1..n).rev() {
            let p = self.parent[k] as usize;
            let child = d[k];
            for (x, y) in d[p].iter_mut().zip(child) {
                *x = x.min(y);
            }
        }
        for k in 0..n {
            let v = 2.0 * self.value[k];
            for x in d[k].iter_mut() {
                *x -= v;
            }
        }
        for k in 1..n {
            let p = self.parent[k] as usize;
            let above = d[p];
            for (x, y) in d[k].iter_mut().zip(above) {
                *x = x.min(y);
            }
        }
        for k in 0..n {
            let v = self.value[k];
            for x in d[k].iter_mut() {
                *x += v;
            }
        }
    }

    fn glue_min(&self, d: &[Lane], out: &mut [Lane], scratch: &mut Vec<Lane>) {
        match &self.glue {
            Glue::Classes { class_of, count } => {
                scratch.clear();
                scratch.resize(*count, [f64::INFINITY; LANES]);
                for (k, &c) in class_of.iter().enumerate() {
                    for (x, y) in scratch[c as usize].iter_mut().zip(d[k]) {
                        *x = x.min(y);
                    }
                }
                for (k, &c) in class_of.iter().enumerate() {
                    out[k] = scratch[c as usize];
                }
            }
            Glue::Balls { start, nodes } => {
                for k in 0..self.n {
                    let mut best = [f64::INFINITY; LANES];
                    for &u in &nodes[start[k] as usize..start[k + 1] as usize] {
                        for (x, y) in best.iter_mut().zip(d[u as usize]) {
                            *x = x.min(y);
                        }
                    }
                    out[k] = best;
                }
            }
        }
    }

    /// Relaxes up to `LANES` sources at once; `emit(lane, row_in_node_order, rounds, converged)`
    /// is called exactly once per source, at the round where that source stops.
    fn relax_batch(&self, sources: &[usize], k_max: usize, conv_rel: f64, mut emit: impl FnMut(usize, &[f64], usize, bool)) {
        debug_assert!(!sources.is_empty() && sources.len() <= LANES);
        let n = self.n;
        let mut d = vec![[f64::INFINITY; LANES]; n];
        for lane in 0..LANES {
            let s = sources[lane.min(sources.len() - 1)];
            d[self.node_of_time[s] as usize][lane] = 0.0;
        }
        self.hop(&mut d);
        let threshold = conv_rel * self.range;
        let mut done = [false; LANES];
        for lane in sources.len()..LANES {
            done[lane] = true;
        }
        let mut next = vec![[0.0; LANES]; n];
        let mut scratch = Vec::new();
        let mut column = vec![0.0; n];
        let mut finish = |lane: usize, d: &[Lane], rounds: usize, converged: bool| {
            for (c, x) in column.iter_mut().zip(d) {
                *c = x[lane];
            }
            emit(lane, &column, rounds, converged);
        };
        if k_max == 1 {
            for lane in 0..sources.len() {
                finish(lane, &d, 1, false);
            }
            return;
        }
        for round in 2..=k_max {
            self.glue_min(&d, &mut next, &mut scratch);
            self.hop(&mut next);
            let mut change = [0.0f64; LANES];
            for (x, y) in d.iter_mut().zip(&next) {
                for lane in 0..LANES {
                    if y[lane] < x[lane] {
                        change[lane] = change[lane].max(x[lane] - y[lane]);
                        x[lane] = y[lane];
                    }
                }
            }
            for lane in 0..LANES {
                if !done[lane] && (change[lane] <= threshold || round == k_max) {
                    done[lane] = true;
                    finish(lane, &d, round, change[lane] <= threshold);
                }
            }
            if done.iter().all(|&x| x) {
                return;
            }
        }
    }

    /// Chain distances from each source to the grid times `targets`.
    pub fn rows_at(&self, sources: &[usize], targets: &[usize], k_max: usize, conv_rel: f64) -> Result<Vec<ChainRow>> {
        if k_max < 1 {
            return Err(param("chain length must be >= 1"));
        }
        if let Some(&bad) = sources.iter().chain(targets).find(|&&p| p > self.n) {
            return Err(Error::Index { index: bad, n: self.n });
        }
        let target_nodes: Vec<usize> = targets.iter().map(|&t| self.node_of_time[t] as usize).collect();
        let batches: Vec<Vec<ChainRow>> = sources
            .par_chunks(LANES)
            .map(|chunk| {
                let mut rows = vec![None; chunk.len()];
                self.relax_batch(chunk, k_max, conv_rel, |lane, col, rounds, converged| {
                    let values = target_nodes.iter().map(|&k| col[k]).collect();
                    rows[lane] = Some(ChainRow { values, rounds, converged });
                });
                rows.into_iter().map(Option::unwrap).collect()
            })
            .collect();
        Ok(batches.into_iter().flatten().collect())
    }

    /// Chain distances from `source` to every grid time, with at most `k_max`
    /// hops, stopping early once a round changes the row by at most
    /// `conv_rel * (label range)`.
    pub fn row(&self, source: usize, k_max: usize, conv_rel: f64) -> Result<ChainRow> {
        let all: Vec<usize> = (0..=self.n).collect();
        Ok(self.rows_at(&[source], &all, k_max, conv_rel)?.pop().unwrap())
    }
}

/// `d^(k, delta)(s, t)`: the best chain with at most `k` hops.
pub fn chain_dist(h: &ContourPair, k: usize, delta: f64, s: usize, t: usize) -> Result<f64> {
    if k < 1 {
        return Err(param("chain length must be >= 1"));
    }
    if t > h.n {
        return Err(Error::Index { index: t, n: h.n });
    }
    let row = ChainSolver::new(h, delta)?.row(s, k, 0.0)?;
    Ok(row.values[t])
}

/// Symmetric pseudometric values on sampled grid times.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    pub points: Vec<usize>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full row-major `m × m` array; only the strict
    /// upper triangle is read, the rest is mirrored.
    pub fn from_rows(points: Vec<usize>, full: &[f64]) -> Result<Self> {
        let m = points.len();
        if full.len() != m * m {
            return Err(param(format!("expected {} entries, got {}", m * m, full.len())));
        }
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in i + 1..m {
                let v = full[i * m + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Structure(format!("entry ({i}, {j}) = {v} is not a finite nonnegative distance")));
                }
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Ok(DistanceMatrix { points, values })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.m();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn diameter(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest violation `d(i, k) - d(i, j) - d(j, k)` over all triples.
    pub fn max_triangle_violation(&self) -> f64 {
        let m = self.m();
        (0..m)
            .into_par_iter()
            .map(|j| {
                let rj = self.row(j);
                let mut worst = 0.0f64;
                for i in 0..m {
                    let ri = self.row(i);
                    let dij = rj[i];
                    for k in 0..m {
                        worst = worst.max(ri[k] - dij - rj[k]);
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Binary layout: `m: u32`, `m` grid indices as `u32`, then the strict upper
    /// triangle row by row as `f64`, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = self.m();
        let mut out = Vec::with_capacity(4 + 4 * m + 8 * m * (m.saturating_sub(1)) / 2);
        out.extend_from_slice(&(m as u32).to_le_bytes());
        for &p in &self.points {
            out.extend_from_slice(&(p as u32).to_le_bytes());
        }
        for i in 0..m {
            for j in i + 1..m {
                out.extend_from_slice(&self.get(i, j).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::Format("truncated distance matrix".into());
        let word = |at: usize| -> Result<u32> {
            Ok(u32::from_le_bytes(bytes.get(at..at + 4).ok_or_else(short)?.try_into().unwrap()))
        };
        let m = word(0)? as usize;
        let points = (0..m).map(|k| word(4 + 4 * k).map(|p| p as usize)).collect::<Result<Vec<_>>>()?;
        let mut at = 4 + 4 * m;
        let expected = at + 8 * m * m.saturating_sub(1) / 2;
        if bytes.len() != expected {
            return Err(Error::Format(format!("expected {expected} bytes for m = {m}, got {}", bytes.len())));
        }
        let mut full = vec![0.0; m * m];
        for i in 0..m {
            for j in i + 1..m {
                full[i * m + j] = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
                at += 8;
            }
        }
        DistanceMatrix::from_rows(points, &full)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        DistanceMatrix::from_bytes(&fs::read(path)?)
    }

    /// CSV with a header row of grid indices and one row per point.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        let header: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        writeln!(w, "point,{}", header.join(","))?;
        for i in 0..self.m() {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{},{}", self.points[i], row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A distance matrix together with how the relaxation finished.
#[derive(Clone, Debug)]
pub struct SphereMatrix {
    pub dist: DistanceMatrix,
    /// Largest number of hops used by any row.
    pub rounds: usize,
    pub converged: bool,
}

/// `d_h` restricted to `sample`, symmetrized by taking the smaller of the two
/// row estimates.
pub fn sphere_matrix(h: &ContourPair, sample: &[usize], opts: &SphereOptions) -> Result<SphereMatrix> {
    if sample.is_empty() {
        return Err(param("sample must be nonempty"));
    }
    if let Some(&bad) = sample.iter().find(|&&p| p > h.n) {
        return Err(Error::Index { index: bad, n: h.n });
    }
    let solver = ChainSolver::new(h, opts.delta)?;
    let rows = solver.rows_at(sample, sample, opts.k_max, opts.conv_rel)?;
    let m = sample.len();
    let mut full = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            full[i * m + j] = rows[i].values[j].min(rows[j].values[i]);
        }
    }
    Ok(SphereMatrix {
        dist: DistanceMatrix::from_rows(sample.to_vec(), &full)?,
        rounds: rows.iter().map(|r| r.rounds).max().unwrap_or(1),
        converged: rows.iter().all(|r| r.converged),
    })
}

/// Every `n/m`-th grid time plus the two marked times, deduplicated and sorted.
pub fn grid_sample(n: usize, m: usize, forced: &[usize]) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(param(format!("sample size must be in 1..={n}, got {m}")));
    }
    let mut points: Vec<usize> = (0..m).map(|j| j * n / m).chain(forced.iter().copied()).collect();
    points.sort_unstable();
    points.dedup();
    Ok(points)
}

/// The data the inverse consumes: `(X, d, μ, x⁰, x¹, ε)`.
#[derive(Clone, Debug)]
pub struct MarkedSphereSample {
    pub dist: DistanceMatrix,
    pub mass: Vec<f64>,
    pub i0: usize,
    pub i1: usize,
    pub epsilon: Option<i8>,
}

#[derive(Serialize, Deserialize)]
pub struct Marks {
    pub i0: usize,
    pub i1: usize,
    pub epsilon: Option<i8>,
}

impl MarkedSphereSample {
    pub fn marks(&self) -> Marks {
        Marks { i0: self.i0, i1: self.i1, epsilon: self.epsilon }
    }

    pub fn with_marks(dist: DistanceMatrix, marks: &Marks) -> Result<Self> {
        let m = dist.m();
        if marks.i0 >= m || marks.i1 >= m {
            return Err(param(format!("marked indices ({}, {}) out of range for m = {m}", marks.i0, marks.i1)));
        }
        if let Some(e) = marks.epsilon {
            if e != 1 && e != -1 {
                return Err(param(format!("epsilon must be +1 or -1, got {e}")));
            }
        }
        Ok(MarkedSphereSample { mass: vec![1.0 / m as f64; m], dist, i0: marks.i0, i1: marks.i1, epsilon: marks.epsilon })
    }

    /// The same sample with points relabeled by `perm` (new index `k` is old
    /// index `perm[k]`); grid indices are replaced by `0..m` so nothing about
    /// contour times survives.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.dist.m();
        let mut full = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                full[a * m + b] = self.dist.get(perm[a], perm[b]);
            }
        }
        let mut inv = vec![0; m];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        MarkedSphereSample {
            dist: DistanceMatrix::from_rows((0..m).collect(), &full).unwrap(),
            mass: perm.iter().map(|&p| self.mass[p]).collect(),
            i0: inv[self.i0],
            i1: inv[self.i1],
            epsilon: self.epsilon,
        }
    }
}

/// Attaches uniform masses and the marked points to a matrix built from `h`.
pub fn assemble_marked(h: &ContourPair, dist: DistanceMatrix, with_epsilon: bool) -> Result<MarkedSphereSample> {
    let t0 = first_argmin(&h.f);
    let mk = marks(h);
    let find = |t: usize| {
        dist.points
            .iter()
            .position(|&p| p == t)
            .ok_or_else(|| param(format!("marked grid time {t} is not in the sample")))
    };
    let i0 = find(t0)?;
    let i1 = find(mk.s_star)?;
    let m = dist.m();
    Ok(MarkedSphereSample {
        dist,
        mass: vec![1.0 / m as f64; m],
        i0,
        i1,
        epsilon: with_epsilon.then_some(mk.epsilon),
    })
}

/// Samples `m` grid times of `h`, computes `d_h` on them and marks the result.
pub fn build_sphere(h: &ContourPair, m: usize, opts: &SphereOptions) -> Result<(MarkedSphereSample, SphereMatrix)> {
    let sample = grid_sample(h.n, m, &[first_argmin(&h.f), marks(h).s_star])?;
    let sm = sphere_matrix(h, &sample, opts)?;
    let marked = assemble_marked(h, sm.dist.clone(), true)?;
    Ok((marked, sm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtree::TreeView;
    use crate::snake::{reverse, sample_snake};

    #[test]
    fn one_hop_is_label_tree_distance() {
        let h = sample_snake(256, 1).unwrap();
        let view = TreeView::new(&h.g, 0.0);
        for (s, t) in [(3, 200), (0, 256), (17, 17), (100, 5)] {
            let d = chain_dist(&h, 1, 0.0, s, t).unwrap();
            assert!((d - view.dist(s, t)).abs() < 1e-12);
        }
        assert!(matches!(chain_dist(&h, 0, 0.0, 1, 2), Err(Error::Param(_))));
    }

    #[test]
    fn rows_are_monotone_in_hops_and_delta() {
        let h = sample_snake(256, 2).unwrap();
        let exact = ChainSolver::new(&h, 0.0).unwrap();
        let loose = ChainSolver::new(&h, 0.2).unwrap();
        let mut prev = exact.row(40, 1, 0.0).unwrap().values;
        for k in 2..8 {
            let row = exact.row(40, k, 0.0).unwrap().values;
            let wide = loose.row(40, k, 0.0).unwrap().values;
            for t in 0..=256 {
                assert!(row[t] <= prev[t]);
                assert!(wide[t] <= row[t]);
            }
            prev = row;
        }
    }

    #[test]
    fn binary_and_csv_roundtrip() {
        let h = sample_snake(128, 3).unwrap();
        let sm = sphere_matrix(&h, &[0, 10, 64, 127], &SphereOptions::default()).unwrap();
        let back = DistanceMatrix::from_bytes(&sm.dist.to_bytes()).unwrap();
        assert_eq!(back, sm.dist);
        assert!(DistanceMatrix::from_bytes(&sm.dist.to_bytes()[..10]).is_err());
        let dir = tempfile::tempdir().unwrap();
        sm.dist.write_csv(&dir.path().join("d.csv")).unwrap();
    }

    #[test]
    fn singleton_sample_is_zero() {
        let h = sample_snake(64, 4).unwrap();
        let sm = sphere_matrix(&h, &[5], &SphereOptions::default()).unwrap();
        assert_eq!(sm.dist.m(), 1);
        assert_eq!(sm.dist.get(0, 0), 0.0);
    }

    #[test]
    fn reflection_is_exact() {
        let h = sample_snake(512, 5).unwrap();
        let sample: Vec<usize> = (0..=512).step_by(8).collect();
        let rsample: Vec<usize> = sample.iter().rev().map(|&p| 512 - p).collect();
        let opts = SphereOptions::default();
        let a = sphere_matrix(&h, &sample, &opts).unwrap().dist;
        let b = sphere_matrix(&reverse(&h), &rsample, &opts).unwrap().dist;
        let m = sample.len();
        for i in 0..m {
            for j in 0..m {
                assert_eq!(a.get(i, j), b.get(m - 1 - i, m - 1 - j));
            }
        }
    }

    #[test]
    fn sample_includes_marks() {
        let pts = grid_sample(1024, 100, &[3, 1000]).unwrap();
        assert!(pts.contains(&3) && pts.contains(&1000) && pts.contains(&0));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(grid_sample(10, 11, &[]).is_err());
    }
}
