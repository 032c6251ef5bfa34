//! Trees coded by contour functions.
//!
//! For a function `v` on the grid `0..=n` with `v[0] = v[n]`, the coded
//! pseudometric is the circle form
//!
//! ```text
//! d(s, t) = v[s] + v[t] - 2 max(min v[s..=t], min(v[0..=s] ∪ v[t..=n]))
//! ```
//!
//! [`TreeView`] answers point queries through a sparse table. [`CodedTree`]
//! materializes the same tree as a rooted Cartesian tree so that min-plus
//! transforms against `d` cost O(n) instead of O(n²).

use crate::error::{Error, Result};

/// Sparse table for range minima over a fixed array.
#[derive(Clone, Debug)]
pub struct SparseMin {
    levels: Vec<Vec<f64>>,
}

impl SparseMin {
    pub fn new(v: &[f64]) -> Self {
        let mut levels = vec![v.to_vec()];
        let mut width = 1;
        while 2 * width <= v.len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=v.len() - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseMin { levels }
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    /// Minimum of `v[a..=b]`.
    #[inline]
    pub fn min(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a <= b && b < self.len());
        let k = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        self.levels[k][a].min(self.levels[k][b + 1 - (1 << k)])
    }
}

/// The tree coded by a contour, with a glue threshold for "same point" tests.
#[derive(Clone, Debug)]
pub struct TreeView {
    f: Vec<f64>,
    rmq: SparseMin,
    pub glue_tol: f64,
}

impl TreeView {
    pub fn new(f: &[f64], glue_tol: f64) -> Self {
        assert!(f.len() >= 2, "a contour needs at least two grid values");
        assert!(glue_tol >= 0.0, "glue tolerance must be nonnegative");
        TreeView { f: f.to_vec(), rmq: SparseMin::new(f), glue_tol }
    }

    /// Number of grid intervals.
    pub fn n(&self) -> usize {
        self.f.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    /// Tree distance between grid times; unchecked indices.
    #[inline]
    pub fn dist(&self, s: usize, t: usize) -> f64 {
        let (a, b) = if s <= t { (s, t) } else { (t, s) };
        let inner = self.rmq.min(a, b);
        let outer = self.rmq.min(0, a).min(self.rmq.min(b, self.n()));
        (self.f[s] + self.f[t]) - 2.0 * inner.max(outer)
    }

    pub fn checked_dist(&self, s: usize, t: usize) -> Result<f64> {
        let n = self.n();
        for index in [s, t] {
            if index > n {
                return Err(Error::Index { index, n });
            }
        }
        Ok(self.dist(s, t))
    }

    pub fn glued(&self, s: usize, t: usize) -> bool {
        self.dist(s, t) <= self.glue_tol
    }

    /// Whether the class of `s` has a second contour preimage in `[0, n)`.
    pub fn is_skeleton(&self, s: usize) -> bool {
        (0..self.n()).any(|t| t != s && self.dist(s, t) <= self.glue_tol)
    }

    /// Grid masses of the components of the tree with the class of `s` removed.
    ///
    /// The contour times `0..n` (time `n` is time `0`) each carry mass `1/n`.
    /// Removing the times glued to `s` splits the circle into runs; each run is
    /// one component.
    pub fn subtree_masses(&self, s: usize) -> Vec<f64> {
        let n = self.n();
        let cut: Vec<bool> = (0..n).map(|t| self.dist(s, t) <= self.glue_tol).collect();
        let Some(first) = cut.iter().position(|&c| c) else {
            return vec![1.0];
        };
        let mut masses = Vec::new();
        let mut run = 0usize;
        for k in 1..=n {
            if cut[(first + k) % n] {
                if run > 0 {
                    masses.push(run as f64 / n as f64);
                }
                run = 0;
            } else {
                run += 1;
            }
        }
        masses
    }

    /// Grid times tracing the tree geodesic from the class of `s` to that of `t`.
    ///
    /// Both endpoints walk down their ancestral lines (strict running minima of
    /// the contour, moving toward each other) until the meeting level; the two
    /// walks are joined at the meeting vertex.
    pub fn geodesic_segment(&self, s: usize, t: usize) -> Vec<usize> {
        if s == t {
            return vec![s];
        }
        let n = self.n();
        let (a, b) = if s < t { (s, t) } else { (t, s) };
        let inner = self.rmq.min(a, b);
        let outer = self.rmq.min(0, a).min(self.rmq.min(b, n));
        // Walk from `a` toward `b` along the arc that carries the meeting level.
        let forward: Vec<usize> = if inner >= outer {
            (a..=b).collect()
        } else {
            (0..=n - (b - a)).map(|k| (a + n - k) % n).collect()
        };
        let from_a = ancestors_along(&self.f, forward.iter().copied(), inner.max(outer));
        let from_b = ancestors_along(&self.f, forward.iter().rev().copied(), inner.max(outer));
        let mut path = from_a;
        let mut back = from_b;
        // Both walks end on the meeting vertex, possibly at different corners.
        if self.dist(*path.last().unwrap(), *back.last().unwrap()) == 0.0 && path.len() + back.len() > 2 {
            back.pop();
        }
        path.extend(back.into_iter().rev());
        path.dedup();
        if s > t {
            path.reverse();
        }
        path
    }
}

/// Strict running-minimum records of `f` along `order`, stopping at `level`.
fn ancestors_along(f: &[f64], order: impl Iterator<Item = usize>, level: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut current = f64::INFINITY;
    for u in order {
        if f[u] < current {
            current = f[u];
            out.push(u);
            if current <= level {
                break;
            }
        }
    }
    out
}

/// Tree distance of `f` between grid times `s` and `t`.
pub fn tree_dist(f: &[f64], s: usize, t: usize) -> Result<f64> {
    TreeView::new(f, 0.0).checked_dist(s, t)
}

/// A coded tree as a rooted Cartesian tree on the circle of grid times.
///
/// Every grid time is a node; time `n` shares the node of time `0`. The tree
/// distance between two times equals the weighted path length between their
/// nodes, with weight `v[child] - v[parent]` on each edge.
#[derive(Clone, Debug)]
pub struct CodedTree {
    n: usize,
    /// Node value, indexed by node.
    value: Vec<f64>,
    /// Parent node; the root is its own parent.
    parent: Vec<u32>,
    /// Nodes ordered so every parent precedes its children.
    order: Vec<u32>,
    /// Rotation: node of grid time `i` is `(i + n - shift) % n`.
    shift: usize,
}

impl CodedTree {
    pub fn new(v: &[f64]) -> Self {
        let n = v.len() - 1;
        assert!(n >= 1, "a coded tree needs at least one interval");
        assert_eq!(v[0], v[n], "coded trees need equal endpoint values");
        let shift = crate::snake::first_argmin(&v[..n]);
        let value: Vec<f64> = (0..n).map(|k| v[(k + shift) % n]).collect();
        let mut parent = vec![0u32; n];
        // Nearest left with value <= and nearest right with value <, by stack.
        let mut left = vec![usize::MAX; n];
        let mut stack: Vec<usize> = Vec::new();
        for k in 0..n {
            while let Some(&top) = stack.last() {
                if value[top] > value[k] {
                    stack.pop();
                } else {
                    break;
                }
            }
            left[k] = stack.last().copied().unwrap_or(usize::MAX);
            stack.push(k);
        }
        stack.clear();
        let mut right = vec![usize::MAX; n];
        for k in (0..n).rev() {
            while let Some(&top) = stack.last() {
                if value[top] >= value[k] {
                    stack.pop();
                } else {
                    break;
                }
            }
            right[k] = stack.last().copied().unwrap_or(usize::MAX);
            stack.push(k);
        }
        for k in 1..n {
            let l = left[k];
            let r = right[k];
            parent[k] = if r != usize::MAX && value[r] > value[l] { r as u32 } else { l as u32 };
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&x, &y| value[x as usize].total_cmp(&value[y as usize]).then(x.cmp(&y)));
        CodedTree { n, value, parent, order, shift }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn node(&self, i: usize) -> usize {
        (i % self.n + self.n - self.shift) % self.n
    }

    #[inline]
    pub fn time(&self, node: usize) -> usize {
        (node + self.shift) % self.n
    }

    pub fn parent(&self, node: usize) -> usize {
        self.parent[node] as usize
    }

    pub fn value(&self, node: usize) -> f64 {
        self.value[node]
    }

    /// Nodes in depth-first preorder from the root, children left to right.
    pub fn preorder(&self) -> Vec<u32> {
        let n = self.n;
        let mut start = vec![0u32; n + 1];
        for node in 1..n {
            start[self.parent[node] as usize + 1] += 1;
        }
        for k in 0..n {
            start[k + 1] += start[k];
        }
        let mut fill = start.clone();
        let mut children = vec![0u32; n.saturating_sub(1)];
        for node in 1..n {
            let p = self.parent[node] as usize;
            children[fill[p] as usize] = node as u32;
            fill[p] += 1;
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![0u32];
        while let Some(u) = stack.pop() {
            out.push(u);
            let (a, b) = (start[u as usize] as usize, start[u as usize + 1] as usize);
            stack.extend(children[a..b].iter().rev());
        }
        out
    }

    /// Min-plus transform `out[j] = min_i a[i] + d(i, j)` over grid times `0..=n`.
    pub fn transform(&self, a: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(a.len(), n + 1);
        let mut up = vec![f64::INFINITY; n];
        for (i, &x) in a.iter().enumerate() {
            let node = self.node(i);
            up[node] = up[node].min(x + self.value[node]);
        }
        for &node in self.order.iter().skip(1).rev() {
            let node = node as usize;
            let p = self.parent[node] as usize;
            up[p] = up[p].min(up[node]);
        }
        let mut best = up;
        for (node, b) in best.iter_mut().enumerate() {
            *b -= 2.0 * self.value[node];
        }
        for &node in self.order.iter().skip(1) {
            let node = node as usize;
            let p = self.parent[node] as usize;
            best[node] = best[node].min(best[p]);
        }
        (0..=n)
            .map(|i| {
                let node = self.node(i);
                self.value[node] + best[node]
            })
            .collect()
    }

    /// Glue class of each grid time `0..=n`: times joined by zero-length edges.
    pub fn zero_classes(&self) -> Vec<u32> {
        let n = self.n;
        let mut class = vec![0u32; n];
        let mut count = 0u32;
        for &node in &self.order {
            let node = node as usize;
            let p = self.parent[node] as usize;
            if node != p && self.value[node] == self.value[p] {
                class[node] = class[p];
            } else {
                class[node] = count;
                count += 1;
            }
        }
        (0..=n).map(|i| class[self.node(i)]).collect()
    }

    /// Undirected weighted adjacency of the tree, by node.
    pub fn adjacency(&self) -> Vec<Vec<(u32, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for node in 1..self.n {
            let p = self.parent[node] as usize;
            let w = self.value[node] - self.value[p];
            adj[node].push((p as u32, w));
            adj[p].push((node as u32, w));
        }
        adj
    }
}
