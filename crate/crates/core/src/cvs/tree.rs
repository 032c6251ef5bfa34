//! Labeled plane trees.

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{param, Error, Result};
use crate::rng::{rng_for, stream};

/// A rooted plane tree with integer labels, vertices numbered in preorder.
///
/// `parent[0] == 0` is the root; siblings appear in planar order, so the
/// preorder numbering determines the plane tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPlaneTree {
    parent: Vec<usize>,
    labels: Vec<i64>,
}

impl LabeledPlaneTree {
    pub fn new(parent: Vec<usize>, labels: Vec<i64>) -> Result<Self> {
        if parent.len() < 2 || parent.len() != labels.len() {
            return Err(Error::Structure("a labeled tree needs >= 1 edge and one label per vertex".into()));
        }
        if parent[0] != 0 || labels[0] != 0 {
            return Err(Error::Structure("the root must be vertex 0 with label 0".into()));
        }
        // Preorder: each vertex's parent is on the current ancestral line.
        let mut line = vec![0usize];
        for v in 1..parent.len() {
            while line.last().is_some_and(|&top| top != parent[v]) {
                line.pop();
            }
            if line.is_empty() {
                return Err(Error::Structure(format!("vertex {v} is not in preorder")));
            }
            if (labels[v] - labels[parent[v]]).abs() > 1 {
                return Err(Error::Structure(format!("label jump larger than 1 on edge to vertex {v}")));
            }
            line.push(v);
        }
        Ok(LabeledPlaneTree { parent, labels })
    }

    /// Builds a tree from a Dyck word (`true` = step away from the root) and
    /// one label increment per edge, in preorder of the child endpoint.
    pub fn from_dyck(word: &[bool], increments: &[i64]) -> Result<Self> {
        let mut parent = vec![0];
        let mut labels = vec![0];
        let mut line = vec![0usize];
        for &up in word {
            if up {
                let p = *line.last().unwrap();
                let v = parent.len();
                let inc = *increments.get(v - 1).ok_or_else(|| param("not enough label increments"))?;
                parent.push(p);
                labels.push(labels[p] + inc);
                line.push(v);
            } else {
                line.pop();
                if line.is_empty() {
                    return Err(param("Dyck word goes below the root"));
                }
            }
        }
        if line.len() != 1 {
            return Err(param("Dyck word does not return to the root"));
        }
        LabeledPlaneTree::new(parent, labels)
    }

    pub fn n_edges(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn n_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for v in 1..self.parent.len() {
            ch[self.parent[v]].push(v);
        }
        ch
    }

    /// Vertices at the `2n` corners of the contour walk, starting at the root.
    pub fn contour(&self) -> Vec<usize> {
        let ch = self.children();
        let mut out = Vec::with_capacity(2 * self.n_edges());
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            out.push(v);
            if *next < ch[v].len() {
                let c = ch[v][*next];
                *next += 1;
                stack.push((c, 0));
            } else {
                stack.pop();
            }
        }
        // The walk ends back at the root, which is corner 0 again.
        out.pop();
        out
    }

    pub fn dyck_word(&self) -> Vec<bool> {
        let contour = self.contour();
        let mut word: Vec<bool> = contour.windows(2).map(|w| w[1] > w[0] && self.parent[w[1]] == w[0]).collect();
        word.push(false);
        word
    }

    /// The tree with every child list reversed.
    pub fn mirror(&self) -> LabeledPlaneTree {
        self.mirror_with_ids().0
    }

    /// The mirrored tree and the new id of every old vertex.
    pub fn mirror_with_ids(&self) -> (LabeledPlaneTree, Vec<usize>) {
        let ch = self.children();
        let mut new_id = vec![0; self.parent.len()];
        let mut parent = Vec::with_capacity(self.parent.len());
        let mut labels = Vec::with_capacity(self.parent.len());
        // A stack pushed in planar order pops the last child first, which is
        // the preorder of the mirrored tree.
        let mut dfs = vec![(0usize, usize::MAX)];
        while let Some((old, new_parent)) = dfs.pop() {
            let id = parent.len();
            new_id[old] = id;
            parent.push(if new_parent == usize::MAX { 0 } else { new_parent });
            labels.push(self.labels[old]);
            for &c in &ch[old] {
                dfs.push((c, id));
            }
        }
        (LabeledPlaneTree { parent, labels }, new_id)
    }

    /// Nested-array form `[label, [child, ...]]`.
    pub fn to_json(&self) -> Value {
        let ch = self.children();
        fn node(v: usize, ch: &[Vec<usize>], labels: &[i64]) -> Value {
            json!([labels[v], ch[v].iter().map(|&c| node(c, ch, labels)).collect::<Vec<_>>()])
        }
        node(0, &ch, &self.labels)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        fn walk(node: &Value, p: usize, parent: &mut Vec<usize>, labels: &mut Vec<i64>) -> Result<()> {
            let bad = || Error::Format("tree nodes must be [label, [children...]]".into());
            let arr = node.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let label = arr[0].as_i64().ok_or_else(bad)?;
            let id = parent.len();
            parent.push(p);
            labels.push(label);
            for c in arr[1].as_array().ok_or_else(bad)? {
                walk(c, id, parent, labels)?;
            }
            Ok(())
        }
        let mut parent = Vec::new();
        let mut labels = Vec::new();
        walk(value, 0, &mut parent, &mut labels)?;
        LabeledPlaneTree::new(parent, labels)
    }
}

/// A uniform plane tree with `n_edges` edges and i.i.d. uniform increments in
/// `{-1, 0, 1}`.
pub fn sample_uniform(n_edges: usize, seed: u64) -> Result<LabeledPlaneTree> {
    if n_edges < 1 {
        return Err(param("a labeled tree needs at least one edge"));
    }
    let mut rng = rng_for(seed, stream::PLANE_TREE);
    // n up-steps and n + 1 down-steps; rotating at the first minimum and
    // dropping the final down-step leaves a uniform Dyck word.
    let mut steps: Vec<bool> = std::iter::repeat(true).take(n_edges).chain(std::iter::repeat(false).take(n_edges + 1)).collect();
    steps.shuffle(&mut rng);
    let mut sum = 0i64;
    let mut best = 0i64;
    let mut start = 0;
    for (j, &up) in steps.iter().enumerate() {
        sum += if up { 1 } else { -1 };
        if sum < best {
            best = sum;
            start = j + 1;
        }
    }
    let len = steps.len();
    let word: Vec<bool> = (0..len - 1).map(|k| steps[(start + k) % len]).collect();
    let mut label_rng = rng_for(seed, stream::TREE_LABELS);
    let increments: Vec<i64> = (0..n_edges).map(|_| label_rng.random_range(-1..=1)).collect();
    LabeledPlaneTree::from_dyck(&word, &increments)
}

/// Every Dyck word with `n` up-steps, in lexicographic order (`true` first).
pub fn dyck_words(n: usize) -> Vec<Vec<bool>> {
    fn rec(up: usize, down: usize, n: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if cur.len() == 2 * n {
            out.push(cur.clone());
            return;
        }
        if up < n {
            cur.push(true);
            rec(up + 1, down, n, cur, out);
            cur.pop();
        }
        if down < up {
            cur.push(false);
            rec(up, down + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, 0, n, &mut Vec::new(), &mut out);
    out
}

/// Every labeled plane tree with `n` edges.
pub fn all_trees(n: usize) -> Vec<LabeledPlaneTree> {
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for word in dyck_words(n) {
        for code in 0..total {
            let mut c = code;
            let inc: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect();
            out.push(LabeledPlaneTree::from_dyck(&word, &inc).expect("enumerated words are valid"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_of_a_cherry() {
        // Root with two leaf children.
        let t = LabeledPlaneTree::new(vec![0, 0, 0], vec![0, 1, -1]).unwrap();
        assert_eq!(t.contour(), vec![0, 1, 0, 2]);
        assert_eq!(t.dyck_word(), vec![true, false, true, false]);
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(LabeledPlaneTree::new(vec![0, 0], vec![0, 2]).is_err());
        assert!(LabeledPlaneTree::new(vec![0, 0], vec![1, 1]).is_err());
        assert!(LabeledPlaneTree::new(vec![0], vec![0]).is_err());
        // Vertex 3 hangs off vertex 1 after vertex 2 closed that branch.
        assert!(LabeledPlaneTree::new(vec![0, 0, 0, 1], vec![0; 4]).is_err());
        assert!(LabeledPlaneTree::from_dyck(&[true, false, false], &[0]).is_err());
    }

    #[test]
    fn catalan_times_three_to_the_n() {
        for (n, cat) in [(1, 1), (2, 2), (3, 5), (4, 14)] {
            assert_eq!(dyck_words(n).len(), cat);
            assert_eq!(all_trees(n).len(), cat * 3usize.pow(n as u32));
        }
    }

    #[test]
    fn json_and_dyck_roundtrip() {
        for t in all_trees(3) {
            assert_eq!(LabeledPlaneTree::from_json(&t.to_json()).unwrap(), t);
            let inc: Vec<i64> = (1..t.n_vertices()).map(|v| t.labels()[v] - t.labels()[t.parent(v)]).collect();
            assert_eq!(LabeledPlaneTree::from_dyck(&t.dyck_word(), &inc).unwrap(), t);
        }
    }

    #[test]
    fn mirror_is_an_involution() {
        for t in all_trees(3) {
            assert_eq!(t.mirror().mirror(), t);
        }
        let t = LabeledPlaneTree::new(vec![0, 0, 0], vec![0, 1, -1]).unwrap();
        assert_eq!(t.mirror(), LabeledPlaneTree::new(vec![0, 0, 0], vec![0, -1, 1]).unwrap());
    }

    #[test]
    fn sampler_is_seeded() {
        assert_eq!(sample_uniform(50, 3).unwrap(), sample_uniform(50, 3).unwrap());
        assert_eq!(sample_uniform(50, 3).unwrap().n_edges(), 50);
        assert!(sample_uniform(0, 3).is_err());
    }
}
