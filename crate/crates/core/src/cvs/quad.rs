//! Rooted pointed quadrangulations as rotation systems.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar map given by half-edges.
///
/// `opp` pairs the two halves of each edge, `next` turns around the origin
/// vertex. Faces are the orbits of `h -> next(opp(h))`, listed by the
/// half-edges leaving their corners. Vertex ids number the `next`-orbits by
/// their smallest half-edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadrangulation {
    opp: Vec<usize>,
    next: Vec<usize>,
    root: usize,
    pointed: usize,
    origin: Vec<usize>,
    n_vertices: usize,
}

#[derive(Serialize, Deserialize)]
struct HalfEdgeRecord {
    opp: usize,
    next: usize,
}

#[derive(Serialize, Deserialize)]
struct MapRecord {
    half_edges: Vec<HalfEdgeRecord>,
    root: usize,
    pointed: usize,
}

/// Vertex id of every half-edge and the vertex count.
pub(crate) fn vertex_ids(next: &[usize]) -> (Vec<usize>, usize) {
    let mut origin = vec![usize::MAX; next.len()];
    let mut count = 0;
    for h in 0..next.len() {
        if origin[h] != usize::MAX {
            continue;
        }
        let mut x = h;
        while origin[x] == usize::MAX {
            origin[x] = count;
            x = next[x];
        }
        count += 1;
    }
    (origin, count)
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

impl Quadrangulation {
    pub fn new(opp: Vec<usize>, next: Vec<usize>, root: usize, pointed: usize) -> Result<Self> {
        let q = Quadrangulation::unchecked(opp, next, root, pointed)?;
        q.validate()?;
        Ok(q)
    }

    /// Builds the map checking only that the arrays are well formed.
    pub(crate) fn unchecked(opp: Vec<usize>, next: Vec<usize>, root: usize, pointed: usize) -> Result<Self> {
        let h = opp.len();
        if h == 0 || next.len() != h {
            return Err(Error::Structure("opp and next must be nonempty and of equal length".into()));
        }
        if !is_permutation(&next) {
            return Err(Error::Structure("next is not a permutation".into()));
        }
        if (0..h).any(|x| opp[x] >= h || opp[x] == x || opp[opp[x]] != x) {
            return Err(Error::Structure("opp is not a fixed-point-free involution".into()));
        }
        if root >= h {
            return Err(Error::Structure(format!("root half-edge {root} out of range")));
        }
        let (origin, n_vertices) = vertex_ids(&next);
        if pointed >= n_vertices {
            return Err(Error::Structure(format!("pointed vertex {pointed} out of range")));
        }
        Ok(Quadrangulation { opp, next, root, pointed, origin, n_vertices })
    }

    /// Checks connectivity, face degrees, Euler's formula and bipartiteness.
    pub fn validate(&self) -> Result<()> {
        let faces = self.faces();
        if let Some(f) = faces.iter().find(|f| f.len() != 4) {
            return Err(Error::Structure(format!("face of degree {}", f.len())));
        }
        if !self.is_connected() {
            return Err(Error::Structure("map is not connected".into()));
        }
        let (v, e, f) = (self.n_vertices as i64, (self.opp.len() / 2) as i64, faces.len() as i64);
        if v - e + f != 2 {
            return Err(Error::Structure(format!("not planar: V - E + F = {}", v - e + f)));
        }
        let d = self.bfs_labels(0);
        if (0..self.opp.len()).any(|h| (d[self.origin[h]] + d[self.target(h)]) % 2 == 0) {
            return Err(Error::Structure("map is not bipartite".into()));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.opp.len()];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(h) = queue.pop() {
            for x in [self.next[h], self.opp[h]] {
                if !seen[x] {
                    seen[x] = true;
                    count += 1;
                    queue.push(x);
                }
            }
        }
        count == self.opp.len()
    }

    pub fn n_half_edges(&self) -> usize {
        self.opp.len()
    }

    pub fn n_edges(&self) -> usize {
        self.opp.len() / 2
    }

    pub fn n_faces(&self) -> usize {
        self.opp.len() / 4
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn pointed(&self) -> usize {
        self.pointed
    }

    pub fn opp(&self, h: usize) -> usize {
        self.opp[h]
    }

    pub fn next(&self, h: usize) -> usize {
        self.next[h]
    }

    pub fn origin(&self, h: usize) -> usize {
        self.origin[h]
    }

    pub fn target(&self, h: usize) -> usize {
        self.origin[self.opp[h]]
    }

    /// Face orbits, each listed from its smallest half-edge.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.opp.len()];
        let mut out = Vec::new();
        for h in 0..self.opp.len() {
            if seen[h] {
                continue;
            }
            let mut face = Vec::new();
            let mut x = h;
            while !seen[x] {
                seen[x] = true;
                face.push(x);
                x = self.next[self.opp[x]];
            }
            out.push(face);
        }
        out
    }

    /// Graph distances from vertex `v` along edges.
    pub fn bfs_labels(&self, v: usize) -> Vec<u32> {
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); self.n_vertices];
        for h in 0..self.opp.len() {
            out_edges[self.origin[h]].push(h);
        }
        let mut d = vec![u32::MAX; self.n_vertices];
        d[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &h in &out_edges[u] {
                let w = self.target(h);
                if d[w] == u32::MAX {
                    d[w] = d[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    }

    /// The same rooted pointed map with half-edges renumbered by a search
    /// from the root. Two maps are isomorphic iff their canonical forms are
    /// equal.
    pub fn canonical(&self) -> Quadrangulation {
        self.canonical_with_ids().0
    }

    /// The canonical form and the new id of every old half-edge.
    pub fn canonical_with_ids(&self) -> (Quadrangulation, Vec<usize>) {
        let h = self.opp.len();
        let mut new_id = vec![usize::MAX; h];
        let mut order = Vec::with_capacity(h);
        new_id[self.root] = 0;
        order.push(self.root);
        let mut k = 0;
        while k < order.len() {
            let x = order[k];
            k += 1;
            for y in [self.next[x], self.opp[x]] {
                if new_id[y] == usize::MAX {
                    new_id[y] = order.len();
                    order.push(y);
                }
            }
        }
        let opp: Vec<usize> = order.iter().map(|&x| new_id[self.opp[x]]).collect();
        let next: Vec<usize> = order.iter().map(|&x| new_id[self.next[x]]).collect();
        let (origin, n_vertices) = vertex_ids(&next);
        // Any half-edge at the pointed vertex carries its new id.
        let at_pointed = (0..h).find(|&x| self.origin[x] == self.pointed).expect("vertex has a half-edge");
        let pointed = origin[new_id[at_pointed]];
        (Quadrangulation { opp, next, root: 0, pointed, origin, n_vertices }, new_id)
    }

    /// The same rooted map pointed at vertex `v`.
    pub fn with_pointed(&self, v: usize) -> Result<Quadrangulation> {
        if v >= self.n_vertices {
            return Err(Error::Structure(format!("pointed vertex {v} out of range")));
        }
        Ok(Quadrangulation { pointed: v, ..self.clone() })
    }

    pub fn same_map(&self, other: &Quadrangulation) -> bool {
        self.opp.len() == other.opp.len() && self.canonical() == other.canonical()
    }

    /// The mirror image: every rotation reversed. The root is reversed too,
    /// so that it still has the same face on its left.
    pub fn mirror(&self) -> Quadrangulation {
        let mut prev = vec![0; self.next.len()];
        for (h, &n) in self.next.iter().enumerate() {
            prev[n] = h;
        }
        // Vertices are the same orbits, so their ids do not change.
        Quadrangulation { next: prev, root: self.opp[self.root], ..self.clone() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = MapRecord {
            half_edges: (0..self.opp.len()).map(|h| HalfEdgeRecord { opp: self.opp[h], next: self.next[h] }).collect(),
            root: self.root,
            pointed: self.pointed,
        };
        serde_json::to_value(rec).expect("plain record serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rec: MapRecord = serde_json::from_value(value.clone())?;
        let (opp, next) = rec.half_edges.iter().map(|r| (r.opp, r.next)).unzip();
        Quadrangulation::new(opp, next, rec.root, rec.pointed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The one-face map: a path of two edges, folded.
    fn two_edge_path() -> Quadrangulation {
        // Edges a = {0,1} and b = {2,3}; middle vertex holds 1 and 2.
        Quadrangulation::new(vec![1, 0, 3, 2], vec![0, 2, 1, 3], 0, 0).unwrap()
    }

    #[test]
    fn single_face() {
        let q = two_edge_path();
        assert_eq!(q.n_vertices(), 3);
        assert_eq!(q.faces().len(), 1);
        assert_eq!(q.bfs_labels(q.origin(1)), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_non_quadrangulations() {
        // One edge: a face of degree 2.
        assert!(Quadrangulation::new(vec![1, 0], vec![0, 1], 0, 0).is_err());
        assert!(Quadrangulation::new(vec![0, 1], vec![0, 1], 0, 0).is_err());
        assert!(Quadrangulation::new(vec![1, 0, 3, 2], vec![0, 2, 1, 3], 0, 5).is_err());
    }

    #[test]
    fn canonical_form_forgets_labels() {
        let q = two_edge_path();
        // Swap the names of the two edges.
        let p = [2, 3, 0, 1];
        let mut opp = vec![0; 4];
        let mut next = vec![0; 4];
        for h in 0..4 {
            opp[p[h]] = p[q.opp(h)];
            next[p[h]] = p[q.next(h)];
        }
        let moved = Quadrangulation::new(opp, next, p[q.root()], 0).unwrap();
        let pointed_here = moved.origin(p[(0..4).find(|&x| q.origin(x) == q.pointed()).unwrap()]);
        let moved = Quadrangulation::new(moved.opp.clone(), moved.next.clone(), moved.root, pointed_here).unwrap();
        assert!(q.same_map(&moved));
        assert_eq!(q.canonical().canonical(), q.canonical());
        let other_root = Quadrangulation::new(q.opp.clone(), q.next.clone(), 1, q.pointed).unwrap();
        assert!(!q.same_map(&other_root));
    }

    #[test]
    fn json_roundtrip() {
        let q = two_edge_path();
        assert_eq!(Quadrangulation::from_json(&q.to_json()).unwrap(), q);
    }
}
