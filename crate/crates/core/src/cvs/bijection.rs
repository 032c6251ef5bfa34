//! The Cori-Vauquelin-Schaeffer bijection and its inverse.
//!
//! In the successor construction, corner `i` of the contour sends one arc to
//! the next corner (cyclically) whose label is one less, or to the extra
//! vertex `v*` when its label is minimal. Arc `i` is the half-edge pair `2i`
//! (at corner `i`) and `2i + 1` (at the far end).

use crate::cvs::quad::{vertex_ids, Quadrangulation};
use crate::cvs::tree::LabeledPlaneTree;
use crate::error::{Error, Result};

/// Successor corner of every corner, `None` for corners of minimal label.
fn successors(labels: &[i64]) -> Vec<Option<usize>> {
    let c = labels.len();
    let lo = *labels.iter().min().unwrap();
    let hi = *labels.iter().max().unwrap();
    let mut last_seen = vec![usize::MAX; (hi - lo + 1) as usize];
    let mut succ = vec![None; c];
    // Two backward laps: on the second one every label already has its
    // nearest later occurrence recorded.
    for k in (0..2 * c).rev() {
        let i = k % c;
        let l = labels[i];
        if k < c && l > lo {
            succ[i] = Some(last_seen[(l - 1 - lo) as usize] % c);
        }
        last_seen[(l - lo) as usize] = k;
    }
    succ
}

/// Builds the rooted pointed quadrangulation of `tree`; the result is in
/// canonical form.
///
/// With `sign = 1` arcs go to successor corners and the root is the arc from
/// the root corner, pointing away from it. With `sign = -1` the construction
/// is run on the mirrored tree and the map is mirrored back, which amounts to
/// arcs to predecessor corners and the root arc pointing toward the root
/// corner. Reflecting a tree and flipping the sign therefore reflects the map.
pub fn cvs_forward(tree: &LabeledPlaneTree, sign: i8) -> Result<Quadrangulation> {
    Ok(cvs_forward_embedded(tree, sign)?.0)
}

/// [`cvs_forward`] together with the map vertex of every tree vertex.
pub fn cvs_forward_embedded(tree: &LabeledPlaneTree, sign: i8) -> Result<(Quadrangulation, Vec<usize>)> {
    let (q, at) = match sign {
        1 => successor_map(tree)?,
        -1 => {
            let (mirrored, new_id) = tree.mirror_with_ids();
            let (q, at_mirrored) = successor_map(&mirrored)?;
            // Mirroring keeps half-edge and vertex ids.
            (q.mirror(), new_id.iter().map(|&v| at_mirrored[v]).collect())
        }
        _ => return Err(Error::Param(format!("sign must be +1 or -1, got {sign}"))),
    };
    let (c, new_id) = q.canonical_with_ids();
    let vertex_half = first_half_edges(&q);
    let at = at.iter().map(|&v| c.origin(new_id[vertex_half[v]])).collect();
    Ok((c, at))
}

fn first_half_edges(q: &Quadrangulation) -> Vec<usize> {
    let mut out = vec![usize::MAX; q.n_vertices()];
    for h in (0..q.n_half_edges()).rev() {
        out[q.origin(h)] = h;
    }
    out
}

/// The successor construction, rooted at half-edge 0, with the map vertex of
/// every tree vertex.
fn successor_map(tree: &LabeledPlaneTree) -> Result<(Quadrangulation, Vec<usize>)> {
    let contour = tree.contour();
    let c = contour.len();
    let labels: Vec<i64> = contour.iter().map(|&v| tree.labels()[v]).collect();
    let succ = successors(&labels);

    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut to_pointed = Vec::new();
    for (i, s) in succ.iter().enumerate() {
        match s {
            Some(t) => incoming[*t].push(i),
            None => to_pointed.push(i),
        }
    }

    let mut opp = vec![0; 2 * c];
    for i in 0..c {
        opp[2 * i] = 2 * i + 1;
        opp[2 * i + 1] = 2 * i;
    }

    // Rotation at a tree vertex: its corners in contour order; inside a
    // corner, arriving arcs from the farthest back to the nearest, then the
    // departing arc.
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); tree.n_vertices()];
    for i in 0..c {
        let mut arr = std::mem::take(&mut incoming[i]);
        arr.sort_by_key(|&j| std::cmp::Reverse((j + c - i) % c));
        let rot = &mut rotation[contour[i]];
        rot.extend(arr.into_iter().map(|j| 2 * j + 1));
        rot.push(2 * i);
    }
    // Around v*, arcs in decreasing corner order.
    rotation.push(to_pointed.iter().rev().map(|&i| 2 * i + 1).collect());

    let mut next = vec![0; 2 * c];
    for rot in &rotation {
        for k in 0..rot.len() {
            next[rot[k]] = rot[(k + 1) % rot.len()];
        }
    }
    let origin = vertex_ids(&next).0;
    let pointed = origin[2 * to_pointed[0] + 1];
    let at = (0..tree.n_vertices()).map(|v| origin[rotation[v][0]]).collect();
    Ok((Quadrangulation::new(opp, next, 0, pointed)?, at))
}

/// Recovers the labeled tree and sign with `cvs_forward(tree, sign) == q`.
pub fn cvs_inverse(q: &Quadrangulation) -> Result<(LabeledPlaneTree, i8)> {
    q.validate()?;
    let d = q.bfs_labels(q.pointed());
    if d[q.origin(q.root())] > d[q.target(q.root())] {
        Ok((successor_tree(q, &d)?, 1))
    } else {
        // The mirror has the reversed root, which points toward v*.
        let m = q.mirror();
        Ok((successor_tree(&m, &d)?.mirror(), -1))
    }
}

/// Inverse of the successor construction for a map whose root points toward
/// the pointed vertex; `d` are the distances to it.
fn successor_tree(q: &Quadrangulation, d: &[u32]) -> Result<LabeledPlaneTree> {
    let root = q.root();
    let rho = q.origin(root);

    // One tree edge per face. The slot of a face at its corner `u_k` sits
    // just before `h_k` in the rotation, so a slot is named by `h_k`.
    let mut partner = vec![usize::MAX; q.n_half_edges()];
    for face in q.faces() {
        let dl: Vec<u32> = face.iter().map(|&h| d[q.origin(h)]).collect();
        let top = *dl.iter().max().unwrap();
        let k = (0..4).find(|&k| dl[k] == top).unwrap();
        let other = if dl[(k + 2) % 4] == top {
            // Labels l+1, l, l+1, l: join the two larger corners.
            (k + 2) % 4
        } else if dl[(k + 2) % 4] + 2 == top {
            // Labels l+2, l+1, l, l+1: join the top corner to the one before it.
            (k + 3) % 4
        } else {
            return Err(Error::Structure("face labels are not those of a quadrangulation".into()));
        };
        let (x, y) = (face[k], face[other]);
        partner[x] = y;
        partner[y] = x;
    }

    let n_edges = q.n_faces();
    let first_slot_after = |h: usize| -> usize {
        let mut x = q.next(h);
        while partner[x] == usize::MAX {
            x = q.next(x);
        }
        x
    };

    let mut id = vec![usize::MAX; q.n_vertices()];
    id[rho] = 0;
    let mut parent = vec![0usize];
    let mut labels = vec![0i64];
    let mut line = vec![0usize];
    let mut depart = first_slot_after(root);
    for _ in 0..2 * n_edges {
        let arrive = partner[depart];
        let w = q.origin(arrive);
        if id[w] == usize::MAX {
            id[w] = parent.len();
            parent.push(*line.last().unwrap());
            labels.push(d[w] as i64 - d[rho] as i64);
            line.push(id[w]);
        } else {
            line.pop();
            if line.last() != Some(&id[w]) {
                return Err(Error::Structure("tree edges do not form a tree".into()));
            }
        }
        depart = first_slot_after(arrive);
    }
    if parent.len() != n_edges + 1 || line.len() != 1 {
        return Err(Error::Structure("tree edges do not span the labeled vertices".into()));
    }
    LabeledPlaneTree::new(parent, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvs::tree::all_trees;

    #[test]
    fn successor_rule() {
        // Labels around the contour of a path 0-1-2 folded: 0, 1, 2, 1.
        assert_eq!(successors(&[0, 1, 2, 1]), vec![None, Some(0), Some(3), Some(0)]);
    }

    #[test]
    fn smallest_case_both_signs() {
        let t = LabeledPlaneTree::new(vec![0, 0], vec![0, 1]).unwrap();
        for sign in [1, -1] {
            let q = cvs_forward(&t, sign).unwrap();
            assert_eq!(q.n_vertices(), 3);
            assert_eq!(cvs_inverse(&q).unwrap(), (t.clone(), sign));
        }
    }

    #[test]
    fn roundtrip_up_to_three_edges() {
        for n in 1..=3 {
            for t in all_trees(n) {
                for sign in [1, -1] {
                    let q = cvs_forward(&t, sign).unwrap();
                    assert_eq!(q.n_vertices(), n + 2);
                    assert_eq!(cvs_inverse(&q).unwrap(), (t.clone(), sign), "tree {:?}", t.to_json());
                }
            }
        }
    }

    #[test]
    fn distance_identity() {
        for t in all_trees(3) {
            let (q, at) = cvs_forward_embedded(&t, 1).unwrap();
            let d = q.bfs_labels(q.pointed());
            let lo = *t.labels().iter().min().unwrap();
            for (v, &l) in t.labels().iter().enumerate() {
                assert_eq!(d[at[v]] as i64, l - lo + 1);
            }
        }
    }

    #[test]
    fn mirror_and_sign_flip() {
        for t in all_trees(3) {
            for sign in [1, -1] {
                let q = cvs_forward(&t, sign).unwrap();
                assert!(cvs_forward(&t.mirror(), -sign).unwrap().same_map(&q.mirror()));
            }
        }
    }

    #[test]
    fn rejects_bad_sign() {
        let t = LabeledPlaneTree::new(vec![0, 0], vec![0, 1]).unwrap();
        assert!(cvs_forward(&t, 0).is_err());
    }
}
