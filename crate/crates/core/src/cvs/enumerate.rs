//! Exhaustive enumeration of small labeled trees and quadrangulations.

use std::collections::HashSet;

use serde::Serialize;

use crate::cvs::quad::{vertex_ids, Quadrangulation};
use crate::cvs::tree::all_trees;

pub fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for k in 0..n as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// Every rooted quadrangulation with `n_faces` faces, in canonical form with
/// the pointed vertex set to 0.
///
/// Faces are fixed as the 4-cycles `(4k, 4k+1, 4k+2, 4k+3)`; each gluing of
/// half-edges into edges gives a map, kept if it is connected and planar.
pub fn rooted_quadrangulations(n_faces: usize) -> Vec<Quadrangulation> {
    let h = 4 * n_faces;
    let mut opp = vec![usize::MAX; h];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    glue(&mut opp, n_faces, &mut seen, &mut out);
    out
}

fn glue(opp: &mut [usize], n_faces: usize, seen: &mut HashSet<Quadrangulation>, out: &mut Vec<Quadrangulation>) {
    let Some(a) = opp.iter().position(|&x| x == usize::MAX) else {
        let next: Vec<usize> = opp.iter().map(|&x| 4 * (x / 4) + (x + 1) % 4).collect();
        if vertex_ids(&next).1 != n_faces + 2 {
            return;
        }
        // Connected with V = F + 2 forces genus 0.
        if let Ok(q) = Quadrangulation::new(opp.to_vec(), next, 0, 0) {
            let c = q.canonical().with_pointed(0).expect("vertex 0 exists");
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        return;
    };
    for b in a + 1..opp.len() {
        if opp[b] == usize::MAX {
            opp[a] = b;
            opp[b] = a;
            glue(opp, n_faces, seen, out);
            opp[a] = usize::MAX;
            opp[b] = usize::MAX;
        }
    }
}

/// Every rooted pointed quadrangulation with `n_faces` faces.
pub fn pointed_quadrangulations(n_faces: usize) -> Vec<Quadrangulation> {
    let mut out = Vec::new();
    for q in rooted_quadrangulations(n_faces) {
        for v in 0..q.n_vertices() {
            out.push(q.with_pointed(v).expect("vertex in range"));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CountRow {
    pub n: usize,
    pub labeled_trees: u64,
    pub rooted_quadrangulations: u64,
    pub pointed_quadrangulations: u64,
    /// `3^n · Catalan(n)`.
    pub expected_trees: u64,
    /// `2 · 3^n · Catalan(n)`.
    pub expected_pointed: u64,
}

impl CountRow {
    pub fn matches(&self) -> bool {
        self.labeled_trees == self.expected_trees && self.pointed_quadrangulations == self.expected_pointed
    }
}

pub fn count_row(n: usize) -> CountRow {
    let rooted = rooted_quadrangulations(n);
    let pointed: usize = rooted.iter().map(|q| q.n_vertices()).sum();
    let expected_trees = 3u64.pow(n as u32) * catalan(n);
    CountRow {
        n,
        labeled_trees: all_trees(n).len() as u64,
        rooted_quadrangulations: rooted.len() as u64,
        pointed_quadrangulations: pointed as u64,
        expected_trees,
        expected_pointed: 2 * expected_trees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_numbers() {
        let c: Vec<u64> = (0..8).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn rooted_counts() {
        // 2 · 3^n · (2n)! / (n! (n + 2)!): 2, 9, 54.
        assert_eq!(rooted_quadrangulations(1).len(), 2);
        assert_eq!(rooted_quadrangulations(2).len(), 9);
        assert_eq!(rooted_quadrangulations(3).len(), 54);
    }

    #[test]
    fn pointed_counts_match_twice_the_trees() {
        for n in 1..=3 {
            assert!(count_row(n).matches(), "{:?}", count_row(n));
        }
    }
}
