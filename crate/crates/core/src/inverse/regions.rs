use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::inverse::Inverter;

/// A loop through the sample and the two macroscopic regions it bounds.
#[derive(Clone, Debug, Serialize)]
pub struct LoopRegions {
    pub loop_points: Vec<usize>,
    pub region_a: Vec<usize>,
    pub region_b: Vec<usize>,
    /// Points within `eta` of the loop and points of small components.
    pub boundary: Vec<usize>,
    pub mass_a: f64,
    pub mass_b: f64,
    pub boundary_mass: f64,
    /// Macroscopic components beyond the two largest, folded into the boundary.
    pub extra_components: usize,
    /// Region a with every boundary point given to the region of its nearest
    /// core point.
    pub side_a: Vec<bool>,
    pub split_mass_a: f64,
    pub split_mass_b: f64,
}

/// For every cut point, the components of the graph with its arms removed.
pub(crate) struct Separators {
    pub cuts: Vec<usize>,
    comp: Vec<Vec<u32>>,
}

impl Separators {
    fn separates(&self, k: usize, x: usize, y: usize) -> bool {
        let c = &self.comp[k];
        c[x] != u32::MAX && c[y] != u32::MAX && c[x] != c[y]
    }

    fn comp_of(&self, k: usize, x: usize) -> u32 {
        self.comp[k][x]
    }
}

/// Connected components of `graph` restricted to points not `removed`;
/// removed points get `u32::MAX`.
pub(crate) fn components(graph: &[Vec<u32>], removed: &[bool]) -> Vec<u32> {
    let m = graph.len();
    let mut comp = vec![u32::MAX; m];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for s in 0..m {
        if removed[s] || comp[s] != u32::MAX {
            continue;
        }
        comp[s] = next;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in &graph[v] {
                let w = w as usize;
                if !removed[w] && comp[w] == u32::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

impl Inverter<'_> {
    /// The geodesics from `z` to `x¹` down to the level where they merge.
    ///
    /// Two points of the geodesic set are on different arms when their
    /// distance exceeds the label gap by half the separation radius; the arms
    /// end at the lowest such pair.
    pub fn arms(&self, z: usize) -> Vec<usize> {
        let g: Vec<usize> = self.geodesic_set(z).collect();
        let gap = self.th.sep_radius / 2.0;
        let mut level = f64::INFINITY;
        for (a, &w) in g.iter().enumerate() {
            for &v in &g[a + 1..] {
                if self.d(w, v) - (self.labels[w] - self.labels[v]).abs() >= gap {
                    level = level.min(self.labels[w].min(self.labels[v]));
                }
            }
        }
        if level.is_infinite() {
            level = self.labels[z] - 2.0 * self.th.sep_radius;
        }
        g.into_iter().filter(|&w| self.labels[w] >= level).collect()
    }

    /// Points within `eta` of some point of `set`.
    fn neighbourhood(&self, set: &[usize]) -> Vec<bool> {
        (0..self.m()).map(|v| set.iter().any(|&w| self.d(v, w) <= self.th.eta)).collect()
    }

    pub(crate) fn separators(&self) -> &Separators {
        self.separators.get_or_init(|| {
            let locus = self.classification();
            let cuts: Vec<usize> = (0..self.m()).filter(|&z| locus.in_cut[z]).collect();
            let comp = cuts.par_iter().map(|&z| components(&self.graph, &self.neighbourhood(&self.arms(z)))).collect();
            Separators { cuts, comp }
        })
    }

    /// Cut points whose two arms separate `x` from `y` in the neighbourhood
    /// graph, by increasing label.
    pub fn branch_between(&self, x: usize, y: usize) -> Result<Vec<usize>> {
        let m = self.m();
        if x >= m || y >= m {
            return Err(Error::Index { index: x.max(y), n: m });
        }
        if x == y {
            return Ok(Vec::new());
        }
        if self.base_comp[x] != self.base_comp[y] {
            return Err(Error::Density(format!("points {x} and {y} are already disconnected at graph scale {:.4}", self.th.eps_graph)));
        }
        let sep = self.separators();
        let mut out: Vec<usize> = (0..sep.cuts.len())
            .filter(|&k| sep.cuts[k] != x && sep.cuts[k] != y && sep.separates(k, x, y))
            .map(|k| sep.cuts[k])
            .collect();
        out.sort_by(|&a, &b| self.labels[a].total_cmp(&self.labels[b]).then(a.cmp(&b)));
        Ok(out)
    }

    /// Branch points between `x⁰` and `x`, ordered from `x⁰` toward `x` by the
    /// shrinking mass of the side that holds `x`.
    pub fn ordered_branch(&self, x: usize) -> Result<Vec<usize>> {
        let i0 = self.s.i0;
        let branch = self.branch_between(i0, x)?;
        let sep = self.separators();
        let mut keyed: Vec<(f64, usize)> = branch
            .into_iter()
            .map(|z| {
                let k = sep.cuts.binary_search(&z).expect("branch points are cut points");
                let c = sep.comp_of(k, x);
                (self.mass_of((0..self.m()).filter(|&v| sep.comp_of(k, v) == c)), z)
            })
            .collect();
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(keyed.into_iter().map(|(_, z)| z).collect())
    }

    /// The loop through `x⁰` and `x` made of the branch between them and the
    /// two geodesics down to their merge point, and the regions it bounds.
    pub fn jordan_loop(&self, x: usize) -> Result<LoopRegions> {
        let (i0, m) = (self.s.i0, self.m());
        if x == i0 {
            return Err(param("the loop of x⁰ is degenerate"));
        }
        let branch = self.ordered_branch(x)?;
        // Consecutive branch points are joined by near-geodesic chains so the
        // branch is a curve at the graph scale, not a scatter of points.
        let mut path = vec![i0];
        let stops: Vec<usize> = branch.iter().copied().chain(std::iter::once(x)).collect();
        for &z in &stops {
            let from = *path.last().unwrap();
            match self.extract_geodesic(from, z, self.th.r_cov) {
                Ok(chain) => path.extend(chain.into_iter().skip(1)),
                Err(_) => path.push(z),
            }
        }
        let mut on0 = vec![false; m];
        for w in self.geodesic_set(i0) {
            on0[w] = true;
        }
        let merge = self.geodesic_set(x).find(|&w| on0[w]).unwrap_or(self.s.i1);
        let level = self.labels[merge];
        let mut loop_points: Vec<usize> = [x, i0]
            .into_iter()
            .chain(path)
            .chain(self.geodesic_set(x).filter(|&w| self.labels[w] >= level))
            .chain(self.geodesic_set(i0).filter(|&w| self.labels[w] >= level))
            .collect();
        loop_points.sort_unstable();
        loop_points.dedup();

        let removed = self.neighbourhood(&loop_points);
        let comp = components(&self.graph, &removed);
        let n_comp = comp.iter().filter(|&&c| c != u32::MAX).map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut masses = vec![0.0; n_comp];
        for v in 0..m {
            if comp[v] != u32::MAX {
                masses[comp[v] as usize] += self.s.mass[v];
            }
        }
        let mut order: Vec<usize> = (0..n_comp).collect();
        order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]).then(a.cmp(&b)));
        let macroscopic = order.iter().filter(|&&c| masses[c] >= self.th.min_region_mass).count();
        if macroscopic < 2 {
            return Err(Error::Density(format!(
                "the loop through {x} leaves {macroscopic} macroscopic region(s); largest masses {:?}",
                order.iter().take(3).map(|&c| masses[c]).collect::<Vec<_>>()
            )));
        }
        let (ca, cb) = (order[0] as u32, order[1] as u32);
        let region_a: Vec<usize> = (0..m).filter(|&v| comp[v] == ca).collect();
        let region_b: Vec<usize> = (0..m).filter(|&v| comp[v] == cb).collect();
        let boundary: Vec<usize> = (0..m).filter(|&v| comp[v] != ca && comp[v] != cb).collect();

        let mut side_a: Vec<bool> = comp.iter().map(|&c| c == ca).collect();
        for &v in &boundary {
            let row = self.s.dist.row(v);
            let nearest = region_a.iter().chain(&region_b).copied().min_by(|&p, &q| row[p].total_cmp(&row[q]).then(p.cmp(&q)));
            side_a[v] = nearest.is_some_and(|p| comp[p] == ca);
        }
        let split_mass_a = self.mass_of((0..m).filter(|&v| side_a[v]));
        Ok(LoopRegions {
            mass_a: self.mass_of(region_a.iter().copied()),
            mass_b: self.mass_of(region_b.iter().copied()),
            boundary_mass: self.mass_of(boundary.iter().copied()),
            extra_components: macroscopic - 2,
            split_mass_b: self.mass_of(0..m) - split_mass_a,
            split_mass_a,
            side_a,
            loop_points,
            region_a,
            region_b,
            boundary,
        })
    }
}
