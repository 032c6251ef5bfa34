use crate::error::{Error, Result};
use crate::inverse::Inverter;

impl Inverter<'_> {
    /// A chain of sample points from `i` to `j`, each within `tol` of a
    /// geodesic between them, found by recursive midpoints.
    ///
    /// Recursion stops once consecutive points are within three covering
    /// radii.
    pub fn extract_geodesic(&self, i: usize, j: usize, tol: f64) -> Result<Vec<usize>> {
        let m = self.m();
        if i >= m || j >= m {
            return Err(Error::Index { index: i.max(j), n: m });
        }
        if i == j {
            return Ok(vec![i]);
        }
        let mut out = vec![i];
        self.fill(i, j, (i, j), tol, &mut out)?;
        out.push(j);
        Ok(out)
    }

    fn fill(&self, a: usize, b: usize, ends: (usize, usize), tol: f64, out: &mut Vec<usize>) -> Result<()> {
        let dab = self.d(a, b);
        if dab <= 3.0 * self.th.r_cov {
            return Ok(());
        }
        let (i, j) = ends;
        let dij = self.d(i, j);
        let mut best: Option<(f64, f64, usize)> = None;
        for z in 0..self.m() {
            let (az, zb) = (self.d(a, z), self.d(z, b));
            if !(az > 0.0 && zb > 0.0 && az < dab && zb < dab) {
                continue;
            }
            let detour = az + zb - dab;
            if detour > tol || self.d(i, z) + self.d(z, j) > dij + tol {
                continue;
            }
            let key = ((az - dab / 2.0).abs(), detour, z);
            if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                best = Some(key);
            }
        }
        let Some((_, _, z)) = best else {
            return Err(Error::Density(format!(
                "no sample point between {a} and {b} (distance {dab:.4}) within detour {tol:.3e}"
            )));
        };
        self.fill(a, z, ends, tol, out)?;
        out.push(z);
        self.fill(z, b, ends, tol, out)
    }

    /// The highest point shared by the geodesic sets of `x` and `y`: where
    /// their geodesics to `x¹` merge. Ties go to the lowest index.
    pub fn merge_point(&self, x: usize, y: usize) -> usize {
        let mut on_y = vec![false; self.m()];
        for w in self.geodesic_set(y) {
            on_y[w] = true;
        }
        // Both sets contain x¹, and the sets are sorted by decreasing label.
        self.geodesic_set(x).find(|&w| on_y[w]).unwrap_or(self.s.i1)
    }

    /// `d(x, z) + d(y, z)` at the merge point `z`, which is the label-tree
    /// distance between `x` and `y` for points off the cut locus.
    pub fn label_tree_distance(&self, x: usize, y: usize) -> f64 {
        let z = self.merge_point(x, y);
        self.d(x, z) + self.d(y, z)
    }
}
