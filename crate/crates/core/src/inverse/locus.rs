use rayon::prelude::*;
use serde::Serialize;

use crate::inverse::{Inverter, Thresholds};

/// Per-point membership in the cut locus, in the union of geodesics to `x¹`,
/// or in neither.
#[derive(Clone, Debug, Serialize)]
pub struct LocusClassification {
    pub in_cut: Vec<bool>,
    pub in_geo: Vec<bool>,
    pub in_plain: Vec<bool>,
    /// Positive iff the cut test fires; comparable with `geo_margin`.
    pub cut_margin: Vec<f64>,
    pub geo_margin: Vec<f64>,
    pub thresholds: Thresholds,
}

impl Inverter<'_> {
    /// Separation of two geodesics leaving `x`, in `[0, 1]`.
    ///
    /// For two points `w, w'` at depths `r, r'` below `x` on geodesics to
    /// `x¹`, `d(w, w') - |r - r'|` is 0 when they sit on one geodesic and
    /// `r + r' - |r - r'|` when the only way between them is back through
    /// `x`. The score is the largest ratio over pairs with depths between a
    /// quarter and twice the separation radius.
    pub fn cut_score(&self, x: usize) -> f64 {
        let (lo, hi) = (self.th.sep_radius / 4.0, 2.0 * self.th.sep_radius);
        let arm: Vec<(usize, f64)> = self
            .geodesic_set(x)
            .map(|w| (w, self.labels[x] - self.labels[w]))
            .filter(|&(_, r)| r >= lo && r <= hi)
            .collect();
        let mut best = 0.0f64;
        for (a, &(w, r)) in arm.iter().enumerate() {
            for &(v, q) in &arm[a + 1..] {
                let dl = (r - q).abs();
                best = best.max((self.d(w, v) - dl) / (r + q - dl));
            }
        }
        best.min(1.0)
    }

    /// Depth of the deepest geodesic to `x¹` that passes through each point,
    /// as `min(above, below)`.
    pub fn geodesic_depths(&self) -> Vec<f64> {
        let m = self.m();
        let mut above = vec![0.0f64; m];
        for y in 0..m {
            for w in self.geodesic_set(y) {
                above[w] = above[w].max(self.labels[y] - self.labels[w]);
            }
        }
        let bottom = self.labels[self.s.i1];
        (0..m).map(|x| above[x].min(self.labels[x] - bottom)).collect()
    }

    pub(crate) fn classify(&self) -> LocusClassification {
        let m = self.m();
        let cut_margin: Vec<f64> = (0..m).into_par_iter().map(|x| (self.cut_score(x) - 0.5) / 0.5).collect();
        let geo_margin: Vec<f64> = self.geodesic_depths().iter().map(|&g| g / self.th.geo_depth - 1.0).collect();
        let mut in_cut = vec![false; m];
        let mut in_geo = vec![false; m];
        for x in 0..m {
            if x == self.s.i1 {
                continue;
            }
            let (c, g) = (cut_margin[x] >= 0.0, geo_margin[x] >= 0.0);
            match (c, g) {
                (true, true) if cut_margin[x] >= geo_margin[x] => in_cut[x] = true,
                (true, true) => in_geo[x] = true,
                (true, false) => in_cut[x] = true,
                (false, true) => in_geo[x] = true,
                _ => {}
            }
        }
        let in_plain = (0..m).map(|x| !in_cut[x] && !in_geo[x]).collect();
        LocusClassification { in_cut, in_geo, in_plain, cut_margin, geo_margin, thresholds: self.th }
    }
}
