//! The inverse map: from a marked metric measure sample back to a snake.
//!
//! Nothing in here looks at contour times. The inputs are the distances, the
//! point masses, the two marked points and the orientation bit of a
//! [`MarkedSphereSample`].

mod geodesic;
mod locus;
mod recover;
mod regions;

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mating::{DistanceMatrix, MarkedSphereSample};

pub use locus::LocusClassification;
pub use recover::{phi, OrientationTime, Parametrization, RecoveredSnake, RecoveryQuality};
pub use regions::LoopRegions;

/// Every point keeps at least this many graph neighbours.
const GRAPH_MIN_DEGREE: usize = 3;

/// Candidate graph scales, in covering radii.
pub const GRAPH_FACTORS: [f64; 6] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0];

/// `ℓ(i) = d(i, x¹) - d(x⁰, x¹)`.
pub fn recover_labels(s: &MarkedSphereSample) -> Vec<f64> {
    let base = s.dist.get(s.i0, s.i1);
    s.dist.row(s.i1).iter().map(|d| d - base).collect()
}

/// 90% quantile of the nearest-neighbour distances.
///
/// The maximum is dominated by a handful of isolated points, so a high
/// quantile is used as the covering scale instead.
pub fn covering_radius(d: &DistanceMatrix) -> f64 {
    let m = d.m();
    if m < 2 {
        return 0.0;
    }
    let mut nn: Vec<f64> = (0..m)
        .map(|i| d.row(i).iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).fold(f64::INFINITY, f64::min))
        .collect();
    nn.sort_by(f64::total_cmp);
    nn[(9 * (m - 1)) / 10]
}

/// Scale-free knobs; every length is a multiple of the covering radius.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct InverseParams {
    /// Geodesic detour tolerance, relative to the label range.
    pub tol_geo_rel: f64,
    pub sep_factor: f64,
    /// Graph scale in covering radii; `None` picks the smallest of
    /// [`GRAPH_FACTORS`] at which `x⁰` and `x¹` share a component holding 95%
    /// of the mass.
    pub graph_factor: Option<f64>,
    /// Loop neighbourhood radius as a fraction of the graph scale.
    pub eta_factor: f64,
    /// Depth of the geodesic through a point, on both sides, for `in_geo`.
    pub geo_factor: f64,
    /// Smallest mass of a region counted as macroscopic.
    pub min_region_mass: f64,
}

impl Default for InverseParams {
    fn default() -> Self {
        InverseParams { tol_geo_rel: 1e-6, sep_factor: 1.0, graph_factor: None, eta_factor: 0.5, geo_factor: 4.0, min_region_mass: 0.05 }
    }
}

/// The lengths derived from [`InverseParams`] for one sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    pub r_cov: f64,
    pub tol_geo: f64,
    pub sep_radius: f64,
    pub eps_graph: f64,
    pub eta: f64,
    pub geo_depth: f64,
    pub min_region_mass: f64,
}

/// Shared state of the inverse: labels, geodesic sets, the neighbourhood
/// graph and, on demand, the classification and the cut-point separators.
pub struct Inverter<'a> {
    s: &'a MarkedSphereSample,
    labels: Vec<f64>,
    th: Thresholds,
    /// Points on some geodesic from `x` to `x¹`, by decreasing label.
    geo: Vec<Vec<u32>>,
    graph: Vec<Vec<u32>>,
    base_comp: Vec<u32>,
    locus: OnceLock<LocusClassification>,
    separators: OnceLock<regions::Separators>,
}

impl<'a> Inverter<'a> {
    pub fn new(s: &'a MarkedSphereSample, params: &InverseParams) -> Result<Self> {
        let m = s.dist.m();
        if m < 20 {
            return Err(param(format!("the inverse needs at least 20 sample points, got {m}")));
        }
        if s.i0 == s.i1 || s.i0 >= m || s.i1 >= m {
            return Err(param("the marked points must be two distinct sample points"));
        }
        if s.mass.len() != m || s.mass.iter().any(|&w| !(w >= 0.0)) {
            return Err(param("one nonnegative mass per sample point is required"));
        }
        let labels = recover_labels(s);
        let (lo, hi) = labels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
        let r_cov = covering_radius(&s.dist);
        let d = &s.dist;
        let geo = (0..m)
            .into_par_iter()
            .map(|x| {
                let row = d.row(x);
                let tol = params.tol_geo_rel * (hi - lo);
                let mut g: Vec<u32> = (0..m).filter(|&w| row[w] + labels[w] - labels[x] <= tol).map(|w| w as u32).collect();
                g.sort_by(|&a, &b| labels[b as usize].total_cmp(&labels[a as usize]).then(a.cmp(&b)));
                g
            })
            .collect();
        let factors: Vec<f64> = match params.graph_factor {
            Some(f) => vec![f],
            None => GRAPH_FACTORS.to_vec(),
        };
        let mut chosen = None;
        for &f in &factors {
            let graph = neighbourhood_graph(d, f * r_cov);
            let comp = regions::components(&graph, &vec![false; m]);
            let mut mass = vec![0.0; m];
            for v in 0..m {
                mass[comp[v] as usize] += s.mass[v];
            }
            let giant = mass[comp[s.i0] as usize] / s.mass.iter().sum::<f64>();
            let done = comp[s.i0] == comp[s.i1] && giant >= 0.95;
            chosen = Some((f, graph, comp));
            if done {
                break;
            }
        }
        let (f, graph, base_comp) = chosen.expect("at least one graph scale");
        let th = Thresholds {
            r_cov,
            tol_geo: params.tol_geo_rel * (hi - lo),
            sep_radius: params.sep_factor * r_cov,
            eps_graph: f * r_cov,
            eta: params.eta_factor * f * r_cov,
            geo_depth: params.geo_factor * r_cov,
            min_region_mass: params.min_region_mass,
        };
        Ok(Inverter { s, labels, th, geo, graph, base_comp, locus: OnceLock::new(), separators: OnceLock::new() })
    }

    pub fn sample(&self) -> &MarkedSphereSample {
        self.s
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.th
    }

    pub fn m(&self) -> usize {
        self.s.dist.m()
    }

    #[inline]
    fn d(&self, i: usize, j: usize) -> f64 {
        self.s.dist.get(i, j)
    }

    /// Sample points on a geodesic from `x` to `x¹`, within the detour
    /// tolerance, by decreasing label.
    pub fn geodesic_set(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.geo[x].iter().map(|&w| w as usize)
    }

    pub fn classification(&self) -> &LocusClassification {
        self.locus.get_or_init(|| self.classify())
    }

    fn mass_of(&self, points: impl Iterator<Item = usize>) -> f64 {
        points.map(|i| self.s.mass[i]).sum()
    }
}

/// Edges between points within `eps`, plus each point's nearest neighbours so
/// that isolated points still hang on.
fn neighbourhood_graph(d: &DistanceMatrix, eps: f64) -> Vec<Vec<u32>> {
    let m = d.m();
    let mut graph: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let row = d.row(i);
            let mut near: Vec<u32> = (0..m).filter(|&j| j != i).map(|j| j as u32).collect();
            near.sort_by(|&a, &b| row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b)));
            let k = near.iter().take_while(|&&j| row[j as usize] <= eps).count().max(GRAPH_MIN_DEGREE);
            near.truncate(k);
            near
        })
        .collect();
    for i in 0..m {
        for k in 0..graph[i].len() {
            let j = graph[i][k] as usize;
            if !graph[j].contains(&(i as u32)) {
                graph[j].push(i as u32);
            }
        }
    }
    graph
}
