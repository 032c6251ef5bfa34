use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::inverse::{InverseParams, Inverter, LoopRegions};
use crate::mating::MarkedSphereSample;
use crate::quadvar::{duration_of_values, dyadic_schedule, std_dev};

/// Fewest points (marked ends included) on a branch for a duration estimate.
const MIN_BRANCH_POINTS: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct OrientationTime {
    pub s_star_hat: f64,
    /// The two sides of the loop through `x¹` are within `2/m` of each other.
    pub low_confidence: bool,
    /// Whether `D_{x¹}` is side a of `regions`.
    pub d_is_a: bool,
    pub regions: LoopRegions,
}

#[derive(Clone, Debug, Serialize)]
pub struct Parametrization {
    pub time_of: Vec<f64>,
    /// False for points whose time was copied from their nearest placed
    /// neighbour (cut and geodesic points, failed loops).
    pub placed: Vec<bool>,
    pub loop_failures: usize,
    /// Points whose designation won less than two thirds of the nesting votes.
    pub conflicts: usize,
    pub s_star_hat: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryQuality {
    /// `max |ĝ(time_of(x)) - ℓ(x)|` over placed points.
    pub label_residual: f64,
    pub loop_failures: usize,
    pub conflicts: usize,
    pub contour_failures: usize,
    pub placed: usize,
}

/// The recovered snake on the uniform grid `j / m`, `j = 0..=m`.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveredSnake {
    pub f_hat: Vec<f64>,
    pub g_hat: Vec<f64>,
    pub time_of: Vec<f64>,
    pub s_star_hat: f64,
    pub quality: RecoveryQuality,
}

impl Inverter<'_> {
    fn epsilon(&self) -> Result<i8> {
        self.s.epsilon.ok_or_else(|| param("the orientation ε is required"))
    }

    /// `μ(D_{x¹})`: the smaller side of the loop through `x¹` when `ε = +1`,
    /// the larger one otherwise.
    pub fn recover_orientation_time(&self) -> Result<OrientationTime> {
        let eps = self.epsilon()?;
        let regions = self.jordan_loop(self.s.i1)?;
        let (a, b) = (regions.split_mass_a, regions.split_mass_b);
        let d_is_a = if eps == 1 { a <= b } else { a > b };
        Ok(OrientationTime {
            s_star_hat: if d_is_a { a } else { b },
            low_confidence: (a - b).abs() < 2.0 / self.m() as f64,
            d_is_a,
            regions,
        })
    }

    /// `p⁻¹(x) = μ(D_x)` for plain points, with `D_x` picked among the two
    /// sides of each loop by nesting against sides already designated,
    /// starting from `D_{x¹}`.
    pub fn recover_parametrization(&self) -> Result<Parametrization> {
        let m = self.m();
        let (i0, i1) = (self.s.i0, self.s.i1);
        let orient = self.recover_orientation_time()?;
        let plain = &self.classification().in_plain;
        let probes: Vec<usize> = (0..m).filter(|&x| plain[x] && x != i0 && x != i1).collect();
        let loops: Vec<Option<LoopRegions>> = probes.par_iter().map(|&x| self.jordan_loop(x).ok()).collect();
        let loop_failures = loops.iter().filter(|l| l.is_none()).count();

        let side = |r: &LoopRegions, a: bool| -> FixedBitSet {
            let mut set = FixedBitSet::with_capacity(m);
            for v in 0..m {
                set.set(v, r.side_a[v] == a);
            }
            set
        };
        let mut refs = vec![side(&orient.regions, orient.d_is_a)];
        let mut time_of = vec![0.0; m];
        let mut placed = vec![false; m];
        placed[i0] = true;
        placed[i1] = true;
        time_of[i1] = orient.s_star_hat;

        let mut order: Vec<usize> = (0..probes.len()).filter(|&k| loops[k].is_some()).collect();
        order.sort_by_key(|&k| (loops[k].as_ref().unwrap().loop_points.len(), probes[k]));
        let mut conflicts = 0;
        for k in order {
            let r = loops[k].as_ref().unwrap();
            let (pa, pb) = (side(r, true), side(r, false));
            let (mut votes_a, mut votes_b) = (0usize, 0usize);
            let (mut total_a, mut total_b) = (0usize, 0usize);
            for q in &refs {
                let va = pa.difference_count(q).min(q.difference_count(&pa));
                let vb = pb.difference_count(q).min(q.difference_count(&pb));
                total_a += va;
                total_b += vb;
                match va.cmp(&vb) {
                    std::cmp::Ordering::Less => votes_a += 1,
                    std::cmp::Ordering::Greater => votes_b += 1,
                    std::cmp::Ordering::Equal => {}
                }
            }
            let pick_a = votes_a > votes_b || (votes_a == votes_b && total_a <= total_b);
            if 3 * votes_a.max(votes_b) < 2 * (votes_a + votes_b) {
                conflicts += 1;
            }
            let x = probes[k];
            time_of[x] = if pick_a { r.split_mass_a } else { r.split_mass_b };
            placed[x] = true;
            refs.push(if pick_a { pa } else { pb });
        }

        let anchors: Vec<usize> = (0..m).filter(|&v| placed[v]).collect();
        for v in 0..m {
            if !placed[v] {
                let row = self.s.dist.row(v);
                let near = anchors.iter().copied().min_by(|&p, &q| row[p].total_cmp(&row[q]).then(p.cmp(&q))).unwrap();
                time_of[v] = time_of[near];
            }
        }
        Ok(Parametrization { time_of, placed, loop_failures, conflicts, s_star_hat: orient.s_star_hat })
    }

    /// Quadratic variation of the labels along the branch from `x⁰` to `x`,
    /// which estimates the contour value at the time of `x`.
    pub fn recover_contour_value(&self, x: usize) -> Result<f64> {
        if x == self.s.i0 {
            return Ok(0.0);
        }
        let branch = self.ordered_branch(x)?;
        let values: Vec<f64> = std::iter::once(self.labels[self.s.i0])
            .chain(branch.iter().map(|&z| self.labels[z]))
            .chain(std::iter::once(self.labels[x]))
            .collect();
        if values.len() < MIN_BRANCH_POINTS {
            return Err(Error::Density(format!("the branch to {x} has {} points, fewer than {MIN_BRANCH_POINTS}", values.len())));
        }
        let sd = std_dev(&values);
        if sd == 0.0 {
            return Ok(0.0);
        }
        Ok(duration_of_values(&values, &dyadic_schedule(sd, 3, 6))?.duration)
    }
}

/// Linear interpolation of `knots` (averaged on equal times) on `0..=m`.
fn interpolate(mut knots: Vec<(f64, f64)>, m: usize) -> Vec<f64> {
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64, usize)> = Vec::new();
    for (t, v) in knots {
        match merged.last_mut() {
            Some(last) if last.0 == t => {
                last.1 += v;
                last.2 += 1;
            }
            _ => merged.push((t, v, 1)),
        }
    }
    let pts: Vec<(f64, f64)> = merged.into_iter().map(|(t, s, c)| (t, s / c as f64)).collect();
    let mut out = Vec::with_capacity(m + 1);
    let mut k = 0;
    for j in 0..=m {
        let t = j as f64 / m as f64;
        while k + 2 < pts.len() && pts[k + 1].0 < t {
            k += 1;
        }
        let (a, b) = (pts[k], pts[(k + 1).min(pts.len() - 1)]);
        let v = if b.0 > a.0 { a.1 + (b.1 - a.1) * ((t - a.0) / (b.0 - a.0)).clamp(0.0, 1.0) } else { a.1 };
        out.push(v);
    }
    out
}

/// The inverse map `φ`: a snake on the grid `j / m` from a marked sample.
pub fn phi(s: &MarkedSphereSample, params: &InverseParams) -> Result<RecoveredSnake> {
    let inv = Inverter::new(s, params)?;
    inv.epsilon()?;
    let m = inv.m();
    let par = inv.recover_parametrization()?;
    let labels = inv.labels();
    let ends = [(0.0, 0.0), (1.0, 0.0)];

    let placed: Vec<usize> = (0..m).filter(|&v| par.placed[v]).collect();
    let g_knots: Vec<(f64, f64)> = placed.iter().map(|&v| (par.time_of[v], labels[v])).chain(ends).collect();
    let g_hat = interpolate(g_knots, m);

    let contour: Vec<Option<f64>> = placed.par_iter().map(|&v| inv.recover_contour_value(v).ok()).collect();
    let contour_failures = contour.iter().filter(|c| c.is_none()).count();
    let f_knots: Vec<(f64, f64)> = placed
        .iter()
        .zip(&contour)
        .filter_map(|(&v, c)| c.map(|c| (par.time_of[v], c)))
        .chain(ends)
        .collect();
    let mut f_hat = interpolate(f_knots, m);
    for v in f_hat.iter_mut() {
        *v = v.max(0.0);
    }
    f_hat[0] = 0.0;
    f_hat[m] = 0.0;

    let at = |t: f64| g_hat[((t * m as f64).round() as usize).min(m)];
    let label_residual = placed.iter().map(|&v| (at(par.time_of[v]) - labels[v]).abs()).fold(0.0, f64::max);
    Ok(RecoveredSnake {
        f_hat,
        g_hat,
        s_star_hat: par.s_star_hat,
        quality: RecoveryQuality {
            label_residual,
            loop_failures: par.loop_failures,
            conflicts: par.conflicts,
            contour_failures,
            placed: placed.len(),
        },
        time_of: par.time_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_hits_knots_and_averages_ties() {
        let v = interpolate(vec![(0.0, 0.0), (0.5, 2.0), (1.0, 0.0), (0.5, 4.0)], 4);
        assert_eq!(v, vec![0.0, 1.5, 3.0, 1.5, 0.0]);
    }
}
