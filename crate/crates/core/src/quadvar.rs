//! Duration of a time-changed Brownian path from its lattice skeleton.
//!
//! If `B` is a Brownian motion and `κ` an increasing time change, the number of
//! steps the observed path `B ∘ κ` makes on `ε ℤ`, times `ε²`, tends to `κ(1)`.
//! Only the sequence of observed values matters, never the positions.

use serde::Serialize;

use crate::error::{param, Result};

/// Observed values of `B ∘ κ` at increasing parameter positions.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeChangedPath {
    pub values: Vec<f64>,
    pub positions: Vec<f64>,
}

impl TimeChangedPath {
    pub fn new(values: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if values.len() != positions.len() {
            return Err(param("values and positions must have the same length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(param("path values must be finite"));
        }
        if positions.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(param("positions must be strictly increasing"));
        }
        Ok(TimeChangedPath { values, positions })
    }

    /// Values at positions `0, 1, 2, ...`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let positions = (0..values.len()).map(|i| i as f64).collect();
        TimeChangedPath::new(values, positions)
    }
}

/// Steps of the skeleton walk of `values` on the lattice `values[0] + eps ℤ`.
///
/// The walk sits on the last lattice level it reached. A jump over several
/// levels within one observation step counts every level passed.
pub fn lattice_crossings(values: &[f64], eps: f64) -> Result<u64> {
    Ok(skeleton_walk(values, eps)?.0)
}

/// Step count and total overshoot (in units of `eps`) of the skeleton walk.
fn skeleton_walk(values: &[f64], eps: f64) -> Result<(u64, f64)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(param(format!("lattice spacing must be positive, got {eps}")));
    }
    let Some(&origin) = values.first() else {
        return Ok((0, 0.0));
    };
    let mut level = 0i64;
    let mut steps = 0u64;
    let mut overshoot = 0.0;
    for &v in &values[1..] {
        let x = (v - origin) / eps;
        if x >= (level + 1) as f64 {
            let next = x.floor() as i64;
            steps += (next - level) as u64;
            overshoot += x - next as f64;
            level = next;
        } else if x <= (level - 1) as f64 {
            let next = x.ceil() as i64;
            steps += (level - next) as u64;
            overshoot += next as f64 - x;
            level = next;
        }
    }
    Ok((steps, overshoot))
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsRow {
    pub eps: f64,
    pub crossings: u64,
    /// Mean distance by which an observation passes a newly reached level.
    pub mean_overshoot: f64,
    /// `crossings · eps²`.
    pub raw: f64,
    /// `crossings · eps · (eps + 2 · mean_overshoot)`.
    pub estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DurationEstimate {
    pub duration: f64,
    /// Rows actually used, in schedule order.
    pub table: Vec<EpsRow>,
    /// Smallest admissible spacing for this path.
    pub eps_floor: f64,
    /// False when the tail estimates spread by more than half their median.
    pub stable: bool,
}

/// `4 · median |Δ|`: below this spacing the counts mostly reflect the mesh.
pub fn eps_floor(values: &[f64]) -> f64 {
    let mut d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    4.0 * d[d.len() / 2]
}

/// Estimates the total quadratic variation `κ(1)` of the underlying path.
///
/// Each spacing in the decreasing `schedule` gives `crossings · eps²`, widened
/// for the overshoot of discrete observations past each level; spacings below
/// [`eps_floor`] are dropped (the floor itself is used if nothing is left), and
/// the result is the median of the last three estimates.
pub fn duration(path: &TimeChangedPath, schedule: &[f64]) -> Result<DurationEstimate> {
    duration_of_values(&path.values, schedule)
}

pub fn duration_of_values(values: &[f64], schedule: &[f64]) -> Result<DurationEstimate> {
    if schedule.is_empty() {
        return Err(param("spacing schedule must be nonempty"));
    }
    if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(param("spacings must be positive"));
    }
    if schedule.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(param("spacing schedule must be strictly decreasing"));
    }
    let floor = eps_floor(values);
    let mut used: Vec<f64> = schedule.iter().copied().filter(|&e| e >= floor).collect();
    if used.is_empty() {
        used.push(floor);
    }
    let mut table = Vec::with_capacity(used.len());
    for eps in used {
        let (crossings, total) = skeleton_walk(values, eps)?;
        // The walk only notices a level once an observation has passed it, so
        // every lattice step is effectively widened by the overshoot.
        let mean_overshoot = if crossings > 0 { eps * total / crossings as f64 } else { 0.0 };
        let raw = crossings as f64 * eps * eps;
        let estimate = crossings as f64 * eps * (eps + 2.0 * mean_overshoot);
        table.push(EpsRow { eps, crossings, mean_overshoot, raw, estimate });
    }
    let tail: Vec<f64> = table.iter().rev().take(3).map(|r| r.estimate).collect();
    let mut sorted = tail.clone();
    sorted.sort_by(f64::total_cmp);
    let duration = sorted[sorted.len() / 2];
    let spread = sorted[sorted.len() - 1] - sorted[0];
    let stable = duration == 0.0 && spread == 0.0 || spread <= 0.5 * duration;
    Ok(DurationEstimate { duration, table, eps_floor: floor, stable })
}

/// The schedule `scale · 2^-k` for `k` in `k_from..=k_to`.
pub fn dyadic_schedule(scale: f64, k_from: i32, k_to: i32) -> Vec<f64> {
    (k_from..=k_to).map(|k| scale * 2f64.powi(-k)).collect()
}

/// Population standard deviation of `values`.
pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}
