//! `φ ∘ ψ` on one snake, with every residual the pipeline can be checked by.

use serde::Serialize;

use crate::error::Result;
use crate::inverse::{phi, recover_labels, InverseParams, RecoveredSnake};
use crate::mating::{build_sphere, MarkedSphereSample, SphereOptions};
use crate::snake::{marks, reverse, ContourPair};

#[derive(Clone, Debug, Serialize)]
pub struct SnakeResidual {
    /// `sup |f̂ - f|` on the output grid.
    pub f: f64,
    /// `sup |ĝ - g|` on the output grid.
    pub g: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub schema: u32,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub epsilon: i8,
    pub s_star: f64,
    pub max_f: f64,
    pub label_range: f64,
    pub rounds: usize,
    pub converged: bool,
    /// `max |d(i, x¹) - (g(t_i) - min g)|`.
    pub root_distance_residual: f64,
    /// `max |ℓ(i) - g(t_i)|`.
    pub label_residual: f64,
    pub s_star_hat: Option<f64>,
    pub to_h: Option<SnakeResidual>,
    pub to_reversed: Option<SnakeResidual>,
    /// The inverse run with `-ε`.
    pub flipped_s_star_hat: Option<f64>,
    pub flipped_to_h: Option<SnakeResidual>,
    pub flipped_to_reversed: Option<SnakeResidual>,
    /// Why `φ` failed, if it did.
    pub inverse_error: Option<String>,
    pub flipped_error: Option<String>,
}

impl RoundtripReport {
    /// `min` over `{h, R(h)}` meets the tolerance.
    pub fn end_to_end_pass(&self) -> bool {
        self.to_h.iter().chain(&self.to_reversed).any(|r| r.pass)
    }
}

/// Residuals of `rec` against `h` read off at times `j · n / m`.
pub fn snake_residual(h: &ContourPair, rec: &RecoveredSnake) -> SnakeResidual {
    let m = rec.f_hat.len() - 1;
    let (mut f, mut g) = (0.0f64, 0.0f64);
    for j in 0..=m {
        let t = j * h.n / m;
        f = f.max((rec.f_hat[j] - h.f[t]).abs());
        g = g.max((rec.g_hat[j] - h.g[t]).abs());
    }
    SnakeResidual { f, g, pass: f <= 0.2 * h.max_f() && g <= 0.1 * h.label_range() }
}

fn flip(s: &MarkedSphereSample) -> MarkedSphereSample {
    MarkedSphereSample { epsilon: s.epsilon.map(|e| -e), ..s.clone() }
}

/// Builds the sphere of `h` on `m` points, checks what can be checked against
/// the contour, and runs the inverse with both orientation bits.
pub fn roundtrip(h: &ContourPair, m: usize, opts: &SphereOptions, params: &InverseParams) -> Result<RoundtripReport> {
    let (sample, sm) = build_sphere(h, m, opts)?;
    let mk = marks(h);
    let gmin = h.g[mk.s_star];
    let points = &sample.dist.points;
    let labels = recover_labels(&sample);
    let root_row = sample.dist.row(sample.i1);
    let mut root_distance_residual = 0.0f64;
    let mut label_residual = 0.0f64;
    for (i, &t) in points.iter().enumerate() {
        root_distance_residual = root_distance_residual.max((root_row[i] - (h.g[t] - gmin)).abs());
        label_residual = label_residual.max((labels[i] - h.g[t]).abs());
    }
    let rev = reverse(h);
    let mut report = RoundtripReport {
        schema: crate::battery::REPORT_SCHEMA,
        n: h.n,
        m: sample.dist.m(),
        seed: h.seed,
        epsilon: mk.epsilon,
        s_star: mk.s_star as f64 / h.n as f64,
        max_f: h.max_f(),
        label_range: h.label_range(),
        rounds: sm.rounds,
        converged: sm.converged,
        root_distance_residual,
        label_residual,
        s_star_hat: None,
        to_h: None,
        to_reversed: None,
        flipped_s_star_hat: None,
        flipped_to_h: None,
        flipped_to_reversed: None,
        inverse_error: None,
        flipped_error: None,
    };
    match phi(&sample, params) {
        Ok(rec) => {
            report.s_star_hat = Some(rec.s_star_hat);
            report.to_h = Some(snake_residual(h, &rec));
            report.to_reversed = Some(snake_residual(&rev, &rec));
        }
        Err(e) => report.inverse_error = Some(e.to_string()),
    }
    match phi(&flip(&sample), params) {
        Ok(rec) => {
            report.flipped_s_star_hat = Some(rec.s_star_hat);
            report.flipped_to_h = Some(snake_residual(h, &rec));
            report.flipped_to_reversed = Some(snake_residual(&rev, &rec));
        }
        Err(e) => report.flipped_error = Some(e.to_string()),
    }
    Ok(report)
}
