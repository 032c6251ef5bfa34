//! Monte Carlo checks of the marked point `s*`, the orientation bit and the
//! volume growth of balls.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Result};
use crate::mating::ChainSolver;
use crate::rng::split_seed;
use crate::snake::{first_argmin, marks, sample_snake};
use crate::stats::{ks_one_sample, ks_two_sample, linear_fit, mean};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct BatteryConfig {
    pub num_runs: usize,
    /// Grid size for the `s*`, `ε` and independence checks.
    pub n: usize,
    pub volume_n: usize,
    pub volume_runs: usize,
    /// Ball radii span `[volume_r_max / 10, volume_r_max]`.
    pub volume_r_max: f64,
    pub level: f64,
    pub seed: u64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig { num_runs: 10_000, n: 1 << 10, volume_n: 1 << 14, volume_runs: 50, volume_r_max: 1.0, level: 0.01, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    /// The accepted range or bound the statistic is checked against.
    pub criterion: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatReport {
    pub schema: u32,
    pub config: BatteryConfig,
    pub tests: Vec<TestResult>,
    pub duration_ms: u128,
}

impl StatReport {
    pub fn all_pass(&self) -> bool {
        self.tests.iter().all(|t| t.pass)
    }
}

struct Run {
    s_star: f64,
    epsilon: i8,
    root_distance: f64,
}

fn run(n: usize, seed: u64) -> Result<Run> {
    let h = sample_snake(n, seed)?;
    let mk = marks(&h);
    let row = ChainSolver::new(&h, 0.0)?.row(first_argmin(&h.f), 50, 1e-6)?;
    Ok(Run { s_star: mk.s_star as f64 / n as f64, epsilon: mk.epsilon, root_distance: row.values[mk.s_star] })
}

/// Log-log slope of the mean ball mass `μ(B_r(x⁰))` over a decade of radii,
/// with balls measured on the full grid.
pub fn volume_slope(n: usize, seeds: &[u64], r_max: f64) -> Result<f64> {
    let radii: Vec<f64> = (0..=10).map(|k| r_max * 10f64.powf(k as f64 / 10.0 - 1.0)).collect();
    let masses: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let h = sample_snake(n, seed)?;
            let row = ChainSolver::new(&h, 0.0)?.row(first_argmin(&h.f), 50, 1e-6)?;
            // Time n is time 0 again.
            let d = &row.values[..n];
            Ok(radii.iter().map(|&r| d.iter().filter(|&&v| v <= r).count() as f64 / n as f64).collect())
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = (0..radii.len()).map(|k| mean(&masses.iter().map(|m| m[k]).collect::<Vec<_>>()).ln()).collect();
    Ok(linear_fit(&x, &y).0)
}

pub fn stats_battery(cfg: &BatteryConfig) -> Result<StatReport> {
    if cfg.num_runs < 100 {
        return Err(param(format!("the battery needs at least 100 runs, got {}", cfg.num_runs)));
    }
    if cfg.volume_runs < 1 || !(cfg.volume_r_max > 0.0) {
        return Err(param("volume check needs at least one run and a positive radius"));
    }
    let start = Instant::now();
    let runs: Vec<Run> = (0..cfg.num_runs as u64).into_par_iter().map(|k| run(cfg.n, split_seed(cfg.seed, k))).collect::<Result<_>>()?;

    let mut tests = Vec::new();
    let s_star: Vec<f64> = runs.iter().map(|r| r.s_star).collect();
    let ks = ks_one_sample(&s_star, |x| x.clamp(0.0, 1.0));
    tests.push(TestResult {
        name: "s_star_uniform".into(),
        statistic: ks.statistic,
        p_value: Some(ks.p_value),
        criterion: format!("p > {}", cfg.level),
        pass: ks.p_value > cfg.level,
    });

    let eps_mean = mean(&runs.iter().map(|r| r.epsilon as f64).collect::<Vec<_>>());
    let bound = 3.0 / (cfg.num_runs as f64).sqrt();
    tests.push(TestResult {
        name: "epsilon_rademacher".into(),
        statistic: eps_mean,
        p_value: None,
        criterion: format!("|mean| <= {bound:.4}"),
        pass: eps_mean.abs() <= bound,
    });

    let plus: Vec<f64> = runs.iter().filter(|r| r.epsilon == 1).map(|r| r.root_distance).collect();
    let minus: Vec<f64> = runs.iter().filter(|r| r.epsilon == -1).map(|r| r.root_distance).collect();
    let indep = ks_two_sample(&plus, &minus);
    tests.push(TestResult {
        name: "epsilon_independent_of_root_distance".into(),
        statistic: indep.statistic,
        p_value: Some(indep.p_value),
        criterion: format!("p > {}", cfg.level),
        pass: indep.p_value > cfg.level,
    });

    let seeds: Vec<u64> = (0..cfg.volume_runs as u64).map(|k| split_seed(cfg.seed ^ 0x5EED, k)).collect();
    let slope = volume_slope(cfg.volume_n, &seeds, cfg.volume_r_max)?;
    tests.push(TestResult {
        name: "ball_volume_slope".into(),
        statistic: slope,
        p_value: None,
        criterion: "3.5 <= slope <= 4.5".into(),
        pass: (3.5..=4.5).contains(&slope),
    });

    Ok(StatReport { schema: REPORT_SCHEMA, config: cfg.clone(), tests, duration_ms: start.elapsed().as_millis() })
}
