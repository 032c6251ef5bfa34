//! Discretized Brownian snakes.
//!
//! A snake is the pair `(f, g)` sampled on the uniform grid `i / n`. The
//! lifetime `f` is the contour of a uniform plane tree with `n / 2` edges,
//! scaled so every step has size `1 / sqrt(n)`; the labels `g` are Gaussian
//! along the edges of that tree, so corners of the same vertex carry the same
//! label exactly.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::{rng_for, stream};

/// A discretized snake `h = (f, g)` on `n + 1` grid times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourPair {
    pub n: usize,
    pub seed: u64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// First argmin of the labels and the orientation bit it induces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SnakeMarks {
    pub s_star: usize,
    pub epsilon: i8,
}

impl ContourPair {
    pub fn new(f: Vec<f64>, g: Vec<f64>, seed: u64) -> Result<Self> {
        if f.len() < 3 || f.len() != g.len() {
            return Err(param(format!(
                "contour arrays must have equal length >= 3 (got {} and {})",
                f.len(),
                g.len()
            )));
        }
        let h = ContourPair { n: f.len() - 1, seed, f, g };
        h.validate()?;
        Ok(h)
    }

    /// Checks the endpoint, nonnegativity and finiteness invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.f.len() != n + 1 || self.g.len() != n + 1 {
            return Err(Error::Structure(format!(
                "expected {} values, got f: {}, g: {}",
                n + 1,
                self.f.len(),
                self.g.len()
            )));
        }
        if self.f[0] != 0.0 || self.f[n] != 0.0 || self.g[0] != 0.0 || self.g[n] != 0.0 {
            return Err(Error::Structure("f and g must vanish at both ends".into()));
        }
        if self.f.iter().chain(&self.g).any(|v| !v.is_finite()) {
            return Err(Error::Structure("non-finite contour value".into()));
        }
        if self.f.iter().any(|&v| v < 0.0) {
            return Err(Error::Structure("f must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn marks(&self) -> SnakeMarks {
        marks(self)
    }

    pub fn reversed(&self) -> ContourPair {
        reverse(self)
    }

    pub fn label_range(&self) -> f64 {
        let (lo, hi) = min_max(&self.g);
        hi - lo
    }

    pub fn max_f(&self) -> f64 {
        min_max(&self.f).1
    }

    pub fn load(path: &Path) -> Result<Self> {
        let h: ContourPair = serde_json::from_str(&fs::read_to_string(path)?)?;
        h.validate()?;
        Ok(h)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Samples the lifetime part of a snake: a uniform excursion of `n` lattice
/// steps of size `1 / sqrt(n)`.
///
/// The path is a planted Dyck path: one step up from the root, a uniform Dyck
/// path of length `n - 2` obtained by cyclically shifting a shuffled lattice
/// bridge at its first minimum, and one step down. The root is therefore a leaf
/// and `f > 0` strictly inside `(0, 1)`.
pub fn sample_excursion(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(param(format!("resolution n must be >= 2, got {n}")));
    }
    if n % 2 != 0 {
        return Err(param(format!("resolution n must be even, got {n}")));
    }
    let mut rng = rng_for(seed, stream::EXCURSION);
    let k = n / 2 - 1;
    // k up-steps and k + 1 down-steps; the cycle lemma picks the unique
    // rotation whose partial sums stay nonnegative before the final step.
    let mut steps: Vec<i8> = std::iter::repeat(1).take(k).chain(std::iter::repeat(-1).take(k + 1)).collect();
    steps.shuffle(&mut rng);
    let len = steps.len();
    let mut sum = 0i64;
    let mut best = i64::MAX;
    let mut start = 0;
    for (j, &s) in steps.iter().enumerate() {
        sum += s as i64;
        if sum < best {
            best = sum;
            start = j + 1;
        }
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut f = Vec::with_capacity(n + 1);
    f.push(0.0);
    let mut height = 1i64;
    f.push(scale * height as f64);
    for t in 0..len - 1 {
        height += steps[(start + t) % len] as i64;
        debug_assert!(height >= 1);
        f.push(scale * height as f64);
    }
    debug_assert_eq!(height, 1);
    f.push(0.0);
    debug_assert_eq!(f.len(), n + 1);
    Ok(f)
}

/// Samples labels on the tree coded by `f`.
///
/// The contour is followed once. A step up creates fresh tree length and the
/// label moves by an independent centered Gaussian with that variance; a step
/// down returns to a point of the current ancestral line, whose label is reused
/// when it was already visited and otherwise drawn from the Brownian bridge
/// between its two visited neighbours on that line.
pub fn sample_labels(f: &[f64], seed: u64) -> Result<Vec<f64>> {
    if f.len() < 2 || f[0] != 0.0 || *f.last().unwrap() != 0.0 || f.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(param("labels need a nonnegative contour vanishing at both ends"));
    }
    let mut rng = rng_for(seed, stream::LABELS);
    // The ancestral line of the current point, as (height, label), root first.
    let mut line: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut g = Vec::with_capacity(f.len());
    g.push(0.0);
    for w in f.windows(2) {
        let (from, to) = (w[0], w[1]);
        if to > from {
            let top = line.last().unwrap().1;
            let z: f64 = rng.sample(StandardNormal);
            let label = top + z * (to - from).sqrt();
            line.push((to, label));
        } else if to < from {
            let mut above = *line.last().unwrap();
            while line.last().unwrap().0 > to {
                above = line.pop().unwrap();
            }
            let (h_lo, l_lo) = *line.last().unwrap();
            if h_lo < to {
                let (h_hi, l_hi) = above;
                let span = h_hi - h_lo;
                let mean = l_lo + (l_hi - l_lo) * (to - h_lo) / span;
                let var = (to - h_lo) * (h_hi - to) / span;
                let z: f64 = rng.sample(StandardNormal);
                line.push((to, mean + z * var.sqrt()));
            }
        }
        g.push(line.last().unwrap().1);
    }
    // The walk ends on the root, whose label is pinned to zero.
    let last = g.len() - 1;
    g[last] = 0.0;
    Ok(g)
}

/// Samples a full snake; the two parts use independent sub-streams of `seed`.
pub fn sample_snake(n: usize, seed: u64) -> Result<ContourPair> {
    let f = sample_excursion(n, seed)?;
    let g = sample_labels(&f, seed)?;
    Ok(ContourPair { n, seed, f, g })
}

pub fn marks(h: &ContourPair) -> SnakeMarks {
    let s_star = first_argmin(&h.g);
    let epsilon = if 2 * s_star <= h.n { 1 } else { -1 };
    SnakeMarks { s_star, epsilon }
}

pub fn first_argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

pub fn last_argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x <= v[best] {
            best = i;
        }
    }
    best
}

/// Time reversal `R(h) = (f(1 - .), g(1 - .))`.
pub fn reverse(h: &ContourPair) -> ContourPair {
    let mut f = h.f.clone();
    let mut g = h.g.clone();
    f.reverse();
    g.reverse();
    ContourPair { n: h.n, seed: h.seed, f, g }
}
