use brownsphere::quadvar::{duration, duration_of_values, dyadic_schedule, lattice_crossings, std_dev, TimeChangedPath};
use brownsphere::rng::{rng_for, stream};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn brownian(duration: f64, steps: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, stream::BROWNIAN_PATH);
    let sd = (duration / steps as f64).sqrt();
    let mut x = 0.0;
    std::iter::once(0.0)
        .chain((0..steps).map(|_| {
            x += sd * rng.sample::<f64, _>(StandardNormal);
            x
        }))
        .collect()
}

fn estimate(values: &[f64]) -> f64 {
    duration_of_values(values, &dyadic_schedule(std_dev(values), 3, 6)).unwrap().duration
}

#[test]
fn crossing_examples() {
    assert_eq!(lattice_crossings(&[0.3; 10], 0.1).unwrap(), 0);
    assert_eq!(lattice_crossings(&[0.0, 1.0], 0.25).unwrap(), 4);
    let ramp: Vec<f64> = (0..=1000).map(|k| 2.3 * k as f64 / 1000.0).collect();
    assert_eq!(lattice_crossings(&ramp, 0.1).unwrap(), 22);
    assert!(lattice_crossings(&ramp, 0.0).is_err());
    assert!(lattice_crossings(&ramp, -1.0).is_err());
}

#[test]
fn linear_path_vanishes_with_the_spacing() {
    let ramp: Vec<f64> = (0..=10_000).map(|k| k as f64 / 10_000.0).collect();
    let est = duration_of_values(&ramp, &dyadic_schedule(1.0, 2, 8)).unwrap();
    for row in &est.table {
        assert!((row.raw - row.eps).abs() <= row.eps * row.eps, "{row:?}");
    }
}

#[test]
fn brownian_duration_within_ten_percent() {
    for t in [0.3, 0.7, 1.0] {
        let hits = (0..200u64).filter(|&seed| (estimate(&brownian(t, 1 << 16, seed)) - t).abs() <= 0.1 * t).count();
        assert!(hits >= 190, "T = {t}: {hits}/200 within 10%");
    }
}

#[test]
fn durations_add_over_concatenation() {
    let (t1, t2) = (0.3, 0.5);
    let runs = 100u64;
    let sums: Vec<f64> = (0..runs)
        .map(|seed| {
            let a = brownian(t1, 1 << 14, 2 * seed);
            let b = brownian(t2, 1 << 14, 2 * seed + 1);
            let end = *a.last().unwrap();
            let joined: Vec<f64> = a.iter().copied().chain(b.iter().skip(1).map(|v| v + end)).collect();
            estimate(&joined)
        })
        .collect();
    let mean = sums.iter().sum::<f64>() / runs as f64;
    let sd = (sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
    assert!((mean - (t1 + t2)).abs() <= 2.0 * sd / (runs as f64).sqrt() + 0.01 * (t1 + t2), "mean {mean} sd {sd}");
}

#[test]
fn schedule_is_validated() {
    let v = brownian(1.0, 100, 0);
    assert!(duration_of_values(&v, &[]).is_err());
    assert!(duration_of_values(&v, &[0.1, 0.2]).is_err());
    assert!(duration_of_values(&v, &[0.1, 0.0]).is_err());
    assert!(TimeChangedPath::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positions_do_not_matter(seed in any::<u64>(), gaps in prop::collection::vec(1e-6f64..10.0, 2001)) {
        let values = brownian(0.7, 2000, seed);
        let mut at = 0.0;
        let positions: Vec<f64> = gaps.iter().map(|g| { at += g; at }).collect();
        let schedule = dyadic_schedule(std_dev(&values), 3, 6);
        let warped = duration(&TimeChangedPath::new(values.clone(), positions).unwrap(), &schedule).unwrap();
        let plain = duration(&TimeChangedPath::from_values(values).unwrap(), &schedule).unwrap();
        prop_assert_eq!(warped.duration, plain.duration);
    }

    #[test]
    fn scaling_is_quadratic(seed in any::<u64>(), k in -4i32..=4) {
        // Powers of two keep every product exact, so the identity is exact too.
        let c = 2f64.powi(k);
        let values = brownian(0.7, 2000, seed);
        let schedule = dyadic_schedule(std_dev(&values), 3, 6);
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let scaled_schedule: Vec<f64> = schedule.iter().map(|e| c * e).collect();
        let a = duration_of_values(&values, &schedule).unwrap().duration;
        let b = duration_of_values(&scaled, &scaled_schedule).unwrap().duration;
        prop_assert_eq!(b, c * c * a);
    }
}
