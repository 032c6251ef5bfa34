use std::collections::{HashMap, HashSet};

use brownsphere::cvs::enumerate::{count_row, pointed_quadrangulations};
use brownsphere::cvs::tree::all_trees;
use brownsphere::cvs::{cvs_forward, cvs_forward_embedded, cvs_inverse, sample_uniform, scaling_profile, LabeledPlaneTree, Quadrangulation};
use brownsphere::mating::ChainSolver;
use brownsphere::snake::{first_argmin, sample_snake};
use brownsphere::stats::{chi_square, ks_one_sample, ks_two_sample, median};

#[test]
fn forward_then_inverse_is_identity_up_to_four_edges() {
    let mut images = HashSet::new();
    for n in 1..=4 {
        for t in all_trees(n) {
            for sign in [1, -1] {
                let q = cvs_forward(&t, sign).unwrap();
                assert_eq!(q.n_vertices(), n + 2);
                assert_eq!(q.n_faces(), n);
                assert_eq!(q.n_edges(), 2 * n);
                assert_eq!(cvs_inverse(&q).unwrap(), (t.clone(), sign));
                assert!(images.insert(q), "two trees share a map");
            }
        }
    }
}

#[test]
fn inverse_then_forward_is_identity_up_to_three_faces() {
    for n in 1..=3 {
        for q in pointed_quadrangulations(n) {
            let (t, sign) = cvs_inverse(&q).unwrap();
            assert!(cvs_forward(&t, sign).unwrap().same_map(&q));
        }
    }
}

#[test]
fn counts_through_three() {
    for n in 1..=3 {
        let row = count_row(n);
        assert!(row.matches(), "{row:?}");
    }
}

#[test]
fn distance_identity_on_every_small_tree() {
    for n in 1..=4 {
        for t in all_trees(n) {
            let lo = *t.labels().iter().min().unwrap();
            for sign in [1, -1] {
                let (q, at) = cvs_forward_embedded(&t, sign).unwrap();
                let d = q.bfs_labels(q.pointed());
                for (v, &l) in t.labels().iter().enumerate() {
                    assert_eq!(d[at[v]] as i64, l - lo + 1);
                }
            }
        }
    }
}

#[test]
fn bfs_labels_are_bipartite() {
    let q = cvs_forward(&sample_uniform(300, 4).unwrap(), 1).unwrap();
    let d = q.bfs_labels(q.pointed());
    assert_eq!(d[q.pointed()], 0);
    for h in 0..q.n_half_edges() {
        assert_eq!((d[q.origin(h)] as i64 - d[q.target(h)] as i64).abs(), 1);
    }
}

#[test]
fn reflection_flips_the_sign() {
    for t in all_trees(4) {
        for sign in [1, -1] {
            let q = cvs_forward(&t, sign).unwrap();
            assert!(cvs_forward(&t.mirror(), -sign).unwrap().same_map(&q.mirror()));
        }
    }
}

#[test]
fn large_roundtrip() {
    for seed in 0..5 {
        let t = sample_uniform(2000, seed).unwrap();
        for sign in [1, -1] {
            let q = cvs_forward(&t, sign).unwrap();
            assert_eq!(cvs_inverse(&q).unwrap(), (t.clone(), sign));
        }
    }
}

#[test]
fn file_formats_roundtrip() {
    let t = sample_uniform(40, 9).unwrap();
    let q = cvs_forward(&t, -1).unwrap();
    assert_eq!(Quadrangulation::from_json(&q.to_json()).unwrap(), q);
    assert_eq!(LabeledPlaneTree::from_json(&t.to_json()).unwrap(), t);
    let bad = serde_json::json!({"half_edges": [{"opp": 1, "next": 0}, {"opp": 0, "next": 1}], "root": 0, "pointed": 0});
    assert!(Quadrangulation::from_json(&bad).is_err());
}

#[test]
fn sampler_is_uniform_on_two_edges() {
    let support = all_trees(2);
    let index: HashMap<LabeledPlaneTree, usize> = support.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let draws = 100_000u64;
    let mut counts = vec![0u64; support.len()];
    for seed in 0..draws {
        counts[index[&sample_uniform(2, seed).unwrap()]] += 1;
    }
    let expected = vec![draws as f64 / 18.0; 18];
    let (_, p) = chi_square(&counts, &expected);
    assert!(p > 0.01, "chi-square p = {p}");
}

/// `P(max e <= x)` for the standard Brownian excursion.
fn excursion_max_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut s = 1.0;
    for k in 1..200 {
        let k2x2 = (k * k) as f64 * x * x;
        let term = 2.0 * (1.0 - 4.0 * k2x2) * (-2.0 * k2x2).exp();
        s += term;
        if term.abs() < 1e-17 && k2x2 > 1.0 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

#[test]
fn sampled_tree_height_matches_the_excursion_maximum() {
    let n = 2000;
    let heights: Vec<f64> = (0..400)
        .map(|seed| {
            let t = sample_uniform(n, seed).unwrap();
            let mut depth = vec![0usize; t.n_vertices()];
            for v in 1..t.n_vertices() {
                depth[v] = depth[t.parent(v)] + 1;
            }
            // A contour of 2n unit steps, rescaled to an excursion on [0, 1].
            *depth.iter().max().unwrap() as f64 / (2.0 * n as f64).sqrt()
        })
        .collect();
    let r = ks_one_sample(&heights, excursion_max_cdf);
    assert!(r.p_value > 0.01, "{r:?}");
}

#[test]
fn rescaled_distances_match_the_continuum_after_scale_fit() {
    let seeds: Vec<u64> = (0..200).collect();
    let discrete = scaling_profile(10_000, &seeds).unwrap();
    assert!(discrete.iter().all(|x| x.is_finite() && *x > 0.0));
    let larger = scaling_profile(40_000, &seeds.iter().map(|s| s + 10_000).collect::<Vec<_>>()).unwrap();
    let stable = ks_two_sample(&discrete, &larger);
    assert!(stable.p_value > 0.01, "{stable:?}");

    let continuum: Vec<f64> = (0..200)
        .map(|seed| {
            let h = sample_snake(1 << 12, 50_000 + seed).unwrap();
            let row = ChainSolver::new(&h, 0.0).unwrap().row(first_argmin(&h.f), 50, 1e-6).unwrap();
            row.values[brownsphere::snake::marks(&h).s_star]
        })
        .collect();
    let scale = median(&discrete) / median(&continuum);
    let fitted: Vec<f64> = continuum.iter().map(|x| x * scale).collect();
    let r = ks_two_sample(&discrete, &fitted);
    assert!(r.p_value > 0.001, "{r:?} scale {scale}");
}
