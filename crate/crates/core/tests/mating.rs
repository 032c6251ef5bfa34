use brownsphere::mating::{build_sphere, sphere_matrix, ChainSolver, SphereOptions};
use brownsphere::rtree::TreeView;
use brownsphere::snake::{first_argmin, marks, sample_snake, ContourPair};
use proptest::prelude::*;

/// `d_h` by Floyd-Warshall on the grid: `d_g` edges between all times and
/// free edges between times glued in the tree of `f`.
fn floyd_oracle(h: &ContourPair) -> Vec<Vec<f64>> {
    let n = h.n;
    let tf = TreeView::new(&h.f, 0.0);
    let tg = TreeView::new(&h.g, 0.0);
    let mut d: Vec<Vec<f64>> = (0..=n)
        .map(|s| (0..=n).map(|t| if tf.dist(s, t) == 0.0 { 0.0 } else { tg.dist(s, t) }).collect())
        .collect();
    for k in 0..=n {
        for i in 0..=n {
            for j in 0..=n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

#[test]
fn relaxation_matches_shortest_paths_on_small_snakes() {
    for seed in 0..20 {
        let h = sample_snake(48, seed).unwrap();
        let oracle = floyd_oracle(&h);
        let solver = ChainSolver::new(&h, 0.0).unwrap();
        for s in 0..=h.n {
            let row = solver.row(s, 200, 0.0).unwrap();
            for t in 0..=h.n {
                assert!((row.values[t] - oracle[s][t]).abs() < 1e-12, "seed {seed} ({s}, {t}): {} vs {}", row.values[t], oracle[s][t]);
            }
        }
    }
}

#[test]
fn marked_sample_identities() {
    let h = sample_snake(2048, 8).unwrap();
    let (s, sm) = build_sphere(&h, 200, &SphereOptions::default()).unwrap();
    assert!(sm.converged);
    let gmin = h.g.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = h.label_range();
    assert!((s.dist.get(s.i0, s.i1) + gmin).abs() <= 1e-6 * range);
    assert_eq!(s.dist.points[s.i0], first_argmin(&h.f));
    assert_eq!(s.dist.points[s.i1], marks(&h).s_star);
    assert!((s.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(s.mass.iter().all(|&w| w > 0.0));
    // x¹ is the only point whose column is the labels shifted by d(x⁰, x¹).
    let base = s.dist.get(s.i0, s.i1);
    let fits = |c: usize| (0..s.dist.m()).all(|i| (s.dist.get(i, c) - (h.g[s.dist.points[i]] - gmin)).abs() <= 1e-6 * range);
    assert!(fits(s.i1));
    assert_eq!((0..s.dist.m()).filter(|&c| fits(c)).count(), 1);
    assert!(base > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sampled_matrices_are_pseudometrics(seed in any::<u64>()) {
        let h = sample_snake(1024, seed).unwrap();
        let sample: Vec<usize> = (0..=h.n).step_by(8).collect();
        let sm = sphere_matrix(&h, &sample, &SphereOptions::default()).unwrap();
        let d = &sm.dist;
        let tf = TreeView::new(&h.f, 0.0);
        let tg = TreeView::new(&h.g, 0.0);
        let gmin = h.g.iter().cloned().fold(f64::INFINITY, f64::min);
        let s_star = marks(&h).s_star;
        prop_assert!(d.max_triangle_violation() <= 1e-9);
        for i in 0..d.m() {
            prop_assert_eq!(d.get(i, i), 0.0);
            let (p, row) = (sample[i], d.row(i));
            for j in 0..d.m() {
                let q = sample[j];
                prop_assert_eq!(row[j], d.get(j, i));
                prop_assert!(row[j] <= tg.dist(p, q) + 1e-12);
                if tf.dist(p, q) == 0.0 {
                    prop_assert_eq!(row[j], 0.0);
                }
            }
            // Distance to the label minimum is the label gap.
            let to_min = ChainSolver::new(&h, 0.0).unwrap().rows_at(&[s_star], &[p], 50, 1e-9).unwrap()[0].values[0];
            prop_assert!((to_min - (h.g[p] - gmin)).abs() <= 1e-9);
        }
    }
}
