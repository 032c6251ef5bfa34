use brownsphere::rtree::{tree_dist, TreeView};
use brownsphere::snake::sample_excursion;
use proptest::prelude::*;

const TWO_PEAKS: [f64; 7] = [0.0, 1.0, 2.0, 1.0, 2.0, 1.0, 0.0];

#[test]
fn two_peak_examples() {
    assert_eq!(tree_dist(&TWO_PEAKS, 1, 5).unwrap(), 0.0);
    assert_eq!(tree_dist(&TWO_PEAKS, 2, 4).unwrap(), 2.0);
    assert_eq!(tree_dist(&TWO_PEAKS, 3, 3).unwrap(), 0.0);
    assert!(tree_dist(&TWO_PEAKS, 0, 7).is_err());
    let t = TreeView::new(&TWO_PEAKS, 0.0);
    assert!(t.is_skeleton(1));
    assert!(!t.is_skeleton(2));
    let tent = [0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0];
    assert!(!TreeView::new(&tent, 0.0).is_skeleton(3));
}

#[test]
fn two_preimage_masses_are_interval_lengths() {
    let n = 2048;
    let f = sample_excursion(n, 4).unwrap();
    let t = TreeView::new(&f, 0.0);
    let mut checked = 0;
    for s in (1..n).step_by(37) {
        let pre: Vec<usize> = (0..n).filter(|&u| t.dist(s, u) == 0.0).collect();
        if pre.len() != 2 {
            continue;
        }
        let inside = (pre[1] - pre[0]) as f64 / n as f64;
        let mut masses = t.subtree_masses(s);
        masses.sort_by(f64::total_cmp);
        assert_eq!(masses.len(), 2);
        let mut expect = [inside, 1.0 - inside];
        expect.sort_by(f64::total_cmp);
        for (m, e) in masses.iter().zip(expect) {
            assert!((m - e).abs() <= 1.0 / n as f64, "{masses:?} vs {expect:?}");
        }
        checked += 1;
    }
    assert!(checked > 5);
}

#[test]
fn macroscopic_skeleton_thins_out() {
    let frac = |n: usize| {
        let mut hits = 0;
        let mut total = 0;
        for seed in 0..10 {
            let f = sample_excursion(n, seed).unwrap();
            let t = TreeView::new(&f, 0.0);
            for s in (0..n).step_by(n / 64) {
                let mut m = t.subtree_masses(s);
                m.sort_by(|a, b| b.total_cmp(a));
                hits += usize::from(m.len() > 1 && m[1] >= 0.05);
                total += 1;
            }
        }
        hits as f64 / total as f64
    };
    let (coarse, fine) = (frac(1 << 8), frac(1 << 12));
    assert!(fine < coarse / 2.0, "{coarse} -> {fine}");
}

fn excursion() -> impl Strategy<Value = Vec<f64>> {
    (any::<u64>(), 2usize..256).prop_map(|(seed, half)| sample_excursion(2 * half, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pseudometric_and_four_point(f in excursion(), picks in prop::collection::vec(any::<prop::sample::Index>(), 12)) {
        let t = TreeView::new(&f, 0.0);
        let n = t.n();
        let p: Vec<usize> = picks.iter().map(|i| i.index(n + 1)).collect();
        for &a in &p {
            prop_assert_eq!(t.dist(a, a), 0.0);
            for &b in &p {
                prop_assert_eq!(t.dist(a, b), t.dist(b, a));
                prop_assert!(t.dist(a, b) >= 0.0);
                for &c in &p {
                    prop_assert!(t.dist(a, c) <= t.dist(a, b) + t.dist(b, c) + 1e-12);
                }
            }
        }
        for w in p.windows(4) {
            let (s, u, v, x) = (w[0], w[1], w[2], w[3]);
            let lhs = t.dist(s, u) + t.dist(v, x);
            let rhs = (t.dist(s, v) + t.dist(u, x)).max(t.dist(s, x) + t.dist(u, v));
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn root_distance_is_height(f in excursion()) {
        let t = TreeView::new(&f, 0.0);
        for s in 0..=t.n() {
            prop_assert_eq!(t.dist(0, s), f[s]);
        }
    }

    #[test]
    fn geodesic_segments_are_additive(f in excursion(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let t = TreeView::new(&f, 0.0);
        let (s, u) = (a.index(t.n() + 1), b.index(t.n() + 1));
        let path = t.geodesic_segment(s, u);
        // The ends may be other corners of the same vertices.
        prop_assert_eq!(t.dist(path[0], s), 0.0);
        prop_assert_eq!(t.dist(*path.last().unwrap(), u), 0.0);
        let walked: f64 = path.windows(2).map(|w| t.dist(w[0], w[1])).sum();
        let step = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        prop_assert!((walked - t.dist(s, u)).abs() <= 10.0 * step);
    }

    #[test]
    fn subtree_masses_partition_the_rest(f in excursion(), a in any::<prop::sample::Index>()) {
        let t = TreeView::new(&f, 0.0);
        let n = t.n();
        let s = a.index(n);
        let class = (0..n).filter(|&u| t.dist(s, u) == 0.0).count();
        let total: f64 = t.subtree_masses(s).iter().sum();
        prop_assert!((total + class as f64 / n as f64 - 1.0).abs() < 1e-12);
    }
}
