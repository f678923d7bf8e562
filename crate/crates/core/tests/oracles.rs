//! Fast computations against slow, independent reference implementations.

mod common;

use std::collections::{BTreeSet, HashSet};

use cesna::io::{assemble_graph, format_communities, parse_attributes, parse_cover, parse_edges};
use cesna::selection::{fit_masked, training_view};
use cesna::*;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn graph_loglik_matches_all_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(2..=30);
        let c = rng.gen_range(1..=5);
        let g = random_graph(&mut rng, n, 0);
        let f = random_f(&mut rng, n, c);
        let fast = log_lik_graph(&g, &f, None, EPS);
        assert!((fast - naive_lg(&g, &f, None)).abs() < 1e-9);
    }
}

#[test]
fn masked_graph_loglik_matches_all_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..50 {
        let n = rng.gen_range(4..=30);
        let g = random_graph(&mut rng, n, 3);
        let f = random_f(&mut rng, n, 3);
        let mask = make_holdout(&g, 0.2, i).unwrap();
        let fast = log_lik_graph(&g, &f, Some(&mask), EPS);
        assert!((fast - naive_lg(&g, &f, Some(&mask))).abs() < 1e-9);
    }
}

#[test]
fn attr_loglik_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let g = random_graph(&mut rng, 10, 5);
        let f = random_f(&mut rng, 10, 3);
        let w = random_w(&mut rng, 5, 3);
        assert!((log_lik_attr(&g, &f, &w, None) - naive_lx(&g, &f, &w)).abs() < 1e-12);
    }
}

#[test]
fn objective_parts_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let g = random_graph(&mut rng, 12, 4);
    let f = random_f(&mut rng, 12, 2);
    let w = random_w(&mut rng, 4, 2);
    let cfg = FitConfig {
        alpha: 0.3,
        lambda: 0.7,
        ..FitConfig::default()
    };
    let o = objective(&g, &f, &w, &cfg, None);
    let l1: f64 = (0..4)
        .map(|k| w.row(k)[..2].iter().map(|x| x.abs()).sum::<f64>())
        .sum();
    assert!((o.l_graph - naive_lg(&g, &f, None)).abs() < 1e-9);
    assert!((o.l_attr - naive_lx(&g, &f, &w)).abs() < 1e-12);
    assert!((o.l1_penalty - 0.7 * l1).abs() < 1e-12);
    assert!((o.scaled_total - (0.7 * o.l_graph + 0.3 * o.l_attr - o.l1_penalty)).abs() < 1e-12);
}

#[test]
fn node_gradient_matches_naive_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cfg = FitConfig {
        alpha: 0.0,
        ..FitConfig::default()
    };
    for _ in 0..100 {
        let n = rng.gen_range(2..=30);
        let c = rng.gen_range(1..=5);
        let g = random_graph(&mut rng, n, 0);
        let f = random_f(&mut rng, n, c);
        let w = AttributeWeights::zeros(0, c);
        let u = rng.gen_range(0..n);
        let fast = grad_node(u, &g, &f, &w, None, &cfg);
        for (a, b) in fast.iter().zip(naive_graph_grad(u, &g, &f)) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn node_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = 1e-6;
    for _ in 0..100 {
        let n = rng.gen_range(2..=20);
        let c = rng.gen_range(1..=4);
        let k = rng.gen_range(0..=6);
        let g = random_graph(&mut rng, n, k);
        let f = random_f(&mut rng, n, c);
        let w = random_w(&mut rng, k, c);
        let alpha = rng.gen_range(0.0..1.0);
        let cfg = FitConfig {
            alpha,
            ..FitConfig::default()
        };
        let u = rng.gen_range(0..n);
        let analytic = grad_node(u, &g, &f, &w, None, &cfg);
        let fd: Vec<f64> = (0..c)
            .map(|i| {
                let (mut plus, mut minus) = (f.row(u).to_vec(), f.row(u).to_vec());
                plus[i] += h;
                minus[i] -= h;
                (node_local(u, &plus, &g, &f, &w, alpha) - node_local(u, &minus, &g, &f, &w, alpha))
                    / (2.0 * h)
            })
            .collect();
        assert_fd(&analytic, &fd, "grad_node");
    }
}

#[test]
fn attr_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let h = 1e-6;
    for _ in 0..100 {
        let n = rng.gen_range(2..=20);
        let c = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=6);
        let g = random_graph(&mut rng, n, k);
        let f = random_f(&mut rng, n, c);
        let w = random_w(&mut rng, k, c);
        let a = rng.gen_range(0..k);
        let analytic = grad_attr_weights(a, &g, &f, &w, None);
        let fd: Vec<f64> = (0..=c)
            .map(|i| {
                let (mut plus, mut minus) = (w.row(a).to_vec(), w.row(a).to_vec());
                plus[i] += h;
                minus[i] -= h;
                (attr_local(a, &plus, &g, &f) - attr_local(a, &minus, &g, &f)) / (2.0 * h)
            })
            .collect();
        assert_fd(&analytic, &fd, "grad_attr_weights");
    }
}

#[test]
fn match_score_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..200 {
        let n = rng.gen_range(2..=15);
        let truth = random_cover(&mut rng, n);
        let detected = random_cover(&mut rng, n);
        let kind = if i % 2 == 0 {
            SimilarityKind::F1
        } else {
            SimilarityKind::Jaccard
        };
        let fast = match_score(&truth, &detected, kind).unwrap();
        assert!((fast - brute_match(&truth, &detected, kind)).abs() < 1e-12);
    }
}

#[test]
fn match_score_hand_example() {
    let truth = CommunityCover::new(vec![vec![1, 2, 3]], 4).unwrap();
    let detected = CommunityCover::new(vec![vec![1, 2]], 4).unwrap();
    assert_eq!(
        match_score(&truth, &detected, SimilarityKind::F1).unwrap(),
        0.8
    );
}

fn brute_conductance(g: &AttributedGraph, s: &BTreeSet<usize>) -> f64 {
    let vol: usize = s.iter().map(|&u| g.degree(u)).sum();
    let cut = g
        .edges()
        .filter(|&(u, v)| s.contains(&u) != s.contains(&v))
        .count();
    let denom = vol.min(2 * g.num_edges() - vol);
    if denom == 0 {
        1.0
    } else {
        cut as f64 / denom as f64
    }
}

/// Enumerates every closed neighborhood and compares it with each neighbor's,
/// under the same tie conventions (equal neighborhoods are not competitors and
/// are reported once).
fn brute_seeds(g: &AttributedGraph) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    let hood =
        |u: usize| -> BTreeSet<usize> { g.neighbors(u).iter().copied().chain([u]).collect() };
    let mut out: Vec<(f64, usize, Vec<usize>)> = Vec::new();
    for u in 0..n {
        let hu = hood(u);
        if g.degree(u) == 0 || hu.len() == n {
            continue;
        }
        let phi = brute_conductance(g, &hu);
        let minimal = g
            .neighbors(u)
            .iter()
            .all(|&v| hood(v) == hu || phi < brute_conductance(g, &hood(v)));
        let first = g.neighbors(u).iter().all(|&v| v > u || hood(v) != hu);
        if minimal && first {
            out.push((phi, u, hu.into_iter().collect()));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.into_iter().map(|(_, _, s)| s).collect()
}

#[test]
fn locally_minimal_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..300 {
        let n = rng.gen_range(2..=12);
        let g = random_graph(&mut rng, n, 0);
        let fast: Vec<Vec<usize>> = locally_minimal_neighborhoods(&g)
            .into_iter()
            .map(|s| s.members)
            .collect();
        assert_eq!(fast, brute_seeds(&g));
    }
}

#[test]
fn conductance_stays_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for _ in 0..200 {
        let n = rng.gen_range(2..=15);
        let g = random_graph(&mut rng, n, 0);
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if s.is_empty() || s.len() == n {
            continue;
        }
        let phi = conductance(&g, &s).unwrap();
        assert!((0.0..=1.0).contains(&phi));
        assert_eq!(phi, brute_conductance(&g, &s.iter().copied().collect()));
    }
}

#[test]
fn thresholded_pairs_clear_one_over_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for i in 0..10 {
        let n = rng.gen_range(10..=40);
        let g = random_graph(&mut rng, n, 3);
        let r = fit::<f64>(
            &g,
            3,
            &FitConfig {
                rng_seed: i,
                ..FitConfig::default()
            },
        )
        .unwrap();
        let delta = membership_threshold::<f64>(n).unwrap();
        for c in 0..3 {
            let members: Vec<usize> = (0..n).filter(|&u| r.f.get(u, c) >= delta).collect();
            for &u in &members {
                for &v in &members {
                    let p = -(-(r.f.get(u, c) * r.f.get(v, c))).exp_m1();
                    assert!(p >= 1.0 / n as f64);
                }
            }
        }
    }
}

#[test]
fn column_sums_track_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let g = random_graph(&mut rng, 25, 4);
    let cfg = FitConfig::default();
    let mut solver = Solver::<f64>::new(&g, 3, &cfg, None).unwrap();
    for _ in 0..5 {
        solver.outer_iteration();
        let f = solver.memberships();
        for c in 0..3 {
            let naive: f64 = (0..25).map(|u| f.get(u, c)).sum();
            let cached = f.column_sums()[c];
            assert!((cached - naive).abs() <= 1e-6 * naive.abs().max(1.0));
        }
        assert!(f.values().iter().all(|&x| (0.0..=cfg.max_f).contains(&x)));
    }
}

#[test]
fn f32_fit_tracks_f64() {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let g = random_graph(&mut rng, 20, 3);
    let cfg = FitConfig {
        max_outer_iters: 30,
        ..FitConfig::default()
    };
    let a = fit::<f64>(&g, 2, &cfg).unwrap();
    let b = fit::<f32>(&g, 2, &cfg).unwrap();
    let (x, y) = (
        a.final_objective().scaled_total,
        b.final_objective().scaled_total as f64,
    );
    assert!((x - y).abs() <= 1e-2 * x.abs(), "{x} vs {y}");
    let trace: Vec<f32> = b.objective_trace.iter().map(|o| o.scaled_total).collect();
    assert!(trace.windows(2).all(|p| p[1] >= p[0] - 1e-3 * p[0].abs()));
}

/// Flips every held-out observation: held-out edges become non-edges and vice
/// versa, likewise for attributes.
fn flip_masked(g: &AttributedGraph, mask: &HoldoutMask) -> (AttributedGraph, HoldoutMask) {
    let mut edges: HashSet<(usize, usize)> = g.edges().collect();
    for &(u, v, _) in mask.node_pairs() {
        if !edges.remove(&(u, v)) {
            edges.insert((u, v));
        }
    }
    let mut attrs: HashSet<(usize, usize)> = g.attr_pairs().collect();
    for &(u, k, _) in mask.attr_pairs() {
        if !attrs.remove(&(u, k)) {
            attrs.insert((u, k));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    let mut attrs: Vec<_> = attrs.into_iter().collect();
    attrs.sort_unstable();
    let flipped = build_graph(&edges, &attrs, g.num_nodes(), g.num_attrs())
        .unwrap()
        .0;
    let node_pairs = mask
        .node_pairs()
        .iter()
        .map(|&(u, v, x)| (u, v, !x))
        .collect();
    let attr_pairs = mask
        .attr_pairs()
        .iter()
        .map(|&(u, k, x)| (u, k, !x))
        .collect();
    let m = HoldoutMask::new(
        g.num_nodes(),
        g.num_attrs(),
        node_pairs,
        attr_pairs,
        mask.fraction(),
    )
    .unwrap();
    (flipped, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn masked_values_do_not_reach_training(seed in 0u64..10_000, n in 8usize..30, k in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, k);
        let mask = make_holdout(&g, 0.15, seed).unwrap();
        let (g2, mask2) = flip_masked(&g, &mask);
        prop_assert_eq!(training_view(&g, &mask), training_view(&g2, &mask2));
        let cfg = FitConfig { max_outer_iters: 15, rng_seed: seed, ..FitConfig::default() };
        let a = fit_masked::<f64>(&g, 3, &cfg, &mask).unwrap();
        let b = fit_masked::<f64>(&g2, 3, &cfg, &mask2).unwrap();
        let bits = |r: &FitResult<f64>| -> Vec<u64> {
            r.f.values().iter().chain((0..r.w.num_attrs()).flat_map(|k| r.w.row(k).iter())).map(|x| x.to_bits()).collect()
        };
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn alpha_zero_ignores_attribute_order(seed in 0u64..10_000, n in 6usize..25, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, k);
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let permuted: Vec<_> = g.attr_pairs().map(|(u, a)| (u, perm[a])).collect();
        let g2 = g.with_attrs(&permuted, k).unwrap();
        let cfg = FitConfig { alpha: 0.0, max_outer_iters: 20, rng_seed: seed, ..FitConfig::default() };
        let a = fit::<f64>(&g, 2, &cfg).unwrap();
        let b = fit::<f64>(&g2, 2, &cfg).unwrap();
        prop_assert_eq!(a.f, b.f);
    }

    #[test]
    fn holdout_loglik_is_nonpositive(seed in 0u64..10_000, n in 4usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 3);
        let f = random_f(&mut rng, n, 2);
        let w = random_w(&mut rng, 3, 2);
        let mask = make_holdout(&g, 0.3, seed).unwrap();
        prop_assert!(holdout_loglik(&f, &w, &mask, &FitConfig::default()) <= 0.0);
    }

    #[test]
    fn serial_trace_never_decreases(seed in 0u64..10_000, n in 5usize..30, k in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, k);
        let cfg = FitConfig { max_outer_iters: 25, rng_seed: seed, alpha: rng.gen_range(0.0..1.0), ..FitConfig::default() };
        let r = fit::<f64>(&g, 3, &cfg).unwrap();
        for p in r.objective_trace.windows(2) {
            prop_assert!(p[1].scaled_total >= p[0].scaled_total - 1e-9);
        }
    }

    #[test]
    fn files_round_trip(seed in 0u64..10_000, n in 2usize..30, k in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, k);
        let edge_text: String = g.edges().map(|(u, v)| format!("{u}\t{v}\n")).collect();
        let attr_text = format!("#{n}\t{k}\n")
            + &g.attr_pairs().map(|(u, a)| format!("{u}\t{a}\n")).collect::<String>();
        let (back, report) = assemble_graph(&parse_edges(&edge_text).unwrap(), &parse_attributes(&attr_text).unwrap()).unwrap();
        prop_assert!(report.is_clean());
        prop_assert_eq!(&back, &g);
        let cover = random_cover(&mut rng, n);
        let parsed = parse_cover(&format_communities(&cover)).unwrap();
        prop_assert_eq!(parsed.communities(), cover.communities());
    }

    #[test]
    fn degrees_sum_to_twice_edges(seed in 0u64..10_000, n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 0);
        prop_assert_eq!((0..n).map(|u| g.degree(u)).sum::<usize>(), 2 * g.num_edges());
    }
}
