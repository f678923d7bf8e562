//! Reference implementations shared by the oracle and acceptance tests.
#![allow(dead_code)]

use std::collections::HashSet;

use cesna::*;
use rand::Rng;

pub const EPS: f64 = 1e-10;

pub fn random_graph(rng: &mut impl Rng, n: usize, k: usize) -> AttributedGraph {
    let p = rng.gen_range(0.1..0.6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let q = rng.gen_range(0.1..0.9);
    let attrs: Vec<_> = (0..n)
        .flat_map(|u| (0..k).map(move |a| (u, a)))
        .filter(|_| rng.gen_bool(q))
        .collect();
    build_graph(&edges, &attrs, n, k).unwrap().0
}

/// Dense memberships, so no edge sits near the dot-product floor.
pub fn random_f(rng: &mut impl Rng, n: usize, c: usize) -> AffiliationMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..c).map(|_| rng.gen_range(0.1..1.0)).collect())
        .collect();
    AffiliationMatrix::from_rows(&rows).unwrap()
}

pub fn random_w(rng: &mut impl Rng, k: usize, c: usize) -> AttributeWeights<f64> {
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..=c).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    AttributeWeights::from_rows(&rows, c).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sig(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn q_of(w: &[f64], f: &[f64]) -> f64 {
    let c = f.len();
    sig(dot(&w[..c], f) + w[c])
}

pub fn bern(x: bool, q: f64) -> f64 {
    let q = q.clamp(1e-12, 1.0 - 1e-12);
    if x {
        q.ln()
    } else {
        (1.0 - q).ln()
    }
}

pub fn naive_lg(
    g: &AttributedGraph,
    f: &AffiliationMatrix<f64>,
    mask: Option<&HoldoutMask>,
) -> f64 {
    let mut total = 0.0;
    for u in 0..g.num_nodes() {
        for v in u + 1..g.num_nodes() {
            if mask.is_some_and(|m| m.is_pair_masked(u, v)) {
                continue;
            }
            let d = dot(f.row(u), f.row(v));
            total += if g.has_edge(u, v) {
                (-(-d.max(EPS)).exp_m1()).ln()
            } else {
                -d
            };
        }
    }
    total
}

pub fn naive_lx(g: &AttributedGraph, f: &AffiliationMatrix<f64>, w: &AttributeWeights<f64>) -> f64 {
    let mut total = 0.0;
    for u in 0..g.num_nodes() {
        for k in 0..g.num_attrs() {
            total += bern(g.has_attr(u, k), q_of(w.row(k), f.row(u)));
        }
    }
    total
}

pub fn naive_graph_grad(u: usize, g: &AttributedGraph, f: &AffiliationMatrix<f64>) -> Vec<f64> {
    let mut grad = vec![0.0; f.num_communities()];
    for v in (0..g.num_nodes()).filter(|&v| v != u) {
        let fv = f.row(v);
        let coef = if g.has_edge(u, v) {
            let d = dot(f.row(u), fv).max(EPS);
            (-d).exp() / (1.0 - (-d).exp())
        } else {
            -1.0
        };
        for (gc, &x) in grad.iter_mut().zip(fv) {
            *gc += coef * x;
        }
    }
    grad
}

/// Scaled objective restricted to the terms that involve `F_u`.
pub fn node_local(
    u: usize,
    fu: &[f64],
    g: &AttributedGraph,
    f: &AffiliationMatrix<f64>,
    w: &AttributeWeights<f64>,
    alpha: f64,
) -> f64 {
    let mut lg = 0.0;
    for v in (0..g.num_nodes()).filter(|&v| v != u) {
        let d = dot(fu, f.row(v));
        lg += if g.has_edge(u, v) {
            (-(-d.max(EPS)).exp_m1()).ln()
        } else {
            -d
        };
    }
    let lx: f64 = (0..g.num_attrs())
        .map(|k| bern(g.has_attr(u, k), q_of(w.row(k), fu)))
        .sum();
    (1.0 - alpha) * lg + alpha * lx
}

pub fn attr_local(k: usize, wk: &[f64], g: &AttributedGraph, f: &AffiliationMatrix<f64>) -> f64 {
    (0..g.num_nodes())
        .map(|u| bern(g.has_attr(u, k), q_of(wk, f.row(u))))
        .sum()
}

pub fn assert_fd(analytic: &[f64], fd: &[f64], what: &str) {
    for (c, (&a, &n)) in analytic.iter().zip(fd).enumerate() {
        if a.abs() > 1e-6 {
            let rel = (a - n).abs() / a.abs();
            assert!(
                rel < 1e-4,
                "{what}[{c}]: analytic {a}, finite difference {n}, rel {rel}"
            );
        }
    }
}

pub fn brute_similarity(a: &[usize], b: &[usize], kind: SimilarityKind) -> f64 {
    let a: HashSet<_> = a.iter().collect();
    let b: HashSet<_> = b.iter().collect();
    let inter = a.intersection(&b).count() as f64;
    match kind {
        SimilarityKind::F1 => 2.0 * inter / (a.len() + b.len()) as f64,
        SimilarityKind::Jaccard => inter / a.union(&b).count() as f64,
    }
}

pub fn brute_match(truth: &CommunityCover, detected: &CommunityCover, kind: SimilarityKind) -> f64 {
    let best = |from: &CommunityCover, to: &CommunityCover| -> f64 {
        from.communities()
            .iter()
            .map(|a| {
                to.communities()
                    .iter()
                    .map(|b| brute_similarity(a, b, kind))
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / (2 * from.len()) as f64
    };
    best(truth, detected) + best(detected, truth)
}

pub fn random_cover(rng: &mut impl Rng, n: usize) -> CommunityCover {
    let m = rng.gen_range(1..=5);
    let sets = (0..m)
        .map(|_| {
            let mut s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            if s.is_empty() {
                s.push(rng.gen_range(0..n));
            }
            s
        })
        .collect();
    CommunityCover::new(sets, n).unwrap()
}

/// Largest relative error over components with `|analytic| > 1e-6`.
pub fn max_rel_error(analytic: &[f64], fd: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(fd)
        .filter(|(a, _)| a.abs() > 1e-6)
        .map(|(a, n)| (a - n).abs() / a.abs())
        .fold(0.0, f64::max)
}

/// Central differences of `f` around `x` with step `h`.
pub fn central_diff(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (mut plus, mut minus) = (x.to_vec(), x.to_vec());
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}
