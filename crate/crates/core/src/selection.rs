//! Choosing the number of communities by held-out likelihood.

use std::collections::HashSet;

use log::info;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::likelihood::{attr_prob, bernoulli_log_lik, edge_log_prob};
use crate::model::{AffiliationMatrix, AttributeWeights, AttributedGraph, FitConfig};
use crate::scalar::{dot, Scalar};
use crate::solver::{FitResult, Solver};

pub use crate::mask::HoldoutMask;

pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.1;

/// Above this node count the node-pair mask is a balanced sample of edges and
/// non-edges rather than a uniform sample of all `N(N-1)/2` pairs.
pub const EXACT_PAIR_SAMPLING_MAX_NODES: usize = 2000;

fn round_count(x: f64) -> usize {
    x.round_ties_even() as usize
}

/// Maps a linear index in `0..N(N-1)/2` to the unordered pair `(u, v)`, `u < v`.
fn pair_from_index(row_starts: &[usize], idx: usize) -> (usize, usize) {
    let u = row_starts.partition_point(|&s| s <= idx) - 1;
    (u, u + 1 + idx - row_starts[u])
}

/// Samples the held-out node pairs and node-attribute pairs.
pub fn make_holdout(g: &AttributedGraph, fraction: f64, seed: u64) -> Result<HoldoutMask> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "holdout fraction {fraction} must lie in (0, 1)"
        )));
    }
    let n = g.num_nodes();
    let k = g.num_attrs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let node_pairs = if n <= EXACT_PAIR_SAMPLING_MAX_NODES {
        let total = n * (n - 1) / 2;
        let count = round_count(total as f64 * fraction).min(total);
        let mut row_starts = Vec::with_capacity(n);
        let mut acc = 0;
        for u in 0..n {
            row_starts.push(acc);
            acc += n - 1 - u;
        }
        sample(&mut rng, total, count)
            .into_iter()
            .map(|i| {
                let (u, v) = pair_from_index(&row_starts, i);
                (u, v, g.has_edge(u, v))
            })
            .collect()
    } else {
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let count = round_count(edges.len() as f64 * fraction);
        let mut pairs: Vec<(usize, usize, bool)> = sample(&mut rng, edges.len(), count)
            .into_iter()
            .map(|i| (edges[i].0, edges[i].1, true))
            .collect();
        let non_edges = n * (n - 1) / 2 - edges.len();
        let wanted = count.min(non_edges);
        let mut chosen = HashSet::with_capacity(wanted);
        while chosen.len() < wanted {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || g.has_edge(u, v) {
                continue;
            }
            if chosen.insert((u.min(v), u.max(v))) {
                pairs.push((u.min(v), u.max(v), false));
            }
        }
        pairs
    };

    let total_attr = n * k;
    let attr_count = round_count(total_attr as f64 * fraction).min(total_attr);
    let attr_pairs = if attr_count == 0 {
        Vec::new()
    } else {
        sample(&mut rng, total_attr, attr_count)
            .into_iter()
            .map(|i| {
                let (u, a) = (i / k, i % k);
                (u, a, g.has_attr(u, a))
            })
            .collect()
    };
    HoldoutMask::new(n, k, node_pairs, attr_pairs, fraction)
}

/// Scaled Bernoulli log-likelihood of the held-out observations recorded in
/// `mask`, using the same `alpha` weighting as training.
pub fn holdout_loglik<T: Scalar>(
    f: &AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    mask: &HoldoutMask,
    config: &FitConfig,
) -> T {
    let eps = T::of(config.min_dot_guard);
    let alpha = T::of(config.alpha);
    let mut graph = T::zero();
    for &(u, v, observed) in mask.node_pairs() {
        let d = dot(f.row(u), f.row(v));
        // ln(1 - P_uv) = -F_u.F_v exactly
        graph += if observed { edge_log_prob(d, eps) } else { -d };
    }
    let mut attr = T::zero();
    for &(u, k, observed) in mask.attr_pairs() {
        attr += bernoulli_log_lik(observed, attr_prob(w.row(k), f.row(u)));
    }
    (T::one() - alpha) * graph + alpha * attr
}

/// Training data with every held-out edge and attribute one removed.
pub fn training_view(g: &AttributedGraph, mask: &HoldoutMask) -> AttributedGraph {
    let edges: Vec<(usize, usize)> = mask.node_pairs().iter().map(|&(u, v, _)| (u, v)).collect();
    let attrs: Vec<(usize, usize)> = mask.attr_pairs().iter().map(|&(u, k, _)| (u, k)).collect();
    g.without_edges(&edges).without_attrs(&attrs)
}

/// Fits on `g` with the masked pairs treated as missing (excluded from the
/// likelihood, the gradients and the initialization).
pub fn fit_masked<T: Scalar>(
    g: &AttributedGraph,
    num_communities: usize,
    config: &FitConfig,
    mask: &HoldoutMask,
) -> Result<FitResult<T>> {
    let train = training_view(g, mask);
    Ok(Solver::new(&train, num_communities, config, Some(mask))?.run())
}

/// Outcome of a held-out sweep over candidate community counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub best: usize,
    /// `(candidate, held-out log-likelihood)` in the order given.
    pub scores: Vec<(usize, f64)>,
}

pub fn choose_num_communities(
    g: &AttributedGraph,
    candidates: &[usize],
    config: &FitConfig,
) -> Result<Selection> {
    choose_num_communities_with(g, candidates, config, DEFAULT_HOLDOUT_FRACTION)
}

/// Fits every candidate on the same mask (fresh initialization each) and picks
/// the one with the highest held-out log-likelihood; ties go to the smaller `C`.
pub fn choose_num_communities_with(
    g: &AttributedGraph,
    candidates: &[usize],
    config: &FitConfig,
    fraction: f64,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "no candidate community counts".into(),
        ));
    }
    if let Some(&c) = candidates.iter().find(|&&c| c == 0) {
        return Err(Error::InvalidArgument(format!(
            "candidate community count {c} must be >= 1"
        )));
    }
    config.validate()?;
    let mask = make_holdout(g, fraction, config.rng_seed)?;
    let train = training_view(g, &mask);
    let mut scores = Vec::with_capacity(candidates.len());
    for &c in candidates {
        let result: FitResult<f64> = Solver::new(&train, c, config, Some(&mask))?.run();
        let score = holdout_loglik(&result.f, &result.w, &mask, config);
        info!("C = {c}: held-out log-likelihood {score:.6}");
        scores.push((c, score));
    }
    let best = pick_best(&scores);
    Ok(Selection { best, scores })
}

fn pick_best(scores: &[(usize, f64)]) -> usize {
    let mut best = scores[0];
    for &(c, s) in &scores[1..] {
        if s > best.1 || (s == best.1 && c < best.0) {
            best = (c, s);
        }
    }
    best.0
}
