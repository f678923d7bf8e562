//! Synthetic graphs: Forest Fire networks for timing, model-planted instances
//! for recovery, and uniform edge removal for robustness sweeps.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::likelihood::attr_prob;
use crate::model::{
    build_graph, AffiliationMatrix, AttributeWeights, AttributedGraph, CommunityCover,
};
use crate::scalar::Scalar;
use crate::solver::threshold_memberships;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestFireParams {
    pub n: usize,
    pub p_forward: f64,
    pub p_backward: f64,
    pub seed: u64,
}

impl ForestFireParams {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            p_forward: 0.36,
            p_backward: 0.32,
            seed,
        }
    }
}

/// Number of failures before the first success, success probability `1 - p`
/// (mean `p / (1 - p)`).
fn geometric(rng: &mut impl Rng, p: f64) -> usize {
    let mut k = 0;
    while rng.gen_bool(p) {
        k += 1;
    }
    k
}

/// Forest Fire graph without attributes.
///
/// Each arriving node picks a uniform ambassador and burns outward
/// breadth-first: from every burned node it follows a geometric number of
/// unburned out-links (mean `p_f/(1-p_f)`) and in-links (mean `p_b/(1-p_b)`).
/// The new node links to everything burned. Links are stored undirected.
pub fn forest_fire(params: &ForestFireParams) -> Result<AttributedGraph> {
    let ForestFireParams {
        n,
        p_forward,
        p_backward,
        seed,
    } = *params;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    for p in [p_forward, p_backward] {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "burn probability {p} must lie in [0, 1)"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut burned = vec![false; n];
    let mut edges = Vec::new();
    let mut queue = VecDeque::new();
    let mut candidates = Vec::new();

    for v in 1..n {
        let ambassador = rng.gen_range(0..v);
        let mut touched = vec![ambassador];
        burned[ambassador] = true;
        queue.push_back(ambassador);
        while let Some(x) = queue.pop_front() {
            for (links, p) in [(&out_links[x], p_forward), (&in_links[x], p_backward)] {
                let want = geometric(&mut rng, p);
                if want == 0 {
                    continue;
                }
                candidates.clear();
                candidates.extend(links.iter().copied().filter(|&y| !burned[y]));
                let take = want.min(candidates.len());
                for i in 0..take {
                    let j = rng.gen_range(i..candidates.len());
                    candidates.swap(i, j);
                    let y = candidates[i];
                    burned[y] = true;
                    touched.push(y);
                    queue.push_back(y);
                }
            }
        }
        for &y in &touched {
            burned[y] = false;
            out_links[v].push(y);
            in_links[y].push(v);
            edges.push((v, y));
        }
    }
    Ok(build_graph(&edges, &[], n, 0)?.0)
}

/// Replaces the attributes of `g` by `k` independent Bernoulli(`p`) columns.
pub fn bernoulli_attributes(
    g: &AttributedGraph,
    k: usize,
    p: f64,
    seed: u64,
) -> Result<AttributedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "attribute probability {p} must lie in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attrs = Vec::new();
    for u in 0..g.num_nodes() {
        for a in 0..k {
            if rng.gen_bool(p) {
                attrs.push((u, a));
            }
        }
    }
    g.with_attrs(&attrs, k)
}

/// Draws `A` and `X` from the generative model given `F` and `W`.
///
/// Edges are drawn community by community: each community `c` links members
/// `u, v` with probability `1 - exp(-F_uc F_vc)` and the union is kept, which
/// gives `P_uv = 1 - exp(-F_u . F_v)` overall.
pub fn sample_from_model<T: Scalar>(
    f: &AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    seed: u64,
) -> Result<AttributedGraph> {
    let n = f.num_nodes();
    if w.num_communities() != f.num_communities() {
        return Err(Error::DimensionMismatch(
            "F and W disagree on the community count".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for c in 0..f.num_communities() {
        let members: Vec<usize> = (0..n).filter(|&u| f.get(u, c) > T::zero()).collect();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                let p = -(-(f.get(u, c) * f.get(v, c))).exp_m1();
                if rng.gen_bool(p.to_f64_lossy().clamp(0.0, 1.0)) {
                    edges.push((u, v));
                }
            }
        }
    }
    let mut attrs = Vec::new();
    for u in 0..n {
        for k in 0..w.num_attrs() {
            let q = attr_prob(w.row(k), f.row(u)).to_f64_lossy();
            if rng.gen_bool(q.clamp(0.0, 1.0)) {
                attrs.push((u, k));
            }
        }
    }
    Ok(build_graph(&edges, &attrs, n, w.num_attrs())?.0)
}

/// Parameters of a model-planted instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub c: usize,
    pub k: usize,
    /// Probability that a node joins each community.
    pub membership_prob: f64,
    /// `F_uc` for members.
    pub strength: f64,
    /// Weight linking each attribute to its community.
    pub weight_scale: f64,
    /// Bias of every attribute; non-members have `Q = sigmoid(bias)`.
    pub bias: f64,
    pub seed: u64,
}

/// A sampled instance with the parameters that generated it.
#[derive(Debug, Clone)]
pub struct PlantedInstance<T> {
    pub graph: AttributedGraph,
    pub truth: CommunityCover,
    pub true_f: AffiliationMatrix<T>,
    pub true_w: AttributeWeights<T>,
}

/// Plants `c` communities and runs the generative model forward.
///
/// Each node joins each community independently with `membership_prob`
/// (nodes left without one join a uniform community); each attribute is tied
/// to one uniform community. The truth cover is the thresholded true `F`.
pub fn planted_instance<T: Scalar>(spec: &PlantedSpec) -> Result<PlantedInstance<T>> {
    if spec.n < 2 || spec.c == 0 || spec.k == 0 {
        return Err(Error::InvalidArgument(
            "planted instance needs n >= 2, c >= 1, k >= 1".into(),
        ));
    }
    if spec.strength.is_nan()
        || spec.strength <= 0.0
        || !(0.0..=1.0).contains(&spec.membership_prob)
    {
        return Err(Error::InvalidArgument(
            "planted strength must be positive and membership_prob in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let strength = T::of(spec.strength);
    let mut f = AffiliationMatrix::zeros(spec.n, spec.c);
    for u in 0..spec.n {
        let mut any = false;
        for c in 0..spec.c {
            if rng.gen_bool(spec.membership_prob) {
                f.set_raw(u, c, strength);
                any = true;
            }
        }
        if !any {
            f.set_raw(u, rng.gen_range(0..spec.c), strength);
        }
    }
    f.refresh_column_sums();
    let rows: Vec<Vec<T>> = (0..spec.k)
        .map(|_| {
            let mut row = vec![T::zero(); spec.c + 1];
            row[rng.gen_range(0..spec.c)] = T::of(spec.weight_scale);
            row[spec.c] = T::of(spec.bias);
            row
        })
        .collect();
    let w = AttributeWeights::from_rows(&rows, spec.c)?;
    let graph = sample_from_model(&f, &w, rng.gen())?;
    let truth = threshold_memberships(&f, None)?;
    Ok(PlantedInstance {
        graph,
        truth,
        true_f: f,
        true_w: w,
    })
}

/// Deletes exactly `round(gamma |E|)` uniformly chosen edges.
pub fn remove_edges(g: &AttributedGraph, gamma: f64, seed: u64) -> Result<AttributedGraph> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "edge removal fraction {gamma} must lie in [0, 1)"
        )));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let count = (gamma * edges.len() as f64 + 0.5).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let removed: Vec<(usize, usize)> = sample(&mut rng, edges.len(), count)
        .into_iter()
        .map(|i| edges[i])
        .collect();
    Ok(g.without_edges(&removed))
}
