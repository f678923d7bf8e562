//! Probabilities, log-likelihoods and gradients of the joint model.
//!
//! Edges follow `P_uv = 1 - exp(-F_u . F_v)`; each attribute follows an
//! independent logistic model `Q_uk = sigmoid(W_k . [F_u, 1])`. The fitted
//! objective is `(1 - alpha) L_G + alpha L_X - lambda |W|_1` with the bias
//! column excluded from the penalty.

use crate::error::{Error, Result};
use crate::mask::HoldoutMask;
use crate::model::{AffiliationMatrix, AttributeWeights, AttributedGraph, FitConfig};
use crate::scalar::{dot, log_one_minus_exp_neg, sigmoid, Scalar};

/// The three parts of the objective and their scaled combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue<T> {
    pub l_graph: T,
    pub l_attr: T,
    pub l1_penalty: T,
    /// `(1 - alpha) l_graph + alpha l_attr - l1_penalty`
    pub scaled_total: T,
}

/// Edge probability `1 - exp(-f_u . f_v)`, unguarded (for reporting).
pub fn edge_prob<T: Scalar>(f_u: &[T], f_v: &[T]) -> Result<T> {
    if f_u.len() != f_v.len() {
        return Err(Error::DimensionMismatch(format!(
            "membership vectors of length {} and {}",
            f_u.len(),
            f_v.len()
        )));
    }
    Ok(-(-dot(f_u, f_v)).exp_m1())
}

/// `ln P_uv` for an observed edge with the dot product floored at `eps`.
#[inline]
pub fn edge_log_prob<T: Scalar>(dot_product: T, eps: T) -> T {
    log_one_minus_exp_neg(dot_product.max(eps))
}

/// Attribute probability `Q_uk`; `w_k` carries the bias in its last slot.
///
/// # Panics
/// If `w_k.len() != f_u.len() + 1`.
pub fn attr_prob<T: Scalar>(w_k: &[T], f_u: &[T]) -> T {
    assert_eq!(
        w_k.len(),
        f_u.len() + 1,
        "weight row must be one longer than membership row"
    );
    sigmoid(logit(w_k, f_u))
}

#[inline]
fn logit<T: Scalar>(w_k: &[T], f_u: &[T]) -> T {
    let c = f_u.len();
    dot(&w_k[..c], f_u) + w_k[c]
}

/// Bernoulli log-likelihood of `x` under `q`, with `q` clamped away from 0 and 1.
#[inline]
pub fn bernoulli_log_lik<T: Scalar>(x: bool, q: T) -> T {
    let lo = T::prob_floor();
    let q = q.max(lo).min(T::one() - lo);
    if x {
        q.ln()
    } else {
        (T::one() - q).ln()
    }
}

/// Calls `f(k, X_uk)` for every attribute of `u` not masked, ascending in `k`.
#[inline]
fn for_each_attr_of<F: FnMut(usize, bool)>(
    ones: &[usize],
    masked: &[usize],
    num_attrs: usize,
    mut f: F,
) {
    let (mut i, mut j) = (0, 0);
    for k in 0..num_attrs {
        if j < masked.len() && masked[j] == k {
            j += 1;
            if i < ones.len() && ones[i] == k {
                i += 1;
            }
            continue;
        }
        let x = i < ones.len() && ones[i] == k;
        if x {
            i += 1;
        }
        f(k, x);
    }
}

/// Graph log-likelihood `L_G` over unordered pairs, skipping masked pairs.
///
/// The non-edge term uses the cached column sums of `f`
/// (`sum_{u<v} F_u.F_v = (|S|^2 - sum_u |F_u|^2) / 2`), so the cost is
/// `O(|E| C + N C)` rather than quadratic in `N`.
pub fn log_lik_graph<T: Scalar>(
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    mask: Option<&HoldoutMask>,
    min_dot_guard: f64,
) -> T {
    let eps = T::of(min_dot_guard);
    let two = T::of(2.0);
    let mut edge_term = T::zero();
    let mut edge_dots = T::zero();
    for u in 0..g.num_nodes() {
        let fu = f.row(u);
        for &v in g.neighbors(u).iter().filter(|&&v| v > u) {
            let d = dot(fu, f.row(v));
            edge_dots += d;
            if mask.is_some_and(|m| m.is_pair_masked(u, v)) {
                continue;
            }
            edge_term += edge_log_prob(d, eps);
        }
    }
    let mut masked_non_edge_dots = T::zero();
    if let Some(m) = mask {
        for &(u, v, _) in m.node_pairs() {
            if !g.has_edge(u, v) {
                masked_non_edge_dots += dot(f.row(u), f.row(v));
            }
        }
    }
    let sq_sums: T = f.column_sums().iter().map(|&s| s * s).sum();
    let all_pairs = (sq_sums - f.sum_row_sq_norms()) / two;
    edge_term - (all_pairs - edge_dots - masked_non_edge_dots)
}

/// Attribute log-likelihood `L_X` over all `(u, k)` not masked.
pub fn log_lik_attr<T: Scalar>(
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    mask: Option<&HoldoutMask>,
) -> T {
    let mut total = T::zero();
    for u in 0..g.num_nodes() {
        let fu = f.row(u);
        let masked = mask.map_or(&[][..], |m| m.masked_attrs(u));
        for_each_attr_of(g.attrs_of(u), masked, g.num_attrs(), |k, x| {
            total += bernoulli_log_lik(x, sigmoid(logit(w.row(k), fu)));
        });
    }
    total
}

/// Read access to membership rows; lets parallel workers mix fresh and
/// snapshot rows.
pub(crate) trait RowSource<T> {
    fn row(&self, v: usize) -> &[T];
}

impl<T: Scalar> RowSource<T> for AffiliationMatrix<T> {
    #[inline]
    fn row(&self, v: usize) -> &[T] {
        AffiliationMatrix::row(self, v)
    }
}

/// The part of the scaled objective that depends on one membership row `F_u`,
/// with all other rows and `W` held fixed.
pub(crate) struct NodeProblem<'a, T, R> {
    u: usize,
    graph: &'a AttributedGraph,
    rows: &'a R,
    weights: &'a AttributeWeights<T>,
    masked_attrs: &'a [usize],
    neighbors: Vec<usize>,
    non_neighbor_sum: Vec<T>,
    graph_scale: T,
    attr_scale: T,
    eps: T,
}

impl<'a, T: Scalar, R: RowSource<T>> NodeProblem<'a, T, R> {
    /// `column_sums` must include the current row of `u`.
    pub(crate) fn new(
        u: usize,
        graph: &'a AttributedGraph,
        rows: &'a R,
        column_sums: &[T],
        weights: &'a AttributeWeights<T>,
        mask: Option<&'a HoldoutMask>,
        config: &FitConfig,
    ) -> Self {
        let fu = rows.row(u);
        let c = fu.len();
        let mut neighbor_sum = vec![T::zero(); c];
        let mut neighbors = Vec::with_capacity(graph.degree(u));
        for &v in graph.neighbors(u) {
            for (s, &x) in neighbor_sum.iter_mut().zip(rows.row(v)) {
                *s += x;
            }
            if !mask.is_some_and(|m| m.is_pair_masked(u, v)) {
                neighbors.push(v);
            }
        }
        let mut masked_sum = vec![T::zero(); c];
        if let Some(m) = mask {
            for &v in m.partners(u) {
                if !graph.has_edge(u, v) {
                    for (s, &x) in masked_sum.iter_mut().zip(rows.row(v)) {
                        *s += x;
                    }
                }
            }
        }
        let non_neighbor_sum = (0..c)
            .map(|i| column_sums[i] - fu[i] - neighbor_sum[i] - masked_sum[i])
            .collect();
        let alpha = T::of(config.alpha);
        Self {
            u,
            graph,
            rows,
            weights,
            masked_attrs: mask.map_or(&[][..], |m| m.masked_attrs(u)),
            neighbors,
            non_neighbor_sum,
            graph_scale: T::one() - alpha,
            attr_scale: alpha,
            eps: T::of(config.min_dot_guard),
        }
    }

    /// Node-local scaled objective at membership row `fu`.
    pub(crate) fn value(&self, fu: &[T]) -> T {
        let mut graph = -dot(fu, &self.non_neighbor_sum);
        for &v in &self.neighbors {
            graph += edge_log_prob(dot(fu, self.rows.row(v)), self.eps);
        }
        let mut total = self.graph_scale * graph;
        if self.attr_scale > T::zero() {
            let mut attr = T::zero();
            for_each_attr_of(
                self.graph.attrs_of(self.u),
                self.masked_attrs,
                self.graph.num_attrs(),
                |k, x| attr += bernoulli_log_lik(x, sigmoid(logit(self.weights.row(k), fu))),
            );
            total += self.attr_scale * attr;
        }
        total
    }

    /// Gradient of `value` with respect to `fu`.
    pub(crate) fn gradient(&self, fu: &[T]) -> Vec<T> {
        let mut graph: Vec<T> = self.non_neighbor_sum.iter().map(|&s| -s).collect();
        for &v in &self.neighbors {
            let fv = self.rows.row(v);
            let d = dot(fu, fv).max(self.eps);
            // d/dx ln(1 - e^{-x}) = 1 / (e^x - 1)
            let factor = d.exp_m1().recip();
            for (g, &x) in graph.iter_mut().zip(fv) {
                *g += factor * x;
            }
        }
        let mut grad: Vec<T> = graph.into_iter().map(|g| self.graph_scale * g).collect();
        if self.attr_scale > T::zero() {
            let c = fu.len();
            let mut attr = vec![T::zero(); c];
            for_each_attr_of(
                self.graph.attrs_of(self.u),
                self.masked_attrs,
                self.graph.num_attrs(),
                |k, x| {
                    let wk = self.weights.row(k);
                    let residual = if x { T::one() } else { T::zero() } - sigmoid(logit(wk, fu));
                    for (a, &wkc) in attr.iter_mut().zip(&wk[..c]) {
                        *a += residual * wkc;
                    }
                },
            );
            for (g, a) in grad.iter_mut().zip(attr) {
                *g += self.attr_scale * a;
            }
        }
        grad
    }
}

/// Gradient of `(1 - alpha) L_G + alpha L_X` with respect to `F_u`.
///
/// The non-neighbor term uses `S_c - F_uc - sum_{v in N(u)} F_vc`, so the
/// cost is `O(deg(u) C + K C)`. Column sums of `f` must be fresh.
pub fn grad_node<T: Scalar>(
    u: usize,
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    mask: Option<&HoldoutMask>,
    config: &FitConfig,
) -> Vec<T> {
    NodeProblem::new(u, g, f, f.column_sums(), w, mask, config).gradient(f.row(u))
}

/// The per-attribute logistic regression: `W_k` with `F` held fixed.
pub(crate) struct AttrProblem<'a, T> {
    k: usize,
    graph: &'a AttributedGraph,
    f: &'a AffiliationMatrix<T>,
    masked_nodes: &'a [usize],
}

impl<'a, T: Scalar> AttrProblem<'a, T> {
    pub(crate) fn new(
        k: usize,
        graph: &'a AttributedGraph,
        f: &'a AffiliationMatrix<T>,
        mask: Option<&'a HoldoutMask>,
    ) -> Self {
        Self {
            k,
            graph,
            f,
            masked_nodes: mask.map_or(&[][..], |m| m.masked_nodes(k)),
        }
    }

    fn for_each_node<G: FnMut(usize, bool)>(&self, f: G) {
        for_each_attr_of(
            self.graph.nodes_with_attr(self.k),
            self.masked_nodes,
            self.graph.num_nodes(),
            f,
        );
    }

    /// `sum_u ln P(X_uk | F, W_k)` over unmasked nodes.
    pub(crate) fn log_lik(&self, wk: &[T]) -> T {
        let mut total = T::zero();
        self.for_each_node(|u, x| {
            total += bernoulli_log_lik(x, sigmoid(logit(wk, self.f.row(u))));
        });
        total
    }

    /// `sum_u (X_uk - Q_uk) [F_u, 1]`.
    pub(crate) fn gradient(&self, wk: &[T]) -> Vec<T> {
        let c = wk.len() - 1;
        let mut grad = vec![T::zero(); c + 1];
        self.for_each_node(|u, x| {
            let fu = self.f.row(u);
            let residual = if x { T::one() } else { T::zero() } - sigmoid(logit(wk, fu));
            for (g, &x) in grad[..c].iter_mut().zip(fu) {
                *g += residual * x;
            }
            grad[c] += residual;
        });
        grad
    }
}

/// Gradient of `sum_u ln P(X_uk | F, W_k)` with respect to `W_k` (bias last).
/// The l1 term is not included.
pub fn grad_attr_weights<T: Scalar>(
    k: usize,
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    mask: Option<&HoldoutMask>,
) -> Vec<T> {
    AttrProblem::new(k, g, f, mask).gradient(w.row(k))
}

pub fn objective<T: Scalar>(
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    config: &FitConfig,
    mask: Option<&HoldoutMask>,
) -> ObjectiveValue<T> {
    let alpha = T::of(config.alpha);
    let l_graph = log_lik_graph(g, f, mask, config.min_dot_guard);
    let l_attr = log_lik_attr(g, f, w, mask);
    let l1_penalty = T::of(config.lambda) * w.l1_norm_without_bias();
    ObjectiveValue {
        l_graph,
        l_attr,
        l1_penalty,
        scaled_total: (T::one() - alpha) * l_graph + alpha * l_attr - l1_penalty,
    }
}
