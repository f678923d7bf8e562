//! Block-coordinate ascent.
//!
//! Each outer iteration takes one projected line-search step on every row
//! `F_u` (with `W` fixed), refreshes the column sums, then one line-search
//! step on every weight row `W_k` (with `F` fixed). Every accepted step
//! strictly increases its block's objective, so with a single worker the
//! scaled objective never decreases.

use std::ops::Range;
use std::thread;

use log::debug;

use crate::error::{Error, Result};
use crate::initializer::init_affiliations;
use crate::likelihood::{objective, AttrProblem, NodeProblem, ObjectiveValue, RowSource};
use crate::mask::HoldoutMask;
use crate::model::{
    AffiliationMatrix, AttributeWeights, AttributedGraph, CommunityCover, FitConfig, LineSearch,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub f: AffiliationMatrix<T>,
    pub w: AttributeWeights<T>,
    /// Objective at initialization followed by one entry per outer iteration.
    pub objective_trace: Vec<ObjectiveValue<T>>,
    pub iterations_run: usize,
    pub converged: bool,
}

impl<T: Scalar> FitResult<T> {
    pub fn final_objective(&self) -> ObjectiveValue<T> {
        *self
            .objective_trace
            .last()
            .expect("trace holds the initial objective")
    }
}

/// One backtracking step from `x` along `direction`.
///
/// Trial points are `project(x + t d)` with `t` starting at
/// `init_step / max(1, |d|_inf)` and shrinking geometrically. A trial is
/// accepted when `value(trial) - value(x) >= armijo * d.(trial - x)` and it
/// actually moves. Returns `None` when every trial is rejected.
fn line_search_step<T: Scalar>(
    x: &[T],
    direction: &[T],
    value: impl Fn(&[T]) -> T,
    project: impl Fn(T) -> T,
    ls: &LineSearch,
) -> Option<Vec<T>> {
    let d_max = direction.iter().fold(T::zero(), |m, d| m.max(d.abs()));
    if d_max == T::zero() || !d_max.is_finite() {
        return None;
    }
    let base = value(x);
    let armijo = T::of(ls.armijo_const);
    let shrink = T::of(ls.shrink_factor);
    let mut t = T::of(ls.init_step) / d_max.max(T::one());
    let mut trial = vec![T::zero(); x.len()];
    for _ in 0..ls.max_trials {
        let mut predicted = T::zero();
        for ((y, &xi), &di) in trial.iter_mut().zip(x).zip(direction) {
            *y = project(xi + t * di);
            predicted += di * (*y - xi);
        }
        if predicted > T::zero() {
            let gain = value(&trial) - base;
            if gain >= armijo * predicted && gain > T::zero() {
                return Some(trial);
            }
        } else {
            // projection removed all movement; smaller steps cannot help
            return None;
        }
        t *= shrink;
    }
    None
}

fn step_node<T: Scalar, R: RowSource<T>>(
    u: usize,
    g: &AttributedGraph,
    rows: &R,
    column_sums: &[T],
    w: &AttributeWeights<T>,
    mask: Option<&HoldoutMask>,
    config: &FitConfig,
) -> Option<Vec<T>> {
    let problem = NodeProblem::new(u, g, rows, column_sums, w, mask, config);
    let x = rows.row(u);
    let grad = problem.gradient(x);
    let max_f = T::of(config.max_f);
    line_search_step(
        x,
        &grad,
        |y| problem.value(y),
        |y| y.max(T::zero()).min(max_f),
        &config.line_search,
    )
}

/// One projected gradient step on `F_u`; column sums are shifted by the row
/// change. Returns whether the row changed.
pub fn update_node<T: Scalar>(
    u: usize,
    g: &AttributedGraph,
    f: &mut AffiliationMatrix<T>,
    w: &AttributeWeights<T>,
    mask: Option<&HoldoutMask>,
    config: &FitConfig,
) -> bool {
    match step_node(u, g, f, f.column_sums(), w, mask, config) {
        Some(new) => {
            f.set_row(u, &new);
            true
        }
        None => false,
    }
}

fn step_attr<T: Scalar>(
    k: usize,
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    wk: &[T],
    mask: Option<&HoldoutMask>,
    config: &FitConfig,
) -> Option<Vec<T>> {
    let c = wk.len() - 1;
    let alpha = T::of(config.alpha);
    let lambda = T::of(config.lambda);
    let problem = AttrProblem::new(k, g, f, mask);
    let mut direction = if alpha > T::zero() {
        problem
            .gradient(wk)
            .into_iter()
            .map(|x| alpha * x)
            .collect()
    } else {
        vec![T::zero(); c + 1]
    };
    // subgradient of the l1 term with sign(0) = 0; bias unpenalized
    for (d, &x) in direction[..c].iter_mut().zip(&wk[..c]) {
        if x != T::zero() {
            *d -= lambda * x.signum();
        }
    }
    let value = |y: &[T]| {
        let penalty: T = y[..c].iter().map(|x| x.abs()).sum::<T>() * lambda;
        let fit = if alpha > T::zero() {
            alpha * problem.log_lik(y)
        } else {
            T::zero()
        };
        fit - penalty
    };
    line_search_step(wk, &direction, value, |y| y, &config.line_search)
}

/// One l1-subgradient line-search step on `W_k` for the objective
/// `alpha sum_u ln P(X_uk | F, W_k) - lambda |W_k|_1` (bias unpenalized).
/// Returns whether the row changed.
pub fn update_attr_weights<T: Scalar>(
    k: usize,
    g: &AttributedGraph,
    f: &AffiliationMatrix<T>,
    w: &mut AttributeWeights<T>,
    mask: Option<&HoldoutMask>,
    config: &FitConfig,
) -> bool {
    match step_attr(k, g, f, w.row(k), mask, config) {
        Some(new) => {
            w.set_row(k, &new);
            true
        }
        None => false,
    }
}

/// Rows from a worker's own (fresh) chunk or the iteration-start snapshot.
struct SplitRows<'a, T> {
    own: &'a [T],
    own_nodes: Range<usize>,
    snapshot: &'a [T],
    width: usize,
}

impl<T: Scalar> RowSource<T> for SplitRows<'_, T> {
    #[inline]
    fn row(&self, v: usize) -> &[T] {
        let c = self.width;
        if self.own_nodes.contains(&v) {
            let i = v - self.own_nodes.start;
            &self.own[i * c..(i + 1) * c]
        } else {
            &self.snapshot[v * c..(v + 1) * c]
        }
    }
}

/// Contiguous ranges of roughly equal `weight`.
fn balanced_ranges(
    weights: impl Iterator<Item = usize>,
    n: usize,
    parts: usize,
) -> Vec<Range<usize>> {
    let w: Vec<usize> = weights.collect();
    let total: usize = w.iter().sum();
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    let mut acc = 0;
    for (i, &x) in w.iter().enumerate() {
        acc += x;
        let boundary = total * (ranges.len() + 1) / parts;
        if acc >= boundary && ranges.len() + 1 < parts {
            ranges.push(start..i + 1);
            start = i + 1;
        }
    }
    ranges.push(start..n);
    ranges
}

fn split_rows_mut<'a, T>(
    mut data: &'a mut [T],
    ranges: &[Range<usize>],
    width: usize,
) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(ranges.len());
    for r in ranges {
        let (head, tail) = data.split_at_mut(r.len() * width);
        out.push(head);
        data = tail;
    }
    out
}

/// Stateful block-coordinate ascent over one graph.
pub struct Solver<'a, T> {
    graph: &'a AttributedGraph,
    mask: Option<&'a HoldoutMask>,
    config: FitConfig,
    f: AffiliationMatrix<T>,
    w: AttributeWeights<T>,
    trace: Vec<ObjectiveValue<T>>,
}

impl<'a, T: Scalar> Solver<'a, T> {
    /// Starts from locally-minimal-neighborhood memberships and zero weights.
    pub fn new(
        graph: &'a AttributedGraph,
        num_communities: usize,
        config: &FitConfig,
        mask: Option<&'a HoldoutMask>,
    ) -> Result<Self> {
        config.validate()?;
        let f = init_affiliations(graph, num_communities, config.rng_seed)?;
        let w = AttributeWeights::zeros(graph.num_attrs(), num_communities);
        Self::from_parts(graph, f, w, config, mask)
    }

    pub fn from_parts(
        graph: &'a AttributedGraph,
        mut f: AffiliationMatrix<T>,
        w: AttributeWeights<T>,
        config: &FitConfig,
        mask: Option<&'a HoldoutMask>,
    ) -> Result<Self> {
        config.validate()?;
        if f.num_nodes() != graph.num_nodes()
            || w.num_attrs() != graph.num_attrs()
            || w.num_communities() != f.num_communities()
        {
            return Err(Error::DimensionMismatch(format!(
                "graph {}x{}, F {}x{}, W {}x{}",
                graph.num_nodes(),
                graph.num_attrs(),
                f.num_nodes(),
                f.num_communities(),
                w.num_attrs(),
                w.num_communities() + 1
            )));
        }
        if let Some(m) = mask {
            if m.num_nodes() != graph.num_nodes() || m.num_attrs() != graph.num_attrs() {
                return Err(Error::DimensionMismatch(
                    "mask dimensions differ from graph".into(),
                ));
            }
        }
        f.refresh_column_sums();
        let start = objective(graph, &f, &w, config, mask);
        Ok(Self {
            graph,
            mask,
            config: config.clone(),
            f,
            w,
            trace: vec![start],
        })
    }

    pub fn memberships(&self) -> &AffiliationMatrix<T> {
        &self.f
    }

    pub fn weights(&self) -> &AttributeWeights<T> {
        &self.w
    }

    pub fn trace(&self) -> &[ObjectiveValue<T>] {
        &self.trace
    }

    fn node_pass_serial(&mut self) {
        for u in 0..self.graph.num_nodes() {
            update_node(u, self.graph, &mut self.f, &self.w, self.mask, &self.config);
        }
    }

    fn node_pass_parallel(&mut self, workers: usize) {
        let g = self.graph;
        let c = self.f.num_communities();
        let snapshot = self.f.clone();
        let ranges = balanced_ranges(
            (0..g.num_nodes()).map(|u| g.degree(u) + 1),
            g.num_nodes(),
            workers,
        );
        let (w, mask, config) = (&self.w, self.mask, &self.config);
        let chunks = split_rows_mut(self.f.rows_mut(), &ranges, c);
        thread::scope(|s| {
            for (range, chunk) in ranges.iter().cloned().zip(chunks) {
                let snapshot = &snapshot;
                s.spawn(move || {
                    for u in range.clone() {
                        let new = {
                            let rows = SplitRows {
                                own: &*chunk,
                                own_nodes: range.clone(),
                                snapshot: snapshot.values(),
                                width: c,
                            };
                            step_node(u, g, &rows, snapshot.column_sums(), w, mask, config)
                        };
                        if let Some(new) = new {
                            let i = u - range.start;
                            chunk[i * c..(i + 1) * c].copy_from_slice(&new);
                        }
                    }
                });
            }
        });
    }

    fn attr_pass(&mut self, workers: usize) {
        let g = self.graph;
        let k = g.num_attrs();
        if k == 0 || (self.config.alpha == 0.0 && self.w.l1_norm_without_bias() == T::zero()) {
            return;
        }
        let width = self.f.num_communities() + 1;
        let (f, mask, config) = (&self.f, self.mask, &self.config);
        let run = |range: Range<usize>, rows: &mut [T]| {
            for kk in range.clone() {
                let i = kk - range.start;
                let row = &mut rows[i * width..(i + 1) * width];
                if let Some(new) = step_attr(kk, g, f, row, mask, config) {
                    row.copy_from_slice(&new);
                }
            }
        };
        if workers <= 1 {
            run(0..k, self.w.rows_mut());
            return;
        }
        let ranges = balanced_ranges(std::iter::repeat_n(1, k), k, workers.min(k));
        let chunks = split_rows_mut(self.w.rows_mut(), &ranges, width);
        thread::scope(|s| {
            for (range, chunk) in ranges.iter().cloned().zip(chunks) {
                let run = &run;
                s.spawn(move || run(range, chunk));
            }
        });
    }

    /// One full pass over all `F_u` then all `W_k`; returns the new objective.
    pub fn outer_iteration(&mut self) -> ObjectiveValue<T> {
        let workers = self.config.num_workers.min(self.graph.num_nodes()).max(1);
        if workers == 1 {
            self.node_pass_serial();
        } else {
            self.node_pass_parallel(workers);
        }
        self.f.refresh_column_sums();
        self.attr_pass(self.config.num_workers);
        let value = objective(self.graph, &self.f, &self.w, &self.config, self.mask);
        self.trace.push(value);
        value
    }

    /// Iterates until the relative improvement drops below the tolerance or
    /// the iteration cap is reached.
    pub fn run(mut self) -> FitResult<T> {
        let mut converged = false;
        let tol = T::of(self.config.rel_improvement_tol);
        for it in 0..self.config.max_outer_iters {
            let prev = self.trace.last().expect("initial objective").scaled_total;
            let next = self.outer_iteration().scaled_total;
            debug!("iteration {}: objective {}", it + 1, next);
            if next - prev < tol * prev.abs() {
                converged = true;
                break;
            }
        }
        FitResult {
            iterations_run: self.trace.len() - 1,
            converged,
            f: self.f,
            w: self.w,
            objective_trace: self.trace,
        }
    }
}

/// Fits `num_communities` communities to `g`.
pub fn fit<T: Scalar>(
    g: &AttributedGraph,
    num_communities: usize,
    config: &FitConfig,
) -> Result<FitResult<T>> {
    Ok(Solver::new(g, num_communities, config, None)?.run())
}

/// `sqrt(-ln(1 - 1/N))`, raised by a few ulps if needed so that
/// `1 - exp(-delta^2) >= 1/N` holds in floating point.
pub fn membership_threshold<T: Scalar>(num_nodes: usize) -> Result<T> {
    if num_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "membership threshold needs at least 2 nodes, got {num_nodes}"
        )));
    }
    let inv_n = T::one() / T::of(num_nodes as f64);
    let mut delta = (-(-inv_n).ln_1p()).sqrt();
    while -(-(delta * delta)).exp_m1() < inv_n {
        delta = delta + delta * T::epsilon();
    }
    Ok(delta)
}

/// Node `u` joins community `c` iff `F_uc >= delta`; empty and duplicate
/// communities are dropped.
pub fn threshold_memberships<T: Scalar>(
    f: &AffiliationMatrix<T>,
    delta: Option<f64>,
) -> Result<CommunityCover> {
    let n = f.num_nodes();
    let delta = match delta {
        Some(d) => T::of(d),
        None => membership_threshold(n)?,
    };
    let communities = (0..f.num_communities())
        .map(|c| (0..n).filter(|&u| f.get(u, c) >= delta).collect())
        .collect();
    CommunityCover::new(communities, n)
}

/// Attributes ordered by the l2 norm of their community weights (bias
/// excluded), largest first; ties by attribute id.
pub fn rank_attributes<T: Scalar>(w: &AttributeWeights<T>) -> Vec<(usize, T)> {
    let c = w.num_communities();
    let mut ranked: Vec<(usize, T)> = (0..w.num_attrs())
        .map(|k| (k, w.row(k)[..c].iter().map(|&x| x * x).sum::<T>().sqrt()))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    ranked
}
