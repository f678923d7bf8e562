//! Overlapping community detection in networks with binary node attributes.
//!
//! Each node `u` has nonnegative community strengths `F_u`; an edge appears
//! with probability `1 - exp(-F_u . F_v)` and attribute `k` with probability
//! `sigmoid(W_k . [F_u, 1])`. [`fit`] maximizes the weighted log-likelihood
//! `(1 - alpha) L_G + alpha L_X - lambda |W|_1` by block-coordinate ascent,
//! and [`threshold_memberships`] turns `F` into a [`CommunityCover`].
//!
//! ```
//! use cesna::{build_graph, fit, threshold_memberships, FitConfig};
//!
//! let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)];
//! let (g, _) = build_graph(&edges, &[], 6, 0).unwrap();
//! let result = fit::<f64>(&g, 2, &FitConfig::default()).unwrap();
//! let cover = threshold_memberships(&result.f, None).unwrap();
//! assert_eq!(cover.communities(), &[vec![0, 1, 2], vec![3, 4, 5]]);
//! ```
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64`/`*F32` aliases name the concrete instantiations.

mod error;
pub mod evaluation;
pub mod experiments;
pub mod initializer;
pub mod io;
pub mod likelihood;
mod mask;
pub mod model;
mod scalar;
pub mod selection;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use evaluation::{match_score, relative_gain, set_similarity, SimilarityKind};
pub use initializer::{conductance, init_affiliations, locally_minimal_neighborhoods, SeedSet};
pub use likelihood::{
    attr_prob, edge_prob, grad_attr_weights, grad_node, log_lik_attr, log_lik_graph, objective,
    ObjectiveValue,
};
pub use mask::HoldoutMask;
pub use model::{
    build_graph, AffiliationMatrix, AttributeWeights, AttributedGraph, BuildReport, CommunityCover,
    FitConfig, LineSearch,
};
pub use scalar::Scalar;
pub use selection::{choose_num_communities, holdout_loglik, make_holdout, Selection};
pub use solver::{
    fit, membership_threshold, rank_attributes, threshold_memberships, update_attr_weights,
    update_node, FitResult, Solver,
};

pub type AffiliationMatrixF64 = AffiliationMatrix<f64>;
pub type AffiliationMatrixF32 = AffiliationMatrix<f32>;
pub type AttributeWeightsF64 = AttributeWeights<f64>;
pub type AttributeWeightsF32 = AttributeWeights<f32>;
pub type FitResultF64 = FitResult<f64>;
pub type FitResultF32 = FitResult<f32>;
pub type ObjectiveValueF64 = ObjectiveValue<f64>;
pub type ObjectiveValueF32 = ObjectiveValue<f32>;
