//! Shared data types: the attributed graph, membership and weight matrices,
//! community covers and the fit configuration.

mod affiliation;
mod config;
mod cover;
mod graph;

pub use affiliation::{AffiliationMatrix, AttributeWeights};
pub use config::{FitConfig, LineSearch};
pub use cover::CommunityCover;
pub use graph::{build_graph, AttributedGraph, BuildReport};
