//! Initial memberships from locally minimal neighborhoods.
//!
//! A node's closed neighborhood `N(u) + {u}` is a seed when its conductance is
//! strictly lower than that of every adjacent node's (distinct) closed
//! neighborhood. Seeds are ranked by conductance and the best `C` become the
//! initial indicator columns of `F`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AffiliationMatrix, AttributedGraph};
use crate::scalar::Scalar;

/// A candidate seed community: the closed neighborhood of `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    pub center: usize,
    /// Sorted member ids.
    pub members: Vec<usize>,
    pub conductance: f64,
}

/// `cut(S) / min(vol(S), 2|E| - vol(S))`, or 1 when the denominator is 0.
///
/// `nodes` may be in any order but must not repeat.
pub fn conductance(g: &AttributedGraph, nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("conductance of an empty set".into()));
    }
    if nodes.len() >= g.num_nodes() {
        return Err(Error::InvalidArgument(
            "conductance of the full node set".into(),
        ));
    }
    let mut inside = vec![false; g.num_nodes()];
    for &u in nodes {
        inside[u] = true;
    }
    Ok(conductance_with(g, nodes, &inside))
}

fn conductance_with(g: &AttributedGraph, nodes: &[usize], inside: &[bool]) -> f64 {
    let mut vol = 0usize;
    let mut cut = 0usize;
    for &u in nodes {
        vol += g.degree(u);
        cut += g.neighbors(u).iter().filter(|&&v| !inside[v]).count();
    }
    let denom = vol.min(2 * g.num_edges() - vol);
    if denom == 0 {
        1.0
    } else {
        cut as f64 / denom as f64
    }
}

fn closed_neighborhood(g: &AttributedGraph, u: usize) -> Vec<usize> {
    let nb = g.neighbors(u);
    let pos = nb.partition_point(|&v| v < u);
    let mut out = Vec::with_capacity(nb.len() + 1);
    out.extend_from_slice(&nb[..pos]);
    out.push(u);
    out.extend_from_slice(&nb[pos..]);
    out
}

/// Conductance of every node's closed neighborhood (1 for the full node set).
pub fn neighborhood_conductances(g: &AttributedGraph) -> Vec<f64> {
    let n = g.num_nodes();
    let mut inside = vec![false; n];
    (0..n)
        .map(|u| {
            let members = closed_neighborhood(g, u);
            members.iter().for_each(|&v| inside[v] = true);
            let phi = conductance_with(g, &members, &inside);
            members.iter().for_each(|&v| inside[v] = false);
            phi
        })
        .collect()
}

/// Closed neighborhoods that are locally minimal in conductance, ascending by
/// conductance (ties by center id).
///
/// Isolated nodes and neighborhoods spanning every node never qualify. A
/// neighbor whose closed neighborhood is the same node set is not a
/// competitor, and identical seed sets are reported once, under the smallest
/// center.
pub fn locally_minimal_neighborhoods(g: &AttributedGraph) -> Vec<SeedSet> {
    let n = g.num_nodes();
    let phi = neighborhood_conductances(g);
    let mut seeds = Vec::new();
    for u in 0..n {
        let deg = g.degree(u);
        if deg == 0 || deg + 1 == n {
            continue;
        }
        let mut minimal = true;
        let mut duplicate_of_smaller = false;
        for &v in g.neighbors(u) {
            if g.degree(v) == deg && same_closed_neighborhood(g, u, v) {
                duplicate_of_smaller |= v < u;
                continue;
            }
            if phi[u] >= phi[v] {
                minimal = false;
                break;
            }
        }
        if minimal && !duplicate_of_smaller {
            seeds.push(SeedSet {
                center: u,
                members: closed_neighborhood(g, u),
                conductance: phi[u],
            });
        }
    }
    seeds.sort_by(|a, b| {
        a.conductance
            .total_cmp(&b.conductance)
            .then(a.center.cmp(&b.center))
    });
    seeds
}

/// For adjacent `u`, `v`: whether `N(u)+{u} == N(v)+{v}`.
fn same_closed_neighborhood(g: &AttributedGraph, u: usize, v: usize) -> bool {
    closed_neighborhood(g, u) == closed_neighborhood(g, v)
}

/// Initial `F`: seed indicator columns, then random indicator columns for any
/// communities beyond the number of seeds. No column is left empty.
pub fn init_affiliations<T: Scalar>(
    g: &AttributedGraph,
    num_communities: usize,
    seed: u64,
) -> Result<AffiliationMatrix<T>> {
    if num_communities == 0 {
        return Err(Error::InvalidArgument(
            "number of communities must be at least 1".into(),
        ));
    }
    let n = g.num_nodes();
    let seeds = locally_minimal_neighborhoods(g);
    let mut f = AffiliationMatrix::zeros(n, num_communities);
    let used = seeds.len().min(num_communities);
    for (c, s) in seeds.iter().take(used).enumerate() {
        for &u in &s.members {
            f.set_raw(u, c, T::one());
        }
    }
    if used < num_communities {
        let mean_size = if seeds.is_empty() {
            (2 * g.num_edges()) as f64 / n as f64 + 1.0
        } else {
            seeds.iter().map(|s| s.members.len()).sum::<usize>() as f64 / seeds.len() as f64
        };
        let p = (mean_size / n as f64).clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in used..num_communities {
            loop {
                let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
                if !members.is_empty() {
                    members.iter().for_each(|&u| f.set_raw(u, c, T::one()));
                    break;
                }
            }
        }
    }
    f.refresh_column_sums();
    Ok(f)
}
