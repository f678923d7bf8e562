use crate::error::{Error, Result};

/// Undirected simple graph with a sparse binary node-attribute matrix.
///
/// Adjacency and attributes are stored in compressed rows. Attributes are
/// indexed both by node (`attrs_of`) and by attribute (`nodes_with_attr`);
/// any `(node, attr)` pair not present is an observed zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedGraph {
    num_nodes: usize,
    num_attrs: usize,
    adj_offsets: Vec<usize>,
    adj: Vec<usize>,
    attr_offsets: Vec<usize>,
    attrs: Vec<usize>,
    by_attr_offsets: Vec<usize>,
    by_attr: Vec<usize>,
}

/// Items dropped while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicate_edges: usize,
    pub duplicate_attrs: usize,
}

impl BuildReport {
    pub fn is_clean(&self) -> bool {
        self.self_loops == 0 && self.duplicate_edges == 0 && self.duplicate_attrs == 0
    }
}

fn compress(n: usize, pairs: &mut [(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    pairs.sort_unstable();
    let mut offsets = vec![0usize; n + 1];
    for &(a, _) in pairs.iter() {
        offsets[a + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let targets = pairs.iter().map(|&(_, b)| b).collect();
    (offsets, targets)
}

/// Builds a graph from raw edge and attribute lists.
///
/// Self-loops are dropped and duplicates (including `(v,u)` after `(u,v)`)
/// are merged; both are counted in the returned report.
pub fn build_graph(
    edges: &[(usize, usize)],
    attrs: &[(usize, usize)],
    n: usize,
    k: usize,
) -> Result<(AttributedGraph, BuildReport)> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut report = BuildReport::default();

    let mut undirected = Vec::with_capacity(edges.len());
    for (index, &(u, v)) in edges.iter().enumerate() {
        for id in [u, v] {
            if id >= n {
                return Err(Error::IdOutOfRange {
                    kind: "node",
                    index,
                    id,
                    limit: n,
                });
            }
        }
        if u == v {
            report.self_loops += 1;
            continue;
        }
        undirected.push((u.min(v), u.max(v)));
    }
    undirected.sort_unstable();
    let before = undirected.len();
    undirected.dedup();
    report.duplicate_edges = before - undirected.len();

    let mut attr_pairs = Vec::with_capacity(attrs.len());
    for (index, &(u, a)) in attrs.iter().enumerate() {
        if u >= n {
            return Err(Error::IdOutOfRange {
                kind: "node",
                index,
                id: u,
                limit: n,
            });
        }
        if a >= k {
            return Err(Error::IdOutOfRange {
                kind: "attribute",
                index,
                id: a,
                limit: k,
            });
        }
        attr_pairs.push((u, a));
    }
    attr_pairs.sort_unstable();
    let before = attr_pairs.len();
    attr_pairs.dedup();
    report.duplicate_attrs = before - attr_pairs.len();

    Ok((
        AttributedGraph::from_clean(n, k, &undirected, &attr_pairs),
        report,
    ))
}

impl AttributedGraph {
    /// `edges` must be deduplicated `(u, v)` with `u < v`; `attrs` deduplicated.
    fn from_clean(n: usize, k: usize, edges: &[(usize, usize)], attrs: &[(usize, usize)]) -> Self {
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            directed.push((u, v));
            directed.push((v, u));
        }
        let (adj_offsets, adj) = compress(n, &mut directed);
        let mut by_node = attrs.to_vec();
        let (attr_offsets, attrs_flat) = compress(n, &mut by_node);
        let mut by_attr: Vec<(usize, usize)> = attrs.iter().map(|&(u, a)| (a, u)).collect();
        let (by_attr_offsets, by_attr) = compress(k, &mut by_attr);
        Self {
            num_nodes: n,
            num_attrs: k,
            adj_offsets,
            adj,
            attr_offsets,
            attrs: attrs_flat,
            by_attr_offsets,
            by_attr,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_attrs(&self) -> usize {
        self.num_attrs
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }

    /// Number of `(node, attr)` pairs with value one.
    pub fn num_attr_ones(&self) -> usize {
        self.attrs.len()
    }

    /// Sorted neighbor list of `u`.
    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[self.adj_offsets[u]..self.adj_offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.adj_offsets[u + 1] - self.adj_offsets[u]
    }

    /// Sorted attribute ids `k` with `X_uk = 1`.
    #[inline]
    pub fn attrs_of(&self, u: usize) -> &[usize] {
        &self.attrs[self.attr_offsets[u]..self.attr_offsets[u + 1]]
    }

    /// Sorted node ids `u` with `X_uk = 1`.
    #[inline]
    pub fn nodes_with_attr(&self, k: usize) -> &[usize] {
        &self.by_attr[self.by_attr_offsets[k]..self.by_attr_offsets[k + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn has_attr(&self, u: usize, k: usize) -> bool {
        self.attrs_of(u).binary_search(&k).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// `(node, attr)` pairs with value one, ordered by node then attribute.
    pub fn attr_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes).flat_map(move |u| self.attrs_of(u).iter().map(move |&k| (u, k)))
    }

    /// Copy of this graph with the listed edges removed (either orientation;
    /// non-edges are ignored).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Self {
        let mut drop: Vec<(usize, usize)> =
            removed.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        drop.sort_unstable();
        let edges: Vec<_> = self
            .edges()
            .filter(|e| drop.binary_search(e).is_err())
            .collect();
        let attrs: Vec<_> = self.attr_pairs().collect();
        Self::from_clean(self.num_nodes, self.num_attrs, &edges, &attrs)
    }

    /// Copy of this graph with the listed attribute ones cleared.
    pub fn without_attrs(&self, removed: &[(usize, usize)]) -> Self {
        let mut drop = removed.to_vec();
        drop.sort_unstable();
        let edges: Vec<_> = self.edges().collect();
        let attrs: Vec<_> = self
            .attr_pairs()
            .filter(|p| drop.binary_search(p).is_err())
            .collect();
        Self::from_clean(self.num_nodes, self.num_attrs, &edges, &attrs)
    }

    /// Same edges, attribute matrix replaced by `attrs` over `k` attributes.
    pub fn with_attrs(&self, attrs: &[(usize, usize)], k: usize) -> Result<Self> {
        let edges: Vec<_> = self.edges().collect();
        build_graph(&edges, attrs, self.num_nodes, k).map(|(g, _)| g)
    }

    /// Sum of degrees over `nodes`.
    pub fn volume(&self, nodes: &[usize]) -> usize {
        nodes.iter().map(|&u| self.degree(u)).sum()
    }

    /// True when every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.num_nodes;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dedupes_and_drops_self_loops() {
        let (g, report) = build_graph(&[(0, 1), (1, 0), (2, 2)], &[], 3, 0).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
        assert!(g.neighbors(2).is_empty());
        assert_eq!(report.self_loops, 1);
        assert_eq!(report.duplicate_edges, 1);
    }

    #[test]
    fn empty_graph_is_valid() {
        let (g, report) = build_graph(&[], &[], 5, 0).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.num_nodes(), 5);
        assert!(report.is_clean());
    }

    #[test]
    fn absent_attributes_are_zero() {
        let (g, _) = build_graph(&[(0, 1), (1, 2)], &[(0, 0), (2, 0)], 3, 1).unwrap();
        assert!(g.has_attr(0, 0));
        assert!(!g.has_attr(1, 0));
        assert!(g.has_attr(2, 0));
        assert_eq!(g.nodes_with_attr(0), &[0, 2]);
    }

    #[test]
    fn rejects_out_of_range_ids() {
        assert_eq!(
            build_graph(&[(0, 1), (1, 3)], &[], 3, 0).unwrap_err(),
            Error::IdOutOfRange {
                kind: "node",
                index: 1,
                id: 3,
                limit: 3
            }
        );
        assert_eq!(
            build_graph(&[], &[(0, 0), (1, 2)], 3, 2).unwrap_err(),
            Error::IdOutOfRange {
                kind: "attribute",
                index: 1,
                id: 2,
                limit: 2
            }
        );
        assert_eq!(build_graph(&[], &[], 0, 0).unwrap_err(), Error::EmptyGraph);
    }

    #[test]
    fn edge_removal_keeps_attributes() {
        let (g, _) = build_graph(&[(0, 1), (1, 2), (0, 2)], &[(1, 0)], 3, 1).unwrap();
        let h = g.without_edges(&[(2, 1)]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert_eq!(h.attr_pairs().collect::<Vec<_>>(), vec![(1, 0)]);
    }

    proptest! {
        #[test]
        fn adjacency_is_symmetric_and_degrees_sum(
            n in 1usize..30,
            raw in proptest::collection::vec((0usize..30, 0usize..30), 0..120),
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let (g, _) = build_graph(&edges, &[], n, 0).unwrap();
            let deg_sum: usize = (0..n).map(|u| g.degree(u)).sum();
            prop_assert_eq!(deg_sum, 2 * g.num_edges());
            for u in 0..n {
                let nb = g.neighbors(u);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                for &v in nb {
                    prop_assert!(v != u);
                    prop_assert!(g.has_edge(v, u));
                }
            }
        }
    }
}
