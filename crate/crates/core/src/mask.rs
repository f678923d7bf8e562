use crate::error::{Error, Result};

fn index_by_first(n: usize, pairs: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let mut offsets = vec![0usize; n + 1];
    for &(a, _) in &sorted {
        offsets[a + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, sorted.into_iter().map(|(_, b)| b).collect())
}

/// Node pairs and node-attribute pairs held out of training.
///
/// Masked pairs contribute to neither the training likelihood nor any
/// gradient; they are scored separately by the held-out likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutMask {
    num_nodes: usize,
    num_attrs: usize,
    fraction: f64,
    /// `(u, v, A_uv)` with `u < v`, sorted.
    node_pairs: Vec<(usize, usize, bool)>,
    /// `(u, k, X_uk)`, sorted.
    attr_pairs: Vec<(usize, usize, bool)>,
    partner_offsets: Vec<usize>,
    partners: Vec<usize>,
    attr_offsets: Vec<usize>,
    attrs: Vec<usize>,
    by_attr_offsets: Vec<usize>,
    by_attr: Vec<usize>,
}

impl HoldoutMask {
    /// Builds a mask from explicit pairs with their observed values.
    ///
    /// Node pairs are normalized to `u < v`; a pair listed twice, or a
    /// self-pair, is rejected.
    pub fn new(
        num_nodes: usize,
        num_attrs: usize,
        node_pairs: Vec<(usize, usize, bool)>,
        attr_pairs: Vec<(usize, usize, bool)>,
        fraction: f64,
    ) -> Result<Self> {
        let mut np = Vec::with_capacity(node_pairs.len());
        for (index, (u, v, a)) in node_pairs.into_iter().enumerate() {
            for id in [u, v] {
                if id >= num_nodes {
                    return Err(Error::IdOutOfRange {
                        kind: "node",
                        index,
                        id,
                        limit: num_nodes,
                    });
                }
            }
            if u == v {
                return Err(Error::InvalidArgument(format!(
                    "self-pair ({u}, {u}) in mask"
                )));
            }
            np.push((u.min(v), u.max(v), a));
        }
        np.sort_unstable();
        if np.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidArgument(
                "node pair listed twice in mask".into(),
            ));
        }
        let mut ap = attr_pairs;
        for (index, &(u, k, _)) in ap.iter().enumerate() {
            if u >= num_nodes {
                return Err(Error::IdOutOfRange {
                    kind: "node",
                    index,
                    id: u,
                    limit: num_nodes,
                });
            }
            if k >= num_attrs {
                return Err(Error::IdOutOfRange {
                    kind: "attribute",
                    index,
                    id: k,
                    limit: num_attrs,
                });
            }
        }
        ap.sort_unstable();
        if ap.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidArgument(
                "attribute pair listed twice in mask".into(),
            ));
        }

        let both: Vec<(usize, usize)> = np.iter().flat_map(|&(u, v, _)| [(u, v), (v, u)]).collect();
        let (partner_offsets, partners) = index_by_first(num_nodes, &both);
        let by_node: Vec<(usize, usize)> = ap.iter().map(|&(u, k, _)| (u, k)).collect();
        let (attr_offsets, attrs) = index_by_first(num_nodes, &by_node);
        let by_k: Vec<(usize, usize)> = ap.iter().map(|&(u, k, _)| (k, u)).collect();
        let (by_attr_offsets, by_attr) = index_by_first(num_attrs, &by_k);

        Ok(Self {
            num_nodes,
            num_attrs,
            fraction,
            node_pairs: np,
            attr_pairs: ap,
            partner_offsets,
            partners,
            attr_offsets,
            attrs,
            by_attr_offsets,
            by_attr,
        })
    }

    pub fn empty(num_nodes: usize, num_attrs: usize) -> Self {
        Self::new(num_nodes, num_attrs, Vec::new(), Vec::new(), 0.0).expect("empty mask")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_attrs(&self) -> usize {
        self.num_attrs
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn node_pairs(&self) -> &[(usize, usize, bool)] {
        &self.node_pairs
    }

    pub fn attr_pairs(&self) -> &[(usize, usize, bool)] {
        &self.attr_pairs
    }

    pub fn is_empty(&self) -> bool {
        self.node_pairs.is_empty() && self.attr_pairs.is_empty()
    }

    /// Sorted nodes `v` whose pair with `u` is masked.
    #[inline]
    pub fn partners(&self, u: usize) -> &[usize] {
        &self.partners[self.partner_offsets[u]..self.partner_offsets[u + 1]]
    }

    /// Sorted attributes `k` whose pair with `u` is masked.
    #[inline]
    pub fn masked_attrs(&self, u: usize) -> &[usize] {
        &self.attrs[self.attr_offsets[u]..self.attr_offsets[u + 1]]
    }

    /// Sorted nodes `u` whose pair with attribute `k` is masked.
    #[inline]
    pub fn masked_nodes(&self, k: usize) -> &[usize] {
        &self.by_attr[self.by_attr_offsets[k]..self.by_attr_offsets[k + 1]]
    }

    pub fn is_pair_masked(&self, u: usize, v: usize) -> bool {
        self.partners(u).binary_search(&v).is_ok()
    }

    pub fn is_attr_masked(&self, u: usize, k: usize) -> bool {
        self.masked_attrs(u).binary_search(&k).is_ok()
    }

    /// Mask with observed values overwritten by `f(pair) -> new value`.
    pub fn map_observed(
        &self,
        node: impl Fn(usize, usize, bool) -> bool,
        attr: impl Fn(usize, usize, bool) -> bool,
    ) -> Self {
        let mut m = self.clone();
        m.node_pairs
            .iter_mut()
            .for_each(|p| p.2 = node(p.0, p.1, p.2));
        m.attr_pairs
            .iter_mut()
            .for_each(|p| p.2 = attr(p.0, p.1, p.2));
        m
    }
}
