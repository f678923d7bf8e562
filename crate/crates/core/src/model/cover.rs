use crate::error::{Error, Result};

/// A set of (possibly overlapping) communities over nodes `0..universe`.
///
/// Stored canonically: members ascending within a community, communities
/// ordered by descending size then lexicographically. Empty and duplicate
/// communities are removed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityCover {
    communities: Vec<Vec<usize>>,
    universe: usize,
}

impl CommunityCover {
    pub fn new(communities: Vec<Vec<usize>>, universe: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(communities.len());
        for (index, mut members) in communities.into_iter().enumerate() {
            if let Some(&id) = members.iter().find(|&&id| id >= universe) {
                return Err(Error::IdOutOfRange {
                    kind: "node",
                    index,
                    id,
                    limit: universe,
                });
            }
            members.sort_unstable();
            members.dedup();
            if !members.is_empty() {
                out.push(members);
            }
        }
        out.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        out.dedup();
        Ok(Self {
            communities: out,
            universe,
        })
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Same communities over a larger node universe.
    pub fn with_universe(mut self, universe: usize) -> Result<Self> {
        if universe < self.universe {
            if let Some(id) = self
                .communities
                .iter()
                .flatten()
                .find(|&&id| id >= universe)
            {
                return Err(Error::IdOutOfRange {
                    kind: "node",
                    index: 0,
                    id: *id,
                    limit: universe,
                });
            }
        }
        self.universe = universe;
        Ok(self)
    }
}
