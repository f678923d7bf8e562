//! Agreement between a detected cover and ground truth.
//!
//! Every ground-truth community is matched to its most similar detected
//! community and vice versa; the score averages the two directions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::CommunityCover;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityKind {
    F1,
    Jaccard,
}

impl SimilarityKind {
    fn of_counts(self, inter: usize, a: usize, b: usize) -> f64 {
        match self {
            SimilarityKind::F1 => 2.0 * inter as f64 / (a + b) as f64,
            SimilarityKind::Jaccard => inter as f64 / (a + b - inter) as f64,
        }
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(SimilarityKind::F1),
            "jaccard" => Ok(SimilarityKind::Jaccard),
            other => Err(Error::InvalidArgument(format!(
                "unknown similarity metric '{other}'"
            ))),
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityKind::F1 => "f1",
            SimilarityKind::Jaccard => "jaccard",
        })
    }
}

fn sorted_unique(xs: &[usize]) -> std::borrow::Cow<'_, [usize]> {
    if xs.windows(2).all(|w| w[0] < w[1]) {
        xs.into()
    } else {
        let mut v = xs.to_vec();
        v.sort_unstable();
        v.dedup();
        v.into()
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// F1 (`2|a∩b| / (|a|+|b|)`) or Jaccard (`|a∩b| / |a∪b|`) of two node sets.
pub fn set_similarity(a: &[usize], b: &[usize], kind: SimilarityKind) -> Result<f64> {
    let (a, b) = (sorted_unique(a), sorted_unique(b));
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(kind.of_counts(intersection_size(&a, &b), a.len(), b.len()))
}

/// Bidirectional best-match score between `truth` and `detected`, in `[0, 1]`.
///
/// Pairwise intersections are accumulated through a node-to-community index,
/// so only overlapping pairs are visited.
pub fn match_score(
    truth: &CommunityCover,
    detected: &CommunityCover,
    kind: SimilarityKind,
) -> Result<f64> {
    if truth.is_empty() || detected.is_empty() {
        return Err(Error::EmptyCover);
    }
    let universe = truth.universe().max(detected.universe());
    let mut member_of: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (j, community) in detected.communities().iter().enumerate() {
        for &u in community {
            member_of[u].push(j);
        }
    }
    let sizes: Vec<usize> = detected.communities().iter().map(Vec::len).collect();
    let mut best_for_detected = vec![0.0f64; detected.len()];
    let mut truth_total = 0.0;
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for t in truth.communities() {
        counts.clear();
        for &u in t {
            for &j in &member_of[u] {
                *counts.entry(j).or_insert(0) += 1;
            }
        }
        let mut best = 0.0f64;
        for (&j, &inter) in &counts {
            let s = kind.of_counts(inter, t.len(), sizes[j]);
            best = best.max(s);
            best_for_detected[j] = best_for_detected[j].max(s);
        }
        truth_total += best;
    }
    let detected_total: f64 = best_for_detected.iter().sum();
    Ok(truth_total / (2 * truth.len()) as f64 + detected_total / (2 * detected.len()) as f64)
}

/// `(score_a - score_b) / score_b`.
pub fn relative_gain(score_a: f64, score_b: f64) -> Result<f64> {
    if score_b == 0.0 {
        return Err(Error::InvalidArgument(
            "relative gain over a zero baseline".into(),
        ));
    }
    Ok((score_a - score_b) / score_b)
}
