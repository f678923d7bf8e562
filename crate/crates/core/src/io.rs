//! Text formats for edges, attributes, communities, weights and run manifests.
//!
//! Everything here works on strings; opening files is left to the caller.
//! All lists are tab separated with decimal ids, and lines starting with `#`
//! are comments.

use crate::error::{Error, Result};
use crate::model::{build_graph, AttributeWeights, AttributedGraph, BuildReport, CommunityCover};
use crate::scalar::Scalar;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("'{tok}' is not a node or attribute id")))
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_pair(l: &str, line: usize) -> Result<(usize, usize)> {
    let mut it = l.split('\t');
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((parse_id(a.trim(), line)?, parse_id(b.trim(), line)?)),
        _ => Err(parse_err(line, "expected two tab-separated ids")),
    }
}

/// `u<TAB>v` per line. Duplicates and either orientation are allowed.
pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    data_lines(text)
        .map(|(line, l)| parse_pair(l, line))
        .collect()
}

/// Attribute pairs plus optional `(N, K)` from a leading `#N<TAB>K` line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeList {
    pub pairs: Vec<(usize, usize)>,
    pub dims: Option<(usize, usize)>,
}

/// `u<TAB>k` per line, meaning node `u` has attribute `k`.
pub fn parse_attributes(text: &str) -> Result<AttributeList> {
    let dims = text
        .lines()
        .next()
        .and_then(|first| first.trim_end_matches('\r').strip_prefix('#'))
        .and_then(|rest| parse_pair(rest, 1).ok());
    let pairs = data_lines(text)
        .map(|(line, l)| parse_pair(l, line))
        .collect::<Result<_>>()?;
    Ok(AttributeList { pairs, dims })
}

/// Builds the graph from parsed inputs. Without a header, `N` and `K` are one
/// past the largest id seen.
pub fn assemble_graph(
    edges: &[(usize, usize)],
    attrs: &AttributeList,
) -> Result<(AttributedGraph, BuildReport)> {
    let max_node = edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .chain(attrs.pairs.iter().map(|&(u, _)| u))
        .max();
    let (n, k) = match attrs.dims {
        Some((n, k)) => (n.max(max_node.map_or(0, |m| m + 1)), k),
        None => (
            max_node.map_or(0, |m| m + 1),
            attrs.pairs.iter().map(|&(_, k)| k + 1).max().unwrap_or(0),
        ),
    };
    build_graph(edges, &attrs.pairs, n, k)
}

/// One community per line, ids separated by tabs. Blank lines are skipped.
pub fn parse_communities(text: &str) -> Result<Vec<Vec<usize>>> {
    data_lines(text)
        .map(|(line, l)| l.split('\t').map(|t| parse_id(t.trim(), line)).collect())
        .collect()
}

/// Cover over one past the largest id in `text`.
pub fn parse_cover(text: &str) -> Result<CommunityCover> {
    let sets = parse_communities(text)?;
    let universe = sets.iter().flatten().max().map_or(0, |&m| m + 1);
    CommunityCover::new(sets, universe)
}

pub fn format_communities(cover: &CommunityCover) -> String {
    let mut out = String::new();
    for community in cover.communities() {
        let ids: Vec<String> = community.iter().map(usize::to_string).collect();
        out.push_str(&ids.join("\t"));
        out.push('\n');
    }
    out
}

/// C's `%.9g`.
pub fn format_g9(x: f64) -> String {
    const P: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `k<TAB>w_0<TAB>...<TAB>w_{C-1}<TAB>bias` per attribute.
pub fn format_weights<T: Scalar>(w: &AttributeWeights<T>) -> String {
    let mut out = String::new();
    for k in 0..w.num_attrs() {
        out.push_str(&k.to_string());
        for &x in w.row(k) {
            out.push('\t');
            out.push_str(&format_g9(x.to_f64_lossy()));
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`format_weights`]; rows must be listed as `0, 1, ...`.
pub fn parse_weights(text: &str) -> Result<AttributeWeights<f64>> {
    let mut rows = Vec::new();
    for (line, l) in data_lines(text) {
        let mut it = l.split('\t');
        let k = parse_id(it.next().unwrap_or("").trim(), line)?;
        if k != rows.len() {
            return Err(parse_err(
                line,
                format!("expected attribute {}, found {k}", rows.len()),
            ));
        }
        let row = it
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("'{t}' is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.is_empty() {
            return Err(parse_err(line, "missing bias column"));
        }
        if let Some(first) = rows.first().map(Vec::len) {
            if first != row.len() {
                return Err(parse_err(
                    line,
                    format!("expected {first} values, found {}", row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let c = rows.first().map_or(0, |r| r.len() - 1);
    AttributeWeights::from_rows(&rows, c)
}

/// Ordered flat `key=value` record of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry; newlines in the value are replaced by spaces.
    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::new();
        for (line, l) in data_lines(text) {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| parse_err(line, "expected key=value"))?;
            m.entries.push((k.to_string(), v.to_string()));
        }
        Ok(m)
    }
}

impl std::fmt::Display for Manifest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
