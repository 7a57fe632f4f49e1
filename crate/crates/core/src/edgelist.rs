//! Tab-separated edge lists: `i<TAB>j[<TAB>w]` per line, `#` starts a comment.
//!
//! Node ids are arbitrary strings. If every id is a non-negative integer the
//! ids are mapped to dense indices in numeric order, otherwise in order of
//! first appearance. Listing an edge twice, in either direction, is an error.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// Original id of each dense node index.
    pub node_ids: Vec<String>,
}

pub fn load(path: &Path) -> Result<LoadedGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<LoadedGraph> {
    let mut raw: Vec<(String, String, f64, usize)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split('\t').map(str::trim).collect();
        let (a, b, w) = match fields.as_slice() {
            [a, b] => (*a, *b, 1.0),
            [a, b, w] => {
                let w: f64 = w.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad weight {w:?}"),
                })?;
                (*a, *b, w)
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
                })
            }
        };
        if a.is_empty() || b.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "empty node id".into(),
            });
        }
        raw.push((a.to_string(), b.to_string(), w, lineno));
    }
    if raw.is_empty() {
        return Err(Error::InvalidArgument("edge list is empty".into()));
    }

    let node_ids = order_ids(&raw);
    let index: HashMap<&str, usize> = node_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(raw.len());
    for (a, b, w, lineno) in &raw {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        if i != j && !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::Parse {
                line: *lineno,
                msg: format!("duplicate edge {a} - {b}"),
            });
        }
        edges.push((i, j, *w));
    }
    let graph = Graph::from_edges(node_ids.len(), &edges)?;
    Ok(LoadedGraph { graph, node_ids })
}

fn order_ids(raw: &[(String, String, f64, usize)]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    for (a, b, _, _) in raw {
        for id in [a, b] {
            if seen.insert(id.as_str()) {
                ids.push(id.clone());
            }
        }
    }
    let numeric: Option<Vec<u64>> = ids.iter().map(|s| s.parse::<u64>().ok()).collect();
    if let Some(values) = numeric {
        let mut paired: Vec<(u64, String)> = values.into_iter().zip(ids).collect();
        paired.sort();
        paired.into_iter().map(|(_, s)| s).collect()
    } else {
        ids
    }
}

/// Serializes `graph` in the same format, one edge per line with `i < j`.
pub fn write(graph: &Graph, node_ids: Option<&[String]>) -> String {
    let mut out = String::new();
    for (i, j, w) in graph.edges() {
        match node_ids {
            Some(ids) => writeln!(out, "{}\t{}\t{}", ids[i], ids[j], w),
            None => writeln!(out, "{i}\t{j}\t{w}"),
        }
        .expect("writing to a String");
    }
    out
}
