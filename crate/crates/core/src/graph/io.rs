use std::path::Path;

use super::Graph;
use crate::{Error, Result};

/// `n m` header followed by one `u v` line per edge, `u < v`, sorted.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parses the edge-list format. Blank lines and `#` comments are ignored;
/// the edge count must match the header.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: format!("{e}"),
            })
        };
        let a = parse(it.next())?;
        let b = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "trailing tokens".into(),
            });
        }
        if header.is_none() {
            header = Some((a, b));
        } else {
            let (u, v) = (a.min(b), a.max(b));
            edges.push((u, v));
        }
    }
    let (n, m) = header.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            message: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}
