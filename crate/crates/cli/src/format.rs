//! Plain-text graph files.
//!
//! ```text
//! # comment
//! n m
//! w w_0 ... w_{n-1}      (optional; degrees are used when absent)
//! u v weight             (m lines)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use kpart_core::graph::{Graph, GraphError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: negative weight {value}")]
    NegativeWeight { line: usize, value: f64 },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

pub fn parse_graph(path: &Path) -> Result<Graph, FormatError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_graph_str(&text)
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, FormatError> {
    token.parse().map_err(|_| parse_err(line, format!("invalid {what} `{token}`")))
}

pub fn parse_graph_str(text: &str) -> Result<Graph, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `n m`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = fields[..] else {
        return Err(parse_err(hline, "header must be `n m`"));
    };
    let n: usize = number(n, hline, "vertex count")?;
    let m: usize = number(m, hline, "edge count")?;

    let mut weights = None;
    let mut edges = Vec::with_capacity(m);
    let mut seen = std::collections::HashSet::new();
    for (line, content) in lines {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields[0] == "w" {
            if weights.is_some() || !edges.is_empty() {
                return Err(parse_err(line, "vertex weights must appear once, before the edges"));
            }
            if fields.len() != n + 1 {
                return Err(parse_err(line, format!("expected {n} vertex weights, found {}", fields.len() - 1)));
            }
            let mut ws = Vec::with_capacity(n);
            for t in &fields[1..] {
                let w: f64 = number(t, line, "vertex weight")?;
                if !w.is_finite() {
                    return Err(parse_err(line, format!("vertex weight `{t}` is not finite")));
                }
                if w < 0.0 {
                    return Err(FormatError::NegativeWeight { line, value: w });
                }
                ws.push(w);
            }
            weights = Some(ws);
            continue;
        }
        let [u, v, w] = fields[..] else {
            return Err(parse_err(line, "edge lines must be `u v weight`"));
        };
        let u: usize = number(u, line, "vertex")?;
        let v: usize = number(v, line, "vertex")?;
        let w: f64 = number(w, line, "edge weight")?;
        if u >= n || v >= n {
            return Err(parse_err(line, format!("vertex out of range 0..{n}")));
        }
        if u == v {
            return Err(parse_err(line, format!("self-loop at vertex {u}")));
        }
        if !w.is_finite() {
            return Err(parse_err(line, format!("edge weight `{w}` is not finite")));
        }
        if w < 0.0 {
            return Err(FormatError::NegativeWeight { line, value: w });
        }
        if w == 0.0 {
            return Err(parse_err(line, "edge weight must be positive"));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(FormatError::DuplicateEdge { line, u, v });
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(parse_err(hline, format!("header declares {m} edges, found {}", edges.len())));
    }
    let graph = match weights {
        Some(ws) => Graph::with_vertex_weights(n, edges, ws),
        None => Graph::with_degree_weights(n, edges),
    };
    graph.map_err(|e: GraphError| parse_err(hline, e.to_string()))
}

/// Inverse of [`parse_graph_str`]; weights are written in shortest
/// round-trip form.
pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edges().len());
    if !g.degree_mode() {
        out.push('w');
        for w in g.vertex_weights() {
            let _ = write!(out, " {w:?}");
        }
        out.push('\n');
    }
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {:?}", e.u, e.v, e.weight);
    }
    out
}
