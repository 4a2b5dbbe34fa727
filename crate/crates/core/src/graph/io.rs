//! Plain-text graph format.
//!
//! ```text
//! # comment
//! undirected 3
//! 1 2 1.0
//! 2 3 1.0
//! ```

use std::fmt::Write as _;

use super::{Edge, Graph};
use crate::error::{Error, Result};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into `(column, token)` pairs, columns 1-based.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut header: Option<(bool, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        if toks.is_empty() {
            continue;
        }

        let Some((_, n)) = header else {
            if toks.len() != 2 {
                return Err(parse_err(
                    line_no,
                    toks[0].0,
                    "expected header `directed|undirected <n>`",
                ));
            }
            let directed = match toks[0].1 {
                "directed" => true,
                "undirected" => false,
                other => {
                    return Err(parse_err(
                        line_no,
                        toks[0].0,
                        format!("unknown graph kind `{other}`"),
                    ))
                }
            };
            let n = toks[1].1.parse::<usize>().map_err(|_| {
                parse_err(
                    line_no,
                    toks[1].0,
                    "node count must be a non-negative integer",
                )
            })?;
            header = Some((directed, n));
            continue;
        };

        if toks.len() != 3 {
            let col = toks.get(3).map_or(toks[0].0, |t| t.0);
            return Err(parse_err(line_no, col, "expected `u v w`"));
        }
        let idx_of = |t: (usize, &str)| -> Result<usize> {
            let v =
                t.1.parse::<usize>()
                    .map_err(|_| parse_err(line_no, t.0, format!("bad node index `{}`", t.1)))?;
            if v == 0 || v > n {
                return Err(parse_err(
                    line_no,
                    t.0,
                    format!("node index {v} out of range 1..={n}"),
                ));
            }
            Ok(v)
        };
        let u = idx_of(toks[0])?;
        let v = idx_of(toks[1])?;
        let w = toks[2]
            .1
            .parse::<f64>()
            .map_err(|_| parse_err(line_no, toks[2].0, format!("bad weight `{}`", toks[2].1)))?;
        if !w.is_finite() {
            return Err(parse_err(line_no, toks[2].0, "weight must be finite"));
        }
        edges.push(Edge::new(u, v, w));
    }

    let (directed, n) =
        header.ok_or_else(|| parse_err(last_line.max(1), 1, "missing header line"))?;
    Graph::new(n, directed, edges)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = String::new();
    let kind = if g.is_directed() {
        "directed"
    } else {
        "undirected"
    };
    let _ = writeln!(out, "{kind} {}", g.n());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.source, e.target, e.weight);
    }
    out
}
