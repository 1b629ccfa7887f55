// SPDX-License-Identifier: Apache-2.0

//! Graphviz export. Vertices and arcs are written in ascending order so the
//! output is reproducible byte for byte.

use std::fmt::Write as _;

use super::ExplicitDynamics;
use crate::error::{Error, Result};

/// Writes a digraph on `0..vertices`. `label` may attach a text label to a
/// vertex.
pub fn write_dot(
    vertices: usize,
    arcs: impl IntoIterator<Item = (usize, usize)>,
    label: impl Fn(usize) -> Option<String>,
) -> String {
    let mut out = String::from("digraph dynamics {\n");
    for v in 0..vertices {
        match label(v) {
            Some(text) => {
                let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
                let _ = writeln!(out, "  {v} [label=\"{escaped}\"];");
            }
            None => {
                let _ = writeln!(out, "  {v};");
            }
        }
    }
    let mut arcs: Vec<_> = arcs.into_iter().collect();
    arcs.sort_unstable();
    arcs.dedup();
    for (u, v) in arcs {
        let _ = writeln!(out, "  {u} -> {v};");
    }
    out.push_str("}\n");
    out
}

/// Reads the subset of DOT that [`write_dot`] produces: one `u;`,
/// `u [attrs];` or `u -> v;` statement per line with numeric vertex ids.
/// Returns the vertex count (largest id plus one) and the arcs.
pub fn parse_dot(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut vertices = 0usize;
    let mut arcs = Vec::new();
    let mut opened = false;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let bad = |what: &str| Error::Graph(format!("DOT line {}: {what}: {raw:?}", no + 1));
        if line.is_empty() || line.starts_with("//") || line == "}" {
            continue;
        }
        if !opened {
            if line.starts_with("digraph") && line.ends_with('{') {
                opened = true;
                continue;
            }
            return Err(bad("expected `digraph ... {`"));
        }
        let stmt = line.split('[').next().unwrap_or("").trim().trim_end_matches(';').trim();
        let id = |t: &str| t.trim().parse::<usize>().map_err(|_| bad("expected a numeric vertex id"));
        match stmt.split_once("->") {
            Some((u, v)) => {
                let (u, v) = (id(u)?, id(v)?);
                vertices = vertices.max(u + 1).max(v + 1);
                arcs.push((u, v));
            }
            None => vertices = vertices.max(id(stmt)? + 1),
        }
    }
    if !opened {
        return Err(Error::Graph("DOT input has no digraph".into()));
    }
    Ok((vertices, arcs))
}

impl ExplicitDynamics {
    /// DOT text with each vertex annotated by `copy:gadget:local`.
    pub fn to_dot(&self) -> String {
        write_dot(self.total(), self.arcs(), |c| {
            let p = self.placement(c);
            Some(format!("{c} ({}:{}:{})", p.copy, p.kind, p.local))
        })
    }
}
