//! Plain-text edge lists.
//!
//! ```text
//! # ell=3, q=3, seed=42, sides=27,27
//! # provenance: random algebraic graph
//! 0 27
//! 0 31 2
//! ```
//!
//! Vertex ids are global: `0..L` is the left side and `L..L+R` the right side.
//! The optional third column is the edge multiplicity.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{BipartiteGraph, GraphError, GraphMeta, SimpleGraph};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeListHeader {
    pub ell: Option<u32>,
    pub q: Option<u32>,
    pub seed: Option<u64>,
    pub sides: Option<(usize, usize)>,
    pub provenance: String,
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedEdgeList {
    pub header: EdgeListHeader,
    pub edges: Vec<(u32, u32, u32)>,
}

impl ParsedEdgeList {
    pub fn into_bipartite(self) -> Result<BipartiteGraph, GraphError> {
        let (left, right) = self.header.sides.ok_or_else(|| GraphError::Parse {
            line: 1,
            message: "missing sides=L,R header".into(),
        })?;
        let mut g = BipartiteGraph::from_weighted_edges(left, right, self.edges)?;
        g.meta = GraphMeta {
            ell: self.header.ell,
            q: self.header.q,
            seed: self.header.seed,
            provenance: self.header.provenance,
        };
        Ok(g)
    }

    /// Ignores multiplicities and the bipartition.
    pub fn into_simple(self) -> Result<SimpleGraph, GraphError> {
        let max_id = self
            .edges
            .iter()
            .map(|e| e.0.max(e.1) as usize + 1)
            .max()
            .unwrap_or(0);
        let n = self
            .header
            .sides
            .map_or(max_id, |(l, r)| (l + r).max(max_id));
        SimpleGraph::from_edges(n, self.edges.into_iter().map(|(u, v, _)| (u, v)))
    }
}

fn parse_opt<T: std::str::FromStr>(value: &str, line: usize) -> Result<Option<T>, GraphError> {
    if value == "none" {
        return Ok(None);
    }
    value.parse().map(Some).map_err(|_| GraphError::Parse {
        line,
        message: format!("bad value {value:?}"),
    })
}

pub fn parse_edge_list(text: &str) -> Result<ParsedEdgeList, GraphError> {
    read_edge_list(text.as_bytes())
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<ParsedEdgeList, GraphError> {
    let mut header = EdgeListHeader::default();
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(p) = rest.strip_prefix("provenance:") {
                header.provenance = p.trim().to_string();
                continue;
            }
            for token in rest.split(", ") {
                let Some((key, value)) = token.split_once('=') else {
                    continue;
                };
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "ell" => header.ell = parse_opt(value, lineno)?,
                    "q" => header.q = parse_opt(value, lineno)?,
                    "seed" => header.seed = parse_opt(value, lineno)?,
                    "sides" => {
                        let (l, r) = value.split_once(',').ok_or_else(|| GraphError::Parse {
                            line: lineno,
                            message: "sides must be L,R".into(),
                        })?;
                        let l = parse_opt(l.trim(), lineno)?.unwrap_or(0);
                        let r = parse_opt(r.trim(), lineno)?.unwrap_or(0);
                        header.sides = Some((l, r));
                    }
                    _ => {
                        header.extra.insert(key.to_string(), value.to_string());
                    }
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(GraphError::Parse {
                line: lineno,
                message: "expected `u v [mult]`".into(),
            });
        }
        let num = |s: &str| -> Result<u32, GraphError> {
            s.parse().map_err(|_| GraphError::Parse {
                line: lineno,
                message: format!("bad integer {s:?}"),
            })
        };
        let w = if fields.len() == 3 {
            num(fields[2])?
        } else {
            1
        };
        edges.push((num(fields[0])?, num(fields[1])?, w));
    }
    Ok(ParsedEdgeList { header, edges })
}

pub fn write_edge_list<W: Write>(g: &BipartiteGraph, mut w: W) -> std::io::Result<()> {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map_or_else(|| "none".to_string(), |x| x.to_string())
    }
    writeln!(
        w,
        "# ell={}, q={}, seed={}, sides={},{}",
        opt(g.meta.ell),
        opt(g.meta.q),
        opt(g.meta.seed),
        g.left_count(),
        g.right_count()
    )?;
    if !g.meta.provenance.is_empty() {
        writeln!(w, "# provenance: {}", g.meta.provenance)?;
    }
    for (u, v, m) in g.edges() {
        if g.is_multigraph() {
            writeln!(w, "{u} {v} {m}")?;
        } else {
            writeln!(w, "{u} {v}")?;
        }
    }
    Ok(())
}
