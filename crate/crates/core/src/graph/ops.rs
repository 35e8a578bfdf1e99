use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, GraphError, GraphMeta, Host};

/// Default cap on the vertex count of derived graphs.
pub const DEFAULT_VERTEX_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub pairs: usize,
    pub vertices_removed: usize,
    pub edges_removed: usize,
}

impl BipartiteGraph {
    /// Deletes every vertex with `remove[v]` set, together with its edges.
    /// Survivors are renumbered densely, left side first, keeping their order.
    pub fn remove_vertices(&self, remove: &[bool]) -> BipartiteGraph {
        let n = self.vertex_count();
        let mut new_id = vec![u32::MAX; n];
        let mut next = 0u32;
        for v in 0..n {
            if !remove[v] {
                new_id[v] = next;
                next += 1;
            }
        }
        let left = (0..self.left).filter(|&v| !remove[v]).count();
        let right = next as usize - left;
        let mut edges = BTreeMap::new();
        for (u, v, w) in self.edges() {
            if !remove[u as usize] && !remove[v as usize] {
                edges.insert((new_id[u as usize], new_id[v as usize]), w);
            }
        }
        let mut g = BipartiteGraph::from_edge_map(left, right, &edges);
        let keep = |v: &usize| !remove[*v];
        g.labels = self
            .labels
            .as_ref()
            .map(|l| (0..n).filter(keep).map(|v| l[v].clone()).collect());
        g.supervertex = self
            .supervertex
            .as_ref()
            .map(|s| (0..n).filter(keep).map(|v| s[v]).collect());
        g.meta = self.meta.clone();
        g
    }

    /// Graph on the supervertices: one edge per superedge.
    pub fn quotient(&self) -> Result<BipartiteGraph, GraphError> {
        let sv = self
            .supervertex
            .as_ref()
            .ok_or(GraphError::NoSupervertices)?;
        let left = sv[..self.left].iter().map(|&s| s + 1).max().unwrap_or(0);
        let right_max = sv[self.left..].iter().map(|&s| s + 1).max().unwrap_or(left);
        let right = right_max.saturating_sub(left);
        let edges = self
            .edges()
            .map(|(u, v, _)| (sv[u as usize], sv[v as usize]));
        BipartiteGraph::from_edges(left as usize, right as usize, edges)
    }

    /// True when every superedge is a complete bipartite block between the
    /// two fibres and there are no edges inside or between non-adjacent fibres
    /// beyond those blocks.
    pub fn is_exact_blowup(&self) -> bool {
        let Some(sv) = self.supervertex.as_ref() else {
            return false;
        };
        let mut fibre: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (v, &s) in sv.iter().enumerate() {
            fibre.entry(s).or_default().push(v as u32);
        }
        let mut superedges = BTreeSet::new();
        for (u, v, _) in self.edges() {
            let (a, b) = (sv[u as usize], sv[v as usize]);
            if a == b {
                return false;
            }
            superedges.insert((a, b));
        }
        let block_edges: usize = superedges
            .iter()
            .map(|(a, b)| fibre[a].len() * fibre[b].len())
            .sum();
        block_edges == self.edge_count()
    }
}

/// Deletes both endpoints of every listed pair.
pub fn remove_bad_pairs(
    g: &BipartiteGraph,
    pairs: &[(u32, u32)],
) -> (BipartiteGraph, RemovalReport) {
    let mut remove = vec![false; g.vertex_count()];
    for &(x, y) in pairs {
        remove[x as usize] = true;
        remove[y as usize] = true;
    }
    let out = g.remove_vertices(&remove);
    let report = RemovalReport {
        pairs: pairs.len(),
        vertices_removed: remove.iter().filter(|&&r| r).count(),
        edges_removed: g.edge_count() - out.edge_count(),
    };
    (out, report)
}

/// Replaces every vertex `v` by the independent set `v*m .. v*m + m` and every
/// edge by a complete bipartite block. Multiplicities carry over blockwise.
pub fn blowup(
    g: &BipartiteGraph,
    m: usize,
    vertex_cap: usize,
) -> Result<BipartiteGraph, GraphError> {
    if m == 0 {
        return Err(GraphError::ZeroBlowup);
    }
    let size = g.vertex_count() as u128 * m as u128;
    if size > vertex_cap as u128 {
        return Err(GraphError::TooManyVertices {
            size,
            cap: vertex_cap,
        });
    }
    let mm = m as u32;
    let mut edges = BTreeMap::new();
    for (u, v, w) in g.edges() {
        for i in 0..mm {
            for j in 0..mm {
                edges.insert((u * mm + i, v * mm + j), w);
            }
        }
    }
    let mut out = BipartiteGraph::from_edge_map(g.left * m, g.right * m, &edges);
    let n = g.vertex_count();
    out.supervertex = Some(
        (0..n as u32)
            .flat_map(|v| std::iter::repeat_n(v, m))
            .collect(),
    );
    out.labels = g.labels.as_ref().map(|l| {
        (0..n)
            .flat_map(|v| std::iter::repeat_n(l[v].clone(), m))
            .collect()
    });
    out.meta = GraphMeta {
        provenance: format!("{}-blowup of [{}]", m, g.meta.provenance),
        ..g.meta.clone()
    };
    Ok(out)
}

/// Edge-multiplicity-preserving union on a common vertex set.
pub fn union_multigraph(graphs: &[BipartiteGraph]) -> Result<BipartiteGraph, GraphError> {
    let first = graphs.first().ok_or(GraphError::EmptyUnion)?;
    let mut edges: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for g in graphs {
        if (g.left, g.right) != (first.left, first.right) {
            return Err(GraphError::VertexSetMismatch(
                format!("{}+{}", first.left, first.right),
                format!("{}+{}", g.left, g.right),
            ));
        }
        for (u, v, w) in g.edges() {
            *edges.entry((u, v)).or_insert(0) += w;
        }
    }
    let mut out = BipartiteGraph::from_edge_map(first.left, first.right, &edges);
    out.labels = first.labels.clone();
    out.meta = GraphMeta {
        provenance: format!("union of {} graphs", graphs.len()),
        ..first.meta.clone()
    };
    Ok(out)
}

/// Collapses multiplicities to 1. Returns the simple graph and the number of
/// surplus edge slots removed, `sum(mult - 1)`.
pub fn simplify(g: &BipartiteGraph) -> (BipartiteGraph, u64) {
    let surplus = g.edges().map(|(_, _, w)| (w - 1) as u64).sum();
    let mut out = g.clone();
    out.mult = None;
    (out, surplus)
}

/// A path in a blowup pushed down to the quotient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    /// Supervertex of every path vertex, in order.
    pub walk: Vec<u32>,
    /// `walk` with its cycles excised.
    pub reduced: Vec<u32>,
}

pub fn project_to_supergraph(g: &BipartiteGraph, path: &[u32]) -> Result<Projection, GraphError> {
    let sv = g.supervertex.as_ref().ok_or(GraphError::NoSupervertices)?;
    if path.is_empty() {
        return Err(GraphError::NotAPath("empty".into()));
    }
    let mut seen = BTreeSet::new();
    for &v in path {
        if v as usize >= g.vertex_count() {
            return Err(GraphError::VertexOutOfRange(v));
        }
        if !seen.insert(v) {
            return Err(GraphError::NotAPath(format!("vertex {v} repeats")));
        }
    }
    for pair in path.windows(2) {
        if !g.has_edge(pair[0], pair[1]) {
            return Err(GraphError::NotAPath(format!(
                "{} and {} are not adjacent",
                pair[0], pair[1]
            )));
        }
    }
    let walk: Vec<u32> = path.iter().map(|&v| sv[v as usize]).collect();
    let mut reduced: Vec<u32> = Vec::with_capacity(walk.len());
    for &s in &walk {
        match reduced.iter().position(|&r| r == s) {
            Some(pos) => reduced.truncate(pos + 1),
            None => reduced.push(s),
        }
    }
    Ok(Projection { walk, reduced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, even_cycle};

    #[test]
    fn removal_recounts() {
        let k33 = complete_bipartite(3, 3);
        let (g, report) = remove_bad_pairs(&k33, &[(0, 3)]);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!((g.left_count(), g.right_count()), (2, 2));
        // brute-force recount: edges of K33 not touching vertex 0 or 3
        let expected = k33.edges().filter(|&(u, v, _)| u != 0 && v != 3).count();
        assert_eq!(g.edge_count(), expected);
        assert_eq!(report.edges_removed, 9 - expected);
        assert_eq!(report.vertices_removed, 2);

        let (same, r) = remove_bad_pairs(&k33, &[]);
        assert_eq!(same, k33);
        assert_eq!(r.edges_removed, 0);

        let (g2, r2) = remove_bad_pairs(&k33, &[(0, 3), (0, 4)]);
        assert_eq!(r2.vertices_removed, 3);
        assert_eq!(g2.vertex_count(), 3);
        assert_eq!(g2.edge_count(), 2);
    }

    #[test]
    fn blowup_examples() {
        let edge = BipartiteGraph::from_edges(1, 1, [(0, 1)]).unwrap();
        let b = blowup(&edge, 3, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(b.edge_count(), 9);
        assert_eq!(b.left_count(), 3);
        assert_eq!(b.quotient().unwrap(), edge);

        let c6 = even_cycle(3);
        let b = blowup(&c6, 2, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(b.vertex_count(), 12);
        assert_eq!(b.edge_count(), 24);
        assert!(b.is_exact_blowup());
        assert_eq!(b.quotient().unwrap(), c6);

        let one = blowup(&c6, 1, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(one.supervertex_map().unwrap(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(
            one.edges().collect::<Vec<_>>(),
            c6.edges().collect::<Vec<_>>()
        );

        assert!(matches!(blowup(&c6, 0, 10), Err(GraphError::ZeroBlowup)));
        assert!(matches!(
            blowup(&c6, 5, 10),
            Err(GraphError::TooManyVertices { .. })
        ));
    }

    #[test]
    fn unions_and_simplification() {
        let c6 = even_cycle(3);
        let single = union_multigraph(std::slice::from_ref(&c6)).unwrap();
        assert!(!single.is_multigraph());
        assert_eq!(simplify(&single).1, 0);

        let doubled = union_multigraph(&[c6.clone(), c6.clone()]).unwrap();
        assert!(doubled.edges().all(|e| e.2 == 2));
        let (simple, surplus) = simplify(&doubled);
        assert_eq!(surplus, c6.edge_count() as u64);
        assert_eq!(simple.edge_count(), c6.edge_count());
        assert!(!simple.is_multigraph());

        let k23 = complete_bipartite(2, 3);
        assert!(union_multigraph(&[c6, k23]).is_err());
        assert!(union_multigraph(&[]).is_err());
    }

    #[test]
    fn projection() {
        // path graph a - b - c - d as a bipartite graph: left {a, c} = {0, 1}, right {b, d} = {2, 3}
        let p4 = BipartiteGraph::from_edges(2, 2, [(0, 2), (1, 2), (1, 3)]).unwrap();
        let b = blowup(&p4, 2, 100).unwrap();
        // copies: v*2 + i
        let straight = [0, 4, 2, 6];
        let proj = project_to_supergraph(&b, &straight).unwrap();
        assert_eq!(proj.walk, vec![0, 2, 1, 3]);
        assert_eq!(proj.reduced, proj.walk);

        // a0 - b0 - a1 - b1 visits two copies of a and of b
        let folded = [0, 4, 1, 5];
        let proj = project_to_supergraph(&b, &folded).unwrap();
        assert_eq!(proj.walk, vec![0, 2, 0, 2]);
        assert_eq!(proj.reduced, vec![0, 2]);
        assert!(proj.reduced.len() < folded.len());
        assert_eq!((proj.reduced.len() - 1) % 2, (folded.len() - 1) % 2);

        assert!(project_to_supergraph(&b, &[0, 1]).is_err());
        assert!(project_to_supergraph(&b, &[0, 4, 0]).is_err());
        assert!(project_to_supergraph(&p4, &[0, 2]).is_err());
    }
}
