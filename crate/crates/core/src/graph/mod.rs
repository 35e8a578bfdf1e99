//! Bipartite (multi)graphs and the combinatorial operations the constructions
//! need: simple-path counting, bad pairs, vertex deletion, blowups, unions and
//! quotient projection.

mod edgelist;
mod ops;
mod paths;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use edgelist::{
    parse_edge_list, read_edge_list, write_edge_list, EdgeListHeader, ParsedEdgeList,
};
pub use ops::{
    blowup, project_to_supergraph, remove_bad_pairs, simplify, union_multigraph, Projection,
    RemovalReport, DEFAULT_VERTEX_CAP,
};
pub use paths::{
    count_paths_upto, enumerate_paths_upto, find_bad_pairs, find_bad_pairs_sampled,
    path_counts_from, BadPairScan, PairScope,
};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
    #[error("edge ({0}, {1}) does not join the two sides")]
    NotCrossing(u32, u32),
    #[error("edge multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("path length bound must be at least 1")]
    ZeroLength,
    #[error("endpoints coincide")]
    SameEndpoints,
    #[error("graphs have different vertex sets ({0} vs {1})")]
    VertexSetMismatch(String, String),
    #[error("union of zero graphs")]
    EmptyUnion,
    #[error("blowup factor must be at least 1")]
    ZeroBlowup,
    #[error("result would have {size} vertices, above the cap of {cap}")]
    TooManyVertices { size: u128, cap: usize },
    #[error("graph has no supervertex map")]
    NoSupervertices,
    #[error("not a path: {0}")]
    NotAPath(String),
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Read-only adjacency view shared by the path, theta and exploration code.
pub trait Host: Sync {
    fn vertex_count(&self) -> usize;

    /// Sorted, duplicate-free neighbor list.
    fn neighbors(&self, v: u32) -> &[u32];

    /// Edge multiplicities parallel to `neighbors(v)`, if the host is a multigraph.
    fn weights(&self, _v: u32) -> Option<&[u32]> {
        None
    }

    /// Side of `v` when the host carries a bipartition.
    fn side(&self, _v: u32) -> Option<Side> {
        None
    }

    fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    fn edge_count(&self) -> usize {
        (0..self.vertex_count() as u32)
            .map(|v| self.degree(v))
            .sum::<usize>()
            / 2
    }
}

/// Provenance carried along with a graph into reports and edge-list headers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub ell: Option<u32>,
    pub q: Option<u32>,
    pub seed: Option<u64>,
    pub provenance: String,
}

/// Bipartite multigraph on dense ids: `0..left` is the left side, the rest is
/// the right side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    adj: Vec<Vec<u32>>,
    mult: Option<Vec<Vec<u32>>>,
    labels: Option<Vec<Vec<u32>>>,
    supervertex: Option<Vec<u32>>,
    pub meta: GraphMeta,
}

impl BipartiteGraph {
    pub fn empty(left: usize, right: usize) -> Self {
        BipartiteGraph {
            left,
            right,
            adj: vec![Vec::new(); left + right],
            mult: None,
            labels: None,
            supervertex: None,
            meta: GraphMeta::default(),
        }
    }

    /// Edges are `(u, v)` global ids with `u` on the left and `v` on the right
    /// (either order accepted). Repeated edges are merged into one simple edge.
    pub fn from_edges(
        left: usize,
        right: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(left, right);
        for (a, b) in edges {
            let (u, v) = g.orient(a, b)?;
            g.adj[u as usize].push(v);
            g.adj[v as usize].push(u);
        }
        for list in &mut g.adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(g)
    }

    /// Repeated `(u, v)` entries add up their multiplicities.
    pub fn from_weighted_edges(
        left: usize,
        right: usize,
        edges: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<Self, GraphError> {
        let mut acc: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let probe = Self::empty(left, right);
        for (a, b, w) in edges {
            if w == 0 {
                return Err(GraphError::ZeroMultiplicity);
            }
            let key = probe.orient(a, b)?;
            *acc.entry(key).or_insert(0) += w;
        }
        Ok(Self::from_edge_map(left, right, &acc))
    }

    pub(crate) fn from_edge_map(
        left: usize,
        right: usize,
        edges: &BTreeMap<(u32, u32), u32>,
    ) -> Self {
        let mut g = Self::empty(left, right);
        let multi = edges.values().any(|&w| w > 1);
        let mut mult = vec![Vec::new(); left + right];
        // BTreeMap order keeps every left list sorted; right lists get sorted below.
        for (&(u, v), &w) in edges {
            g.adj[u as usize].push(v);
            g.adj[v as usize].push(u);
            mult[u as usize].push(w);
            mult[v as usize].push(w);
        }
        for v in left..left + right {
            let mut pairs: Vec<(u32, u32)> = g.adj[v]
                .iter()
                .copied()
                .zip(mult[v].iter().copied())
                .collect();
            pairs.sort_unstable();
            g.adj[v] = pairs.iter().map(|p| p.0).collect();
            mult[v] = pairs.iter().map(|p| p.1).collect();
        }
        if multi {
            g.mult = Some(mult);
        }
        g
    }

    fn orient(&self, a: u32, b: u32) -> Result<(u32, u32), GraphError> {
        let n = self.vertex_count() as u32;
        for x in [a, b] {
            if x >= n {
                return Err(GraphError::VertexOutOfRange(x));
            }
        }
        let left = self.left as u32;
        match (a < left, b < left) {
            (true, false) => Ok((a, b)),
            (false, true) => Ok((b, a)),
            _ => Err(GraphError::NotCrossing(a, b)),
        }
    }

    pub fn left_count(&self) -> usize {
        self.left
    }

    pub fn right_count(&self) -> usize {
        self.right
    }

    pub fn is_left(&self, v: u32) -> bool {
        (v as usize) < self.left
    }

    pub fn labels(&self) -> Option<&[Vec<u32>]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Vec<Vec<u32>>) {
        assert_eq!(labels.len(), self.vertex_count());
        self.labels = Some(labels);
    }

    pub fn supervertex_map(&self) -> Option<&[u32]> {
        self.supervertex.as_deref()
    }

    pub fn supervertex(&self, v: u32) -> Option<u32> {
        self.supervertex.as_ref().map(|s| s[v as usize])
    }

    pub fn is_multigraph(&self) -> bool {
        self.mult.is_some()
    }

    /// Multiplicity of edge `uv` (0 if absent).
    pub fn multiplicity(&self, u: u32, v: u32) -> u32 {
        match self.adj[u as usize].binary_search(&v) {
            Ok(i) => self.mult.as_ref().map_or(1, |m| m[u as usize][i]),
            Err(_) => 0,
        }
    }

    /// Each edge once as `(left, right, multiplicity)`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.left as u32).flat_map(move |u| {
            self.adj[u as usize]
                .iter()
                .enumerate()
                .map(move |(i, &v)| (u, v, self.mult.as_ref().map_or(1, |m| m[u as usize][i])))
        })
    }

    /// Sum of multiplicities.
    pub fn total_multiplicity(&self) -> u64 {
        self.edges().map(|e| e.2 as u64).sum()
    }

    pub fn multiplicity_histogram(&self) -> BTreeMap<u32, u64> {
        let mut hist = BTreeMap::new();
        for (_, _, w) in self.edges() {
            *hist.entry(w).or_insert(0) += 1;
        }
        hist
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn report(&self) -> GraphReport {
        GraphReport {
            left: self.left,
            right: self.right,
            edges: self.edge_count(),
            total_multiplicity: self.total_multiplicity(),
            multiplicity_histogram: self.multiplicity_histogram(),
            meta: self.meta.clone(),
        }
    }
}

impl Host for BipartiteGraph {
    fn vertex_count(&self) -> usize {
        self.left + self.right
    }

    fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    fn weights(&self, v: u32) -> Option<&[u32]> {
        self.mult.as_ref().map(|m| m[v as usize].as_slice())
    }

    fn side(&self, v: u32) -> Option<Side> {
        Some(if self.is_left(v) {
            Side::Left
        } else {
            Side::Right
        })
    }
}

/// Summary written next to every generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub left: usize,
    pub right: usize,
    pub edges: usize,
    pub total_multiplicity: u64,
    pub multiplicity_histogram: BTreeMap<u32, u64>,
    pub meta: GraphMeta,
}

/// Simple undirected graph without a designated bipartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<u32>>,
}

impl SimpleGraph {
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            for x in [a, b] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange(x));
                }
            }
            if a == b {
                return Err(GraphError::SameEndpoints);
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(SimpleGraph { adj })
    }

    pub fn from_host<H: Host + ?Sized>(host: &H) -> Self {
        SimpleGraph {
            adj: (0..host.vertex_count() as u32)
                .map(|v| host.neighbors(v).to_vec())
                .collect(),
        }
    }

    /// Adds an edge, keeping neighbor lists sorted. Returns false if present.
    pub fn add_edge(&mut self, a: u32, b: u32) -> bool {
        if a == b || self.has_edge(a, b) {
            return false;
        }
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adj[x as usize];
            let pos = list.binary_search(&y).unwrap_err();
            list.insert(pos, y);
        }
        true
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&v| v > u as u32)
                .map(move |&v| (u as u32, v))
        })
    }

    /// Two-coloring by BFS, `None` if some component has an odd cycle.
    pub fn bipartition(&self) -> Option<Vec<Side>> {
        let n = self.adj.len();
        let mut color: Vec<Option<Side>> = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(Side::Left);
            queue.push_back(start as u32);
            while let Some(u) = queue.pop_front() {
                let cu = color[u as usize].unwrap();
                let other = if cu == Side::Left {
                    Side::Right
                } else {
                    Side::Left
                };
                for &v in &self.adj[u as usize] {
                    match color[v as usize] {
                        None => {
                            color[v as usize] = Some(other);
                            queue.push_back(v);
                        }
                        Some(c) if c == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(Option::unwrap).collect())
    }

    /// Induced subgraph on `keep`, relabelled densely in increasing id order.
    /// Returns the new graph and the old id of every new vertex.
    pub fn induced(&self, keep: &[bool]) -> (SimpleGraph, Vec<u32>) {
        let mut new_id = vec![u32::MAX; self.adj.len()];
        let mut old = Vec::new();
        for (v, &k) in keep.iter().enumerate() {
            if k {
                new_id[v] = old.len() as u32;
                old.push(v as u32);
            }
        }
        let adj = old
            .iter()
            .map(|&v| {
                self.adj[v as usize]
                    .iter()
                    .filter(|&&w| keep[w as usize])
                    .map(|&w| new_id[w as usize])
                    .collect()
            })
            .collect();
        (SimpleGraph { adj }, old)
    }
}

impl Host for SimpleGraph {
    fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }
}

/// A simple graph with a fixed two-coloring, as handed to the explorer.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    pub graph: SimpleGraph,
    pub sides: Vec<Side>,
}

impl ColoredGraph {
    pub fn new(graph: SimpleGraph) -> Option<Self> {
        let sides = graph.bipartition()?;
        Some(ColoredGraph { graph, sides })
    }
}

impl Host for ColoredGraph {
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn neighbors(&self, v: u32) -> &[u32] {
        self.graph.neighbors(v)
    }

    fn side(&self, v: u32) -> Option<Side> {
        Some(self.sides[v as usize])
    }
}

/// Complete bipartite graph `K_{a,b}`.
pub fn complete_bipartite(a: usize, b: usize) -> BipartiteGraph {
    let edges = (0..a as u32).flat_map(|u| (0..b as u32).map(move |v| (u, a as u32 + v)));
    BipartiteGraph::from_edges(a, b, edges).expect("complete bipartite edges are valid")
}

/// Even cycle `C_{2k}` as a bipartite graph; vertex `i` of the cycle is left
/// iff `i` is even.
pub fn even_cycle(k: usize) -> BipartiteGraph {
    let id = |i: usize| -> u32 {
        let i = i % (2 * k);
        if i.is_multiple_of(2) {
            (i / 2) as u32
        } else {
            (k + i / 2) as u32
        }
    };
    BipartiteGraph::from_edges(k, k, (0..2 * k).map(|i| (id(i), id(i + 1))))
        .expect("cycle edges are valid")
}
