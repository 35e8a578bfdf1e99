//! Exact detection of theta graphs `Θ_{ℓ,t}`: two endpoints joined by `t`
//! internally disjoint paths of exactly `ℓ` edges.
//!
//! For each admissible endpoint pair the simple `x`-`y` paths of length `ℓ`
//! become candidates, two candidates conflict when they share an internal
//! vertex, and the largest conflict-free set is found by branch and bound.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Host};

pub const DEFAULT_CANDIDATE_CAP: usize = 100_000;
pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

/// Size limits of [`brute_force_theta_oracle`].
pub const ORACLE_MAX_VERTICES: usize = 12;
pub const ORACLE_MAX_CANDIDATES: usize = 20;

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error("pair ({x}, {y}) has {count} candidate paths, above the cap of {cap}")]
    TooManyCandidates {
        x: u32,
        y: u32,
        count: usize,
        cap: usize,
    },
    #[error("path length must be at least 1")]
    ZeroLength,
    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Two vertices and the internally disjoint paths joining them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaWitness {
    pub x: u32,
    pub y: u32,
    pub paths: Vec<Vec<u32>>,
}

impl ThetaWitness {
    /// Checks the witness against `host` without reusing any detector code.
    pub fn validate<H: Host + ?Sized>(&self, host: &H, ell: usize, t: usize) -> Result<(), String> {
        if self.x == self.y {
            return Err("endpoints coincide".into());
        }
        if self.paths.len() < t {
            return Err(format!("{} paths, need {t}", self.paths.len()));
        }
        let n = host.vertex_count() as u32;
        let mut used = BTreeSet::new();
        for (i, path) in self.paths.iter().enumerate() {
            if path.len() != ell + 1 {
                return Err(format!(
                    "path {i} has {} edges, need {ell}",
                    path.len().saturating_sub(1)
                ));
            }
            if path[0] != self.x || path[ell] != self.y {
                return Err(format!("path {i} does not join {} and {}", self.x, self.y));
            }
            if let Some(&v) = path.iter().find(|&&v| v >= n) {
                return Err(format!("vertex {v} out of range"));
            }
            for pair in path.windows(2) {
                if !host.neighbors(pair[0]).contains(&pair[1]) {
                    return Err(format!(
                        "path {i}: {} and {} are not adjacent",
                        pair[0], pair[1]
                    ));
                }
            }
            let distinct: BTreeSet<u32> = path.iter().copied().collect();
            if distinct.len() != path.len() {
                return Err(format!("path {i} repeats a vertex"));
            }
            for &v in &path[1..ell] {
                if !used.insert(v) {
                    return Err(format!("internal vertex {v} is shared"));
                }
            }
        }
        Ok(())
    }
}

/// Candidate paths for one endpoint pair and their conflict relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingInstance {
    pub x: u32,
    pub y: u32,
    pub ell: usize,
    pub paths: Vec<Vec<u32>>,
    /// `conflicts[i]`: sorted indices of candidates sharing an internal
    /// vertex with candidate `i` (never `i` itself).
    pub conflicts: Vec<Vec<u32>>,
}

impl PackingInstance {
    pub fn internal(&self, i: usize) -> &[u32] {
        &self.paths[i][1..self.ell]
    }
}

/// True when bipartite parity allows an `x`-`y` path with `ell` edges.
fn parity_admits<H: Host + ?Sized>(g: &H, x: u32, y: u32, ell: usize) -> bool {
    match (g.side(x), g.side(y)) {
        (Some(a), Some(b)) => (a != b) == (ell % 2 == 1),
        _ => true,
    }
}

fn exact_paths_rec<H: Host + ?Sized>(
    g: &H,
    path: &mut Vec<u32>,
    on_path: &mut [bool],
    y: u32,
    ell: usize,
    out: &mut Vec<Vec<u32>>,
    cap: usize,
) -> bool {
    let v = *path.last().unwrap();
    if path.len() == ell + 1 {
        if v == y {
            out.push(path.clone());
        }
        return out.len() <= cap;
    }
    if v == y {
        return true;
    }
    let last_step = path.len() == ell;
    for &w in g.neighbors(v) {
        if on_path[w as usize] || (last_step && w != y) {
            continue;
        }
        on_path[w as usize] = true;
        path.push(w);
        let ok = exact_paths_rec(g, path, on_path, y, ell, out, cap);
        path.pop();
        on_path[w as usize] = false;
        if !ok {
            return false;
        }
    }
    true
}

/// All simple `x`-`y` paths with exactly `ell` edges.
pub fn enumerate_exact_paths<H: Host + ?Sized>(
    g: &H,
    x: u32,
    y: u32,
    ell: usize,
    cap: usize,
) -> Result<PackingInstance, ThetaError> {
    if ell == 0 {
        return Err(ThetaError::ZeroLength);
    }
    if x == y {
        return Err(GraphError::SameEndpoints.into());
    }
    let n = g.vertex_count() as u32;
    for v in [x, y] {
        if v >= n {
            return Err(GraphError::VertexOutOfRange(v).into());
        }
    }
    let mut paths = Vec::new();
    if parity_admits(g, x, y, ell) {
        let mut on_path = vec![false; n as usize];
        on_path[x as usize] = true;
        if !exact_paths_rec(g, &mut vec![x], &mut on_path, y, ell, &mut paths, cap) {
            return Err(ThetaError::TooManyCandidates {
                x,
                y,
                count: paths.len(),
                cap,
            });
        }
    }
    let mut through: HashMap<u32, Vec<u32>> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        for &v in &p[1..ell] {
            through.entry(v).or_default().push(i as u32);
        }
    }
    let mut conflicts: Vec<Vec<u32>> = vec![Vec::new(); paths.len()];
    for list in through.values() {
        for &a in list {
            conflicts[a as usize].extend(list.iter().copied().filter(|&b| b != a));
        }
    }
    for c in &mut conflicts {
        c.sort_unstable();
        c.dedup();
    }
    Ok(PackingInstance {
        x,
        y,
        ell,
        paths,
        conflicts,
    })
}

/// Outcome of the packing search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    /// Indices of the chosen candidates.
    pub chosen: Vec<usize>,
    /// False when the node budget ran out; `chosen` is then only a lower bound.
    pub exact: bool,
    pub nodes: u64,
}

impl Packing {
    pub fn size(&self) -> usize {
        self.chosen.len()
    }
}

struct Solver<'a> {
    /// Internal vertices of every candidate, renumbered to `0..k`.
    internal: Vec<Vec<u32>>,
    positions: usize,
    vertex_count: usize,
    inst: &'a PackingInstance,
    best: Vec<usize>,
    current: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
    mark: Vec<bool>,
}

impl Solver<'_> {
    /// Each position along the path needs a distinct vertex per chosen path,
    /// so the number of distinct vertices at any position bounds the packing.
    fn upper_bound(&mut self, remaining: &[usize]) -> usize {
        let mut bound = remaining.len();
        if self.positions == 0 {
            return bound.min(1);
        }
        for pos in 0..self.positions {
            let mut distinct = 0;
            for &i in remaining {
                let v = self.internal[i][pos] as usize;
                if !self.mark[v] {
                    self.mark[v] = true;
                    distinct += 1;
                }
            }
            for &i in remaining {
                self.mark[self.internal[i][pos] as usize] = false;
            }
            bound = bound.min(distinct);
        }
        bound
    }

    fn disjoint_from(&mut self, chosen: usize, remaining: &[usize]) -> Vec<usize> {
        for &v in &self.internal[chosen] {
            self.mark[v as usize] = true;
        }
        let out = remaining
            .iter()
            .copied()
            .filter(|&i| i != chosen && self.internal[i].iter().all(|&v| !self.mark[v as usize]))
            .collect();
        for &v in &self.internal[chosen] {
            self.mark[v as usize] = false;
        }
        out
    }

    fn search(&mut self, remaining: Vec<usize>) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if remaining.is_empty() {
            return;
        }
        if self.positions == 0 {
            // length-1 paths have no internal vertices and never conflict
            if self.current.len() + remaining.len() > self.best.len() {
                self.best = self.current.iter().chain(&remaining).copied().collect();
            }
            return;
        }
        if self.current.len() + self.upper_bound(&remaining) <= self.best.len() {
            return;
        }

        // branch on the internal vertex carried by the fewest candidates
        let mut load = vec![0u32; self.vertex_count];
        for &i in &remaining {
            for &v in &self.internal[i] {
                load[v as usize] += 1;
            }
        }
        let pivot = remaining
            .iter()
            .flat_map(|&i| self.internal[i].iter().copied())
            .min_by_key(|&v| (load[v as usize], v))
            .expect("remaining candidates have internal vertices");

        let mut through: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| self.internal[i].contains(&pivot))
            .collect();
        through.sort_by_key(|&i| (self.inst.conflicts[i].len(), i));
        for &p in &through {
            let next = self.disjoint_from(p, &remaining);
            self.current.push(p);
            self.search(next);
            self.current.pop();
            if self.aborted {
                return;
            }
        }
        let without: Vec<usize> = remaining
            .into_iter()
            .filter(|&i| !self.internal[i].contains(&pivot))
            .collect();
        self.search(without);
    }
}

/// Maximum set of pairwise internally disjoint candidates.
pub fn max_disjoint_packing(instance: &PackingInstance, node_budget: u64) -> Packing {
    let positions = instance.ell.saturating_sub(1);
    let mut local: HashMap<u32, u32> = HashMap::new();
    let internal: Vec<Vec<u32>> = (0..instance.paths.len())
        .map(|i| {
            instance
                .internal(i)
                .iter()
                .map(|v| {
                    let next = local.len() as u32;
                    *local.entry(*v).or_insert(next)
                })
                .collect()
        })
        .collect();

    // greedy seed: fewest conflicts first
    let mut order: Vec<usize> = (0..instance.paths.len()).collect();
    order.sort_by_key(|&i| (instance.conflicts[i].len(), i));
    let mut taken = vec![false; local.len()];
    let mut greedy = Vec::new();
    for i in order {
        if internal[i].iter().all(|&v| !taken[v as usize]) {
            for &v in &internal[i] {
                taken[v as usize] = true;
            }
            greedy.push(i);
        }
    }

    let vertex_count = local.len();
    let mut solver = Solver {
        internal,
        positions,
        vertex_count,
        inst: instance,
        best: greedy,
        current: Vec::new(),
        nodes: 0,
        budget: node_budget,
        aborted: false,
        mark: vec![false; vertex_count],
    };
    solver.search((0..instance.paths.len()).collect());
    let mut chosen = solver.best;
    chosen.sort_unstable();
    Packing {
        chosen,
        exact: !solver.aborted,
        nodes: solver.nodes,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThetaOptions {
    pub candidate_cap: usize,
    pub node_budget: u64,
    /// Stop scanning once a witness is found.
    pub stop_at_witness: bool,
    /// Also solve pairs with fewer than `t` candidates, so the histogram is
    /// complete.
    pub full_histogram: bool,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
            stop_at_witness: true,
            full_histogram: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Contains,
    Free,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconclusivePair {
    pub x: u32,
    pub y: u32,
    pub reason: String,
    /// Verified lower bound on the packing number, if the search started.
    pub lower_bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairMaximum {
    pub x: u32,
    pub y: u32,
    pub candidates: usize,
    pub packing: usize,
}

/// Result of a full scan: a witness, or per-pair maxima proving freeness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    pub ell: usize,
    pub t: usize,
    pub verdict: Verdict,
    pub witness: Option<ThetaWitness>,
    pub admissible_pairs: u64,
    pub pairs_solved: u64,
    /// Packing number -> number of pairs attaining it (pairs with no
    /// candidate count under 0).
    pub packing_histogram: BTreeMap<usize, u64>,
    /// Per-pair maxima for pairs with at least one candidate, in pair order.
    pub pair_maxima: Vec<PairMaximum>,
    pub max_packing: usize,
    /// True when every admissible pair was solved exactly.
    pub exact: bool,
    pub inconclusive: Vec<InconclusivePair>,
}

enum PairOutcome {
    Skipped,
    Solved {
        candidates: usize,
        packing: Packing,
        witness: Option<ThetaWitness>,
    },
    Bounded {
        candidates: usize,
    },
    Failed(InconclusivePair),
}

/// Number of simple paths with exactly `ell` edges from `x` to every vertex.
fn exact_counts_from<H: Host + ?Sized>(g: &H, x: u32, ell: usize) -> Vec<u64> {
    fn rec<H: Host + ?Sized>(
        g: &H,
        v: u32,
        depth: usize,
        ell: usize,
        on_path: &mut [bool],
        counts: &mut [u64],
    ) {
        if depth == ell {
            counts[v as usize] += 1;
            return;
        }
        for &w in g.neighbors(v) {
            if !on_path[w as usize] {
                on_path[w as usize] = true;
                rec(g, w, depth + 1, ell, on_path, counts);
                on_path[w as usize] = false;
            }
        }
    }
    let n = g.vertex_count();
    let mut counts = vec![0u64; n];
    let mut on_path = vec![false; n];
    on_path[x as usize] = true;
    rec(g, x, 0, ell, &mut on_path, &mut counts);
    counts
}

/// Scans every parity-admissible pair for `t` internally disjoint paths of
/// length `ell`. Pairs are visited in descending order of candidate count.
pub fn contains_theta<H: Host + ?Sized>(
    g: &H,
    ell: usize,
    t: usize,
    opts: &ThetaOptions,
) -> Result<ThetaCertificate, ThetaError> {
    if ell == 0 {
        return Err(ThetaError::ZeroLength);
    }
    let n = g.vertex_count() as u32;
    // per source: pairs with candidate paths, with their path counts, and
    // the number of admissible pairs
    type SourceScan = (Vec<(u32, u32, u64)>, u64);
    let per_source: Vec<SourceScan> = (0..n)
        .into_par_iter()
        .map(|x| {
            let counts = exact_counts_from(g, x, ell);
            let mut hits = Vec::new();
            let mut admissible = 0u64;
            for y in x + 1..n {
                if !parity_admits(g, x, y, ell) {
                    continue;
                }
                admissible += 1;
                if counts[y as usize] > 0 {
                    hits.push((x, y, counts[y as usize]));
                }
            }
            (hits, admissible)
        })
        .collect();
    let admissible_pairs: u64 = per_source.iter().map(|p| p.1).sum();
    let mut pairs: Vec<(u32, u32, u64)> = per_source.into_iter().flat_map(|p| p.0).collect();
    pairs.sort_by(|a, b| b.2.cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));

    let first_hit = AtomicUsize::new(usize::MAX);
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(x, y, count))| {
            if opts.stop_at_witness && idx > first_hit.load(Ordering::Relaxed) {
                return PairOutcome::Skipped;
            }
            if (count as usize) < t && !opts.full_histogram {
                return PairOutcome::Bounded {
                    candidates: count as usize,
                };
            }
            let inst = match enumerate_exact_paths(g, x, y, ell, opts.candidate_cap) {
                Ok(inst) => inst,
                Err(e) => {
                    return PairOutcome::Failed(InconclusivePair {
                        x,
                        y,
                        reason: e.to_string(),
                        lower_bound: None,
                    })
                }
            };
            let packing = max_disjoint_packing(&inst, opts.node_budget);
            let witness = (packing.size() >= t).then(|| ThetaWitness {
                x,
                y,
                paths: packing
                    .chosen
                    .iter()
                    .take(t)
                    .map(|&i| inst.paths[i].clone())
                    .collect(),
            });
            if witness.is_some() {
                first_hit.fetch_min(idx, Ordering::Relaxed);
            } else if !packing.exact {
                return PairOutcome::Failed(InconclusivePair {
                    x,
                    y,
                    reason: format!("node budget of {} exhausted", opts.node_budget),
                    lower_bound: Some(packing.size()),
                });
            }
            PairOutcome::Solved {
                candidates: inst.paths.len(),
                packing,
                witness,
            }
        })
        .collect();

    let mut cert = ThetaCertificate {
        ell,
        t,
        verdict: Verdict::Free,
        witness: None,
        admissible_pairs,
        pairs_solved: 0,
        packing_histogram: BTreeMap::new(),
        pair_maxima: Vec::new(),
        max_packing: 0,
        exact: true,
        inconclusive: Vec::new(),
    };
    let zero_pairs = admissible_pairs - pairs.len() as u64;
    if zero_pairs > 0 {
        cert.packing_histogram.insert(0, zero_pairs);
    }
    for ((x, y, _), outcome) in pairs.iter().zip(outcomes) {
        match outcome {
            PairOutcome::Skipped => cert.exact = false,
            PairOutcome::Bounded { candidates } => {
                cert.exact = false;
                cert.pair_maxima.push(PairMaximum {
                    x: *x,
                    y: *y,
                    candidates,
                    packing: candidates,
                });
            }
            PairOutcome::Failed(info) => {
                cert.exact = false;
                cert.inconclusive.push(info);
            }
            PairOutcome::Solved {
                candidates,
                packing,
                witness,
            } => {
                cert.pairs_solved += 1;
                *cert.packing_histogram.entry(packing.size()).or_insert(0) += 1;
                cert.max_packing = cert.max_packing.max(packing.size());
                cert.pair_maxima.push(PairMaximum {
                    x: *x,
                    y: *y,
                    candidates,
                    packing: packing.size(),
                });
                if cert.witness.is_none() {
                    cert.witness = witness;
                }
            }
        }
    }
    cert.pair_maxima.sort_by_key(|p| (p.x, p.y));
    cert.verdict = if cert.witness.is_some() {
        Verdict::Contains
    } else if cert.inconclusive.is_empty() {
        Verdict::Free
    } else {
        Verdict::Inconclusive
    };
    // pairs skipped as Bounded have fewer than t candidates, so a Free verdict
    // stays sound even when `exact` is false
    Ok(cert)
}

/// Per-pair maxima from the exhaustive oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    /// Packing number of every pair `x < y` with at least one candidate.
    pub pair_max: BTreeMap<(u32, u32), usize>,
    pub witness: Option<ThetaWitness>,
}

/// Exhaustive reference: candidate paths by enumerating vertex sequences and
/// packings by checking every subset of candidates. Only for tiny graphs.
pub fn brute_force_theta_oracle<H: Host + ?Sized>(
    g: &H,
    ell: usize,
    t: usize,
) -> Result<OracleOutcome, ThetaError> {
    let n = g.vertex_count();
    if n > ORACLE_MAX_VERTICES {
        return Err(ThetaError::OracleLimit(format!("{n} vertices")));
    }
    if ell == 0 {
        return Err(ThetaError::ZeroLength);
    }
    let adjacent = |a: u32, b: u32| g.neighbors(a).contains(&b);
    let mut pair_max = BTreeMap::new();
    let mut witness = None;
    for x in 0..n as u32 {
        for y in x + 1..n as u32 {
            // every sequence x, v_1, .., v_{ell-1}, y over the vertex set
            let mut candidates: Vec<(Vec<u32>, u64)> = Vec::new();
            let inner = ell - 1;
            let total = (n as u64).pow(inner as u32);
            for code in 0..total {
                let mut seq = vec![x];
                let mut c = code;
                for _ in 0..inner {
                    seq.push((c % n as u64) as u32);
                    c /= n as u64;
                }
                seq.push(y);
                let distinct: BTreeSet<u32> = seq.iter().copied().collect();
                if distinct.len() != seq.len() || !seq.windows(2).all(|w| adjacent(w[0], w[1])) {
                    continue;
                }
                let mask = seq[1..ell].iter().fold(0u64, |m, &v| m | 1 << v);
                candidates.push((seq, mask));
            }
            if candidates.is_empty() {
                continue;
            }
            if candidates.len() > ORACLE_MAX_CANDIDATES {
                return Err(ThetaError::OracleLimit(format!(
                    "pair ({x}, {y}) has {} candidates",
                    candidates.len()
                )));
            }
            let mut best = 0u32;
            let mut best_set = 0u32;
            for subset in 0u32..(1 << candidates.len()) {
                if subset.count_ones() <= best {
                    continue;
                }
                let mut union = 0u64;
                let mut ok = true;
                for (i, (_, mask)) in candidates.iter().enumerate() {
                    if subset >> i & 1 == 1 {
                        if union & mask != 0 {
                            ok = false;
                            break;
                        }
                        union |= mask;
                    }
                }
                if ok {
                    best = subset.count_ones();
                    best_set = subset;
                }
            }
            pair_max.insert((x, y), best as usize);
            if witness.is_none() && best as usize >= t {
                witness = Some(ThetaWitness {
                    x,
                    y,
                    paths: (0..candidates.len())
                        .filter(|i| best_set >> i & 1 == 1)
                        .take(t)
                        .map(|i| candidates[i].0.clone())
                        .collect(),
                });
            }
        }
    }
    Ok(OracleOutcome { pair_max, witness })
}

/// The graph Θ_{ℓ,t} itself: endpoints 0 and 1, then
/// the internal vertices of each path in order.
pub fn theta_graph(ell: usize, t: usize) -> crate::graph::SimpleGraph {
    let mut edges = Vec::new();
    let mut next = 2u32;
    for _ in 0..t {
        let mut prev = 0u32;
        for _ in 0..ell - 1 {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    crate::graph::SimpleGraph::from_edges(next as usize, edges).expect("theta edges are valid")
}
