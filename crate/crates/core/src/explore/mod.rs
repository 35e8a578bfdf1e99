//! Layered exploration of a bipartite host from a root vertex, with bad-set
//! bookkeeping, property checks at every stage and embedding attempts that
//! turn an excess of linear paths into an explicit theta subgraph.
//!
//! At stage `k` the explored part consists of layers `L_0 = {r}, .., L_k` and
//! bad sets `B_1, .., B_{k-1}`; every other vertex of the root's component is
//! unexplored. A linear path visits consecutive layers, and `P(v, w)` counts
//! linear paths from `v` to `w`.

pub mod constants;
mod embed;
pub mod regularize;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Host, SimpleGraph};
use crate::theta::ThetaWitness;

pub use constants::{catalan, r_m, Constants};
pub use embed::{embed_theta, EmbedOutcome, EmbedReport, EMBED_PATH_CAP};
pub use regularize::{max_cut_sides, regularize_degrees, RegularizeReport, Regularized};

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("host graph is not bipartite")]
    NotBipartite,
    #[error("host graph has no vertices")]
    Empty,
    #[error("root {0} is out of range")]
    RootOutOfRange(u32),
    #[error("need ell >= 2 and t >= 2, got ell={ell}, t={t}")]
    BadParams { ell: usize, t: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Not in the root's connected component.
    Outside,
    Unexplored,
    Layer(usize),
    Bad(usize),
}

/// Outcome of a property check that may not apply at this scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Holds,
    Fails,
    /// The bound is non-positive or otherwise carries no information.
    Vacuous,
}

impl Check {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Check::Holds
        } else {
            Check::Fails
        }
    }
}

/// Decimal rendering of big integers in reports.
fn dec(x: &BigUint) -> String {
    x.to_string()
}

#[derive(Debug, Clone)]
pub struct ExplorationState<'g, H: Host + ?Sized> {
    host: &'g H,
    root: u32,
    /// Minimum degree `d` assumed by the thresholds.
    d: u64,
    layers: Vec<Vec<u32>>,
    /// `bad[j]` is `B_j`; `bad[0]` is always empty.
    bad: Vec<Vec<u32>>,
    status: Vec<Status>,
}

impl<'g, H: Host + ?Sized> ExplorationState<'g, H> {
    /// Stage 0: `L_0 = {root}`, the rest of the root's component unexplored.
    pub fn new(host: &'g H, root: u32, d: u64) -> Result<Self, ExploreError> {
        let n = host.vertex_count();
        if root as usize >= n {
            return Err(ExploreError::RootOutOfRange(root));
        }
        let mut status = vec![Status::Outside; n];
        let mut stack = vec![root];
        status[root as usize] = Status::Unexplored;
        while let Some(v) = stack.pop() {
            for &w in host.neighbors(v) {
                if status[w as usize] == Status::Outside {
                    status[w as usize] = Status::Unexplored;
                    stack.push(w);
                }
            }
        }
        status[root as usize] = Status::Layer(0);
        Ok(ExplorationState {
            host,
            root,
            d,
            layers: vec![vec![root]],
            bad: vec![Vec::new()],
            status,
        })
    }

    pub fn host(&self) -> &'g H {
        self.host
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// Current stage `k`.
    pub fn stage(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layers(&self) -> &[Vec<u32>] {
        &self.layers
    }

    /// `B_1 .. B_{k-1}`, indexed from 1.
    pub fn bad_sets(&self) -> &[Vec<u32>] {
        &self.bad
    }

    pub fn status(&self, v: u32) -> Status {
        self.status[v as usize]
    }

    pub fn layer_of(&self, v: u32) -> Option<usize> {
        match self.status[v as usize] {
            Status::Layer(i) => Some(i),
            _ => None,
        }
    }

    pub fn unexplored(&self) -> Vec<u32> {
        (0..self.status.len() as u32)
            .filter(|&v| self.status[v as usize] == Status::Unexplored)
            .collect()
    }

    /// Parents of a layer vertex: its neighbors one layer closer to the root.
    pub fn parents(&self, v: u32) -> Vec<u32> {
        match self.layer_of(v) {
            Some(i) if i > 0 => self.neighbors_in_layer(v, i - 1),
            _ => Vec::new(),
        }
    }

    /// Children of a layer vertex: its neighbors one layer further out.
    pub fn children(&self, v: u32) -> Vec<u32> {
        match self.layer_of(v) {
            Some(i) => self.neighbors_in_layer(v, i + 1),
            None => Vec::new(),
        }
    }

    fn neighbors_in_layer(&self, v: u32, layer: usize) -> Vec<u32> {
        self.host
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| self.status[w as usize] == Status::Layer(layer))
            .collect()
    }

    /// `P(v, w)` for every vertex `w`, by dynamic programming over the
    /// layers after `v`'s. Entries outside those layers are zero, except
    /// `P(v, v) = 1`.
    pub fn linear_counts_from(&self, v: u32) -> Vec<u128> {
        let mut counts = vec![0u128; self.status.len()];
        let Some(start) = self.layer_of(v) else {
            return counts;
        };
        counts[v as usize] = 1;
        for j in start + 1..self.layers.len() {
            for &w in &self.layers[j] {
                let mut total = 0u128;
                for &p in self.host.neighbors(w) {
                    if self.status[p as usize] == Status::Layer(j - 1) {
                        total = total.saturating_add(counts[p as usize]);
                    }
                }
                counts[w as usize] = total;
            }
        }
        counts
    }

    /// `P(from, to)` by explicit enumeration of linear paths.
    pub fn count_linear_paths_dfs(&self, from: u32, to: u32) -> u128 {
        fn rec<H: Host + ?Sized>(
            s: &ExplorationState<'_, H>,
            v: u32,
            layer: usize,
            to: u32,
            target: usize,
        ) -> u128 {
            if layer == target {
                return (v == to) as u128;
            }
            let mut total = 0u128;
            for &w in s.host.neighbors(v) {
                if s.status[w as usize] == Status::Layer(layer + 1) {
                    total += rec(s, w, layer + 1, to, target);
                }
            }
            total
        }
        match (self.layer_of(from), self.layer_of(to)) {
            (Some(a), Some(b)) if a <= b => rec(self, from, a, to, b),
            _ => 0,
        }
    }

    /// `P(r, S)` for a vertex set `S`.
    pub fn root_paths_to(&self, set: &[u32]) -> u128 {
        let counts = self.linear_counts_from(self.root);
        set.iter()
            .fold(0u128, |acc, &v| acc.saturating_add(counts[v as usize]))
    }

    /// The set `B'` of the current stage, split into levels: level `i`
    /// collects `v_k` with `P(v_{i-1}, v_k) > R_{k-i}` for some `v_{i-1}` in
    /// `L_{i-1}`, minus the vertices already claimed by higher levels.
    /// Levels are processed from `i = k-1` down to `1`.
    pub fn compute_bad_set(&self, constants: &Constants) -> BadSet {
        let k = self.stage();
        let root_counts = self.linear_counts_from(self.root);
        let mut claimed = vec![false; self.status.len()];
        let mut levels = Vec::new();
        let delta_d = constants.delta_d(self.d);
        for i in (1..k).rev() {
            let threshold = constants.r_u128(k - i);
            let anchors: Vec<AnchorSet> = self.layers[i - 1]
                .par_iter()
                .map(|&anchor| {
                    let counts = self.linear_counts_from(anchor);
                    let members: Vec<u32> = self.layers[k]
                        .iter()
                        .copied()
                        .filter(|&w| !claimed[w as usize] && counts[w as usize] > threshold)
                        .collect();
                    let children = self.neighbors_in_layer(anchor, i);
                    let paths: u128 = members
                        .iter()
                        .fold(0, |a, &w| a.saturating_add(counts[w as usize]));
                    AnchorSet {
                        anchor,
                        children: children.len(),
                        members,
                        paths_from_children: paths,
                    }
                })
                .filter(|a| !a.members.is_empty())
                .collect();
            let members: BTreeSet<u32> = anchors
                .iter()
                .flat_map(|a| a.members.iter().copied())
                .collect();
            for &w in &members {
                claimed[w as usize] = true;
            }
            let root_paths = members
                .iter()
                .fold(0u128, |a, &w| a.saturating_add(root_counts[w as usize]));
            let bound = BigUint::from(2 * constants.ell * constants.t) * delta_d.pow(k as u32 - 1);
            levels.push(BadLevel {
                i,
                members: members.into_iter().collect(),
                anchors,
                root_paths,
                bound: dec(&bound),
                within_bound: BigUint::from(root_paths) <= bound,
            });
        }
        let mut members: Vec<u32> = levels
            .iter()
            .flat_map(|l| l.members.iter().copied())
            .collect();
        members.sort_unstable();
        let root_paths = members
            .iter()
            .fold(0u128, |a, &w| a.saturating_add(root_counts[w as usize]));
        let bound = BigUint::from(2 * k * constants.ell * constants.t)
            * delta_d.pow(k.saturating_sub(1) as u32);
        BadSet {
            stage: k,
            members,
            levels,
            root_paths,
            bound: dec(&bound),
            within_bound: BigUint::from(root_paths) <= bound,
        }
    }

    /// Goes from stage `k` to `k + 1`. Stage 0 simply sets `L_1 = N(r)`.
    pub fn step(&mut self, constants: &Constants, embed: &EmbedPolicy) -> StageReport {
        let k = self.stage();
        let mut report = StageReport {
            from_stage: k,
            bad_set: None,
            embed_attempts: Vec::new(),
            witness: None,
            b_double_prime: 0,
            b_double_prime_within_bound: true,
            layer_sizes: Vec::new(),
            bad_sizes: Vec::new(),
            unexplored: 0,
            properties: None,
        };
        if k >= 1 {
            let bad = self.compute_bad_set(constants);
            self.attempt_embeddings(constants, &bad, embed, &mut report);

            let in_b_prime: BTreeSet<u32> = bad.members.iter().copied().collect();
            let prev_bad = &self.bad[k - 1];
            let threshold = (&constants.delta * &constants.r[k - 1]).clone();
            let b2: Vec<u32> = self.layers[k]
                .iter()
                .copied()
                .filter(|v| !in_b_prime.contains(v))
                .filter(|&v| {
                    let into_prev = self
                        .host
                        .neighbors(v)
                        .iter()
                        .filter(|&&w| prev_bad.binary_search(&w).is_ok())
                        .count();
                    k > 1 && BigUint::from(into_prev) >= threshold
                })
                .collect();
            report.b_double_prime = b2.len();
            report.b_double_prime_within_bound =
                b2.len() as u128 <= self.d as u128 * prev_bad.len() as u128;

            let mut new_bad: Vec<u32> = in_b_prime.into_iter().chain(b2).collect();
            new_bad.sort_unstable();
            for &v in &new_bad {
                self.status[v as usize] = Status::Bad(k);
            }
            self.layers[k].retain(|&v| self.status[v as usize] == Status::Layer(k));
            self.bad.push(new_bad);
            report.bad_set = Some(bad);
        }

        let mut next: Vec<u32> = self.layers[k]
            .iter()
            .flat_map(|&v| self.host.neighbors(v).iter().copied())
            .filter(|&w| self.status[w as usize] == Status::Unexplored)
            .collect();
        next.sort_unstable();
        next.dedup();
        for &w in &next {
            self.status[w as usize] = Status::Layer(k + 1);
        }
        self.layers.push(next);

        report.layer_sizes = self.layers.iter().map(Vec::len).collect();
        report.bad_sizes = self.bad.iter().map(Vec::len).collect();
        report.unexplored = self.unexplored().len();
        report.properties = Some(self.check_properties(constants));
        report
    }

    fn attempt_embeddings(
        &self,
        constants: &Constants,
        bad: &BadSet,
        policy: &EmbedPolicy,
        report: &mut StageReport,
    ) {
        if !policy.enabled {
            return;
        }
        for level in &bad.levels {
            for anchor in &level.anchors {
                if report.embed_attempts.len() >= policy.max_attempts {
                    return;
                }
                let a = self.children(anchor.anchor);
                let r = embed_theta(self, constants, anchor.anchor, &a, &anchor.members);
                let found = r.witness.clone();
                report.embed_attempts.push(r);
                if let Some(w) = found {
                    report.witness.get_or_insert(w);
                    if policy.stop_at_witness {
                        return;
                    }
                }
            }
        }
    }

    /// Direct check of the invariants at the current stage.
    pub fn check_properties(&self, constants: &Constants) -> PropertyReport {
        let k = self.stage();
        let d = self.d;
        let mut diagnostics = Vec::new();

        let p1 = self.layers[0] == [self.root];
        if !p1 {
            diagnostics.push("P1: layer 0 is not the root".to_string());
        }

        let mut orphan = None;
        for i in 1..=k {
            if let Some(&v) = self.layers[i].iter().find(|&&v| self.parents(v).is_empty()) {
                orphan = Some(v);
                diagnostics.push(format!("P2: vertex {v} in layer {i} has no parent"));
                break;
            }
        }

        // disjointness: every layer and bad-set entry carries the matching status
        let mut seen = vec![false; self.status.len()];
        let mut disjoint = true;
        for (i, layer) in self.layers.iter().enumerate() {
            for &v in layer {
                disjoint &= !std::mem::replace(&mut seen[v as usize], true)
                    && self.status[v as usize] == Status::Layer(i);
            }
        }
        for (j, set) in self.bad.iter().enumerate() {
            for &v in set {
                disjoint &= !std::mem::replace(&mut seen[v as usize], true)
                    && self.status[v as usize] == Status::Bad(j);
            }
        }
        for (v, s) in self.status.iter().enumerate() {
            if matches!(s, Status::Layer(_) | Status::Bad(_)) && !seen[v] {
                disjoint = false;
            }
        }
        if !disjoint {
            diagnostics.push("partition: layers, bad sets and unexplored set overlap".to_string());
        }

        // P3 plus the parent bound P(r, v) >= d_in(v)
        let sources: Vec<(usize, u32)> = (0..k.saturating_sub(1))
            .flat_map(|i| self.layers[i].iter().map(move |&v| (i, v)))
            .collect();
        let violations: Vec<(u32, u32, u128, u128)> = sources
            .par_iter()
            .filter_map(|&(i, v)| {
                let counts = self.linear_counts_from(v);
                for j in i + 1..k {
                    let limit = constants.r_u128(j - i - 1);
                    for &w in &self.layers[j] {
                        if counts[w as usize] > limit {
                            return Some((v, w, counts[w as usize], limit));
                        }
                    }
                }
                None
            })
            .collect();
        let p3_violation = violations.first().copied();
        if let Some((v, w, c, limit)) = p3_violation {
            diagnostics.push(format!("P3: P({v}, {w}) = {c} exceeds {limit}"));
        }

        let root_counts = self.linear_counts_from(self.root);
        let parent_bound = (1..=k).all(|i| {
            self.layers[i]
                .iter()
                .all(|&v| root_counts[v as usize] >= self.parents(v).len() as u128)
        });

        let mut p4 = true;
        for j in 1..self.bad.len() {
            let bound = &constants.tau[j] * BigUint::from(d).pow(j as u32 - 1);
            if BigUint::from(self.bad[j].len()) > bound {
                p4 = false;
                diagnostics.push(format!(
                    "P4: |B_{j}| = {} exceeds {bound}",
                    self.bad[j].len()
                ));
            }
        }

        let to_last = self.layers[k]
            .iter()
            .fold(0u128, |a, &v| a.saturating_add(root_counts[v as usize]));
        let (p5, p5_lower) = if k == 0 {
            (Check::Vacuous, "0".to_string())
        } else {
            let eta = &constants.eta[k.min(constants.ell)];
            let d_big = BigUint::from(d);
            if d_big <= *eta {
                (Check::Vacuous, "0".to_string())
            } else {
                let lower = d_big.pow(k as u32 - 1) * (&d_big - eta);
                let ok = BigUint::from(to_last) >= lower;
                if !ok {
                    diagnostics.push(format!(
                        "P5: {to_last} linear paths to layer {k}, expected at least {lower}"
                    ));
                }
                (Check::from_bool(ok), dec(&lower))
            }
        };

        let mut p6_violation = None;
        if k >= 1 {
            for &v in &self.layers[k] {
                let good = self
                    .host
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| {
                        matches!(self.status[w as usize], Status::Unexplored)
                            || self.status[w as usize] == Status::Layer(k - 1)
                            || self.status[w as usize] == Status::Bad(k - 1)
                    })
                    .count();
                if (good as u64) < d {
                    p6_violation = Some(v);
                    break;
                }
            }
            if p6_violation.is_none() {
                for v in self.unexplored() {
                    let good = self
                        .host
                        .neighbors(v)
                        .iter()
                        .filter(|&&w| {
                            matches!(self.status[w as usize], Status::Unexplored)
                                || self.status[w as usize] == Status::Layer(k)
                        })
                        .count();
                    if (good as u64) < d {
                        p6_violation = Some(v);
                        break;
                    }
                }
            }
            if let Some(v) = p6_violation {
                diagnostics.push(format!(
                    "P6: vertex {v} has fewer than {d} admissible neighbors"
                ));
            }
        }

        PropertyReport {
            stage: k,
            p1_root: p1,
            p2_no_orphans: orphan.is_none(),
            orphan,
            p3_regular: p3_violation.is_none(),
            p3_violation,
            p4_bad_small: p4,
            p5_growing: p5,
            p5_paths: to_last,
            p5_lower_bound: p5_lower,
            p6_children: if k == 0 {
                Check::Vacuous
            } else {
                Check::from_bool(p6_violation.is_none())
            },
            p6_violation,
            disjoint,
            parent_bound,
            diagnostics,
        }
    }
}

/// Vertices of `L_k` claimed by one anchor `v_{i-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub anchor: u32,
    pub children: usize,
    pub members: Vec<u32>,
    /// `P(N→(anchor), members)`
    pub paths_from_children: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadLevel {
    pub i: usize,
    pub members: Vec<u32>,
    pub anchors: Vec<AnchorSet>,
    /// `P(r, B'_i)`
    pub root_paths: u128,
    /// `2ℓt(Δd)^(k-1)`
    pub bound: String,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadSet {
    pub stage: usize,
    pub members: Vec<u32>,
    pub levels: Vec<BadLevel>,
    /// `P(r, B')`
    pub root_paths: u128,
    /// `2kℓt(Δd)^(k-1)`
    pub bound: String,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub stage: usize,
    pub p1_root: bool,
    pub p2_no_orphans: bool,
    pub orphan: Option<u32>,
    pub p3_regular: bool,
    /// `(v_i, v_j, P(v_i, v_j), limit)`
    pub p3_violation: Option<(u32, u32, u128, u128)>,
    pub p4_bad_small: bool,
    pub p5_growing: Check,
    /// `P(r, L_k)`
    pub p5_paths: u128,
    pub p5_lower_bound: String,
    pub p6_children: Check,
    pub p6_violation: Option<u32>,
    pub disjoint: bool,
    /// `P(r, v) >= d_in(v)` for every layer vertex.
    pub parent_bound: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub from_stage: usize,
    pub bad_set: Option<BadSet>,
    pub embed_attempts: Vec<EmbedReport>,
    pub witness: Option<ThetaWitness>,
    pub b_double_prime: usize,
    /// `|B''| <= d |B_{k-1}|`
    pub b_double_prime_within_bound: bool,
    pub layer_sizes: Vec<usize>,
    pub bad_sizes: Vec<usize>,
    pub unexplored: usize,
    pub properties: Option<PropertyReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedPolicy {
    pub enabled: bool,
    pub max_attempts: usize,
    pub stop_at_witness: bool,
}

impl Default for EmbedPolicy {
    fn default() -> Self {
        EmbedPolicy {
            enabled: true,
            max_attempts: 64,
            stop_at_witness: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootPolicy {
    /// Vertex of maximum degree, smallest id on ties.
    #[default]
    MaxDegree,
    Vertex(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CertifierOptions {
    pub root: RootPolicy,
    /// Minimum degree `d` to assume; defaults to the minimum degree of the
    /// root's component.
    pub d: Option<u64>,
    pub embed: EmbedPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantsBlock {
    pub delta: String,
    pub r: Vec<String>,
    pub tau: Vec<String>,
    pub eta: Vec<String>,
}

impl From<&Constants> for ConstantsBlock {
    fn from(c: &Constants) -> Self {
        ConstantsBlock {
            delta: dec(&c.delta),
            r: c.r.iter().map(dec).collect(),
            tau: c.tau.iter().map(dec).collect(),
            eta: c.eta.iter().map(dec).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalVerdict {
    /// `d <= η_ℓ`: the lower bound is non-positive.
    Vacuous,
    /// `d^(ℓ-1)(d - η_ℓ) <= |L_ℓ| R_(ℓ-1)`
    Consistent,
    /// The lower bound exceeds the upper bound.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalComparison {
    /// `P(r, L_ℓ)`
    pub root_paths: u128,
    pub last_layer: usize,
    /// `d^(ℓ-1)(d - η_ℓ)`, or 0 when vacuous.
    pub lower: String,
    /// `|L_ℓ| R_(ℓ-1)`
    pub upper: String,
    pub root_paths_within_upper: bool,
    pub verdict: FinalVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub ell: usize,
    pub t: usize,
    pub root: u32,
    pub root_policy: RootPolicy,
    pub d: u64,
    pub max_degree: usize,
    /// `max_degree <= Δ d` on the root's component.
    pub degree_hypothesis: bool,
    pub component_size: usize,
    pub constants: ConstantsBlock,
    pub stages: Vec<StageReport>,
    /// Bad set of the final stage, computed for the record and for embedding.
    pub final_bad_set: BadSet,
    pub final_embed_attempts: Vec<EmbedReport>,
    pub comparison: FinalComparison,
    pub witness: Option<ThetaWitness>,
    /// True when P1, P2, disjointness and the parent bound held at every
    /// stage.
    pub structural_ok: bool,
    pub diagnostics: Vec<String>,
}

pub fn choose_root<H: Host + ?Sized>(g: &H, policy: RootPolicy) -> Result<u32, ExploreError> {
    let n = g.vertex_count() as u32;
    if n == 0 {
        return Err(ExploreError::Empty);
    }
    match policy {
        RootPolicy::MaxDegree => Ok((0..n)
            .max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v)))
            .unwrap()),
        RootPolicy::Vertex(v) if v < n => Ok(v),
        RootPolicy::Vertex(v) => Err(ExploreError::RootOutOfRange(v)),
    }
}

/// Runs the exploration for `ℓ` stages and collects every check.
pub fn run_certifier<H: Host + ?Sized>(
    g: &H,
    ell: usize,
    t: usize,
    opts: &CertifierOptions,
) -> Result<Certificate, ExploreError> {
    if ell < 2 || t < 2 {
        return Err(ExploreError::BadParams { ell, t });
    }
    if SimpleGraph::from_host(g).bipartition().is_none() {
        return Err(ExploreError::NotBipartite);
    }
    let root = choose_root(g, opts.root)?;
    let constants = Constants::new(ell, t);
    let probe = ExplorationState::new(g, root, 0)?;
    let component: Vec<u32> = (0..g.vertex_count() as u32)
        .filter(|&v| probe.status(v) != Status::Outside)
        .collect();
    let min_degree = component.iter().map(|&v| g.degree(v)).min().unwrap_or(0) as u64;
    let max_degree = component.iter().map(|&v| g.degree(v)).max().unwrap_or(0);
    let d = opts.d.unwrap_or(min_degree);

    let mut state = ExplorationState::new(g, root, d)?;
    let mut stages = Vec::new();
    let mut witness = None;
    let mut diagnostics = Vec::new();
    let mut structural_ok = true;
    for _ in 0..ell {
        let report = state.step(&constants, &opts.embed);
        if witness.is_none() {
            witness = report.witness.clone();
        }
        if let Some(p) = &report.properties {
            structural_ok &= p.p1_root && p.p2_no_orphans && p.disjoint && p.parent_bound;
            diagnostics.extend(
                p.diagnostics
                    .iter()
                    .map(|m| format!("stage {}: {m}", p.stage)),
            );
        }
        stages.push(report);
    }

    let final_bad_set = state.compute_bad_set(&constants);
    let mut tail = StageReport {
        from_stage: ell,
        bad_set: None,
        embed_attempts: Vec::new(),
        witness: None,
        b_double_prime: 0,
        b_double_prime_within_bound: true,
        layer_sizes: Vec::new(),
        bad_sizes: Vec::new(),
        unexplored: 0,
        properties: None,
    };
    if witness.is_none() || !opts.embed.stop_at_witness {
        state.attempt_embeddings(&constants, &final_bad_set, &opts.embed, &mut tail);
        if witness.is_none() {
            witness = tail.witness.clone();
        }
    }

    let last = &state.layers()[ell];
    let root_paths = state.root_paths_to(last);
    let upper = BigUint::from(last.len()) * &constants.r[ell - 1];
    let d_big = BigUint::from(d);
    let eta = &constants.eta[ell];
    let (lower, verdict) = if d_big <= *eta {
        (BigUint::zero(), FinalVerdict::Vacuous)
    } else {
        let lower = d_big.pow(ell as u32 - 1) * (&d_big - eta);
        let v = if lower <= upper {
            FinalVerdict::Consistent
        } else {
            FinalVerdict::Contradiction
        };
        (lower, v)
    };
    let comparison = FinalComparison {
        root_paths,
        last_layer: last.len(),
        lower: dec(&lower),
        upper: dec(&upper),
        root_paths_within_upper: BigUint::from(root_paths) <= upper,
        verdict,
    };

    Ok(Certificate {
        ell,
        t,
        root,
        root_policy: opts.root,
        d,
        max_degree,
        degree_hypothesis: BigUint::from(max_degree) <= constants.delta_d(d),
        component_size: component.len(),
        constants: ConstantsBlock::from(&constants),
        stages,
        final_bad_set,
        final_embed_attempts: tail.embed_attempts,
        comparison,
        witness,
        structural_ok,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, even_cycle, BipartiteGraph};

    #[test]
    fn first_step_is_the_neighborhood() {
        let g = complete_bipartite(2, 3);
        let c = Constants::new(2, 2);
        let mut s = ExplorationState::new(&g, 0, 2).unwrap();
        s.step(&c, &EmbedPolicy::default());
        assert_eq!(s.layers()[1], vec![2, 3, 4]);
        let counts = s.linear_counts_from(0);
        assert!(s.layers()[1].iter().all(|&v| counts[v as usize] == 1));
    }

    #[test]
    fn cycle_layers() {
        let c6 = even_cycle(3);
        let cert = run_certifier(&c6, 3, 2, &CertifierOptions::default()).unwrap();
        assert_eq!(cert.stages.last().unwrap().layer_sizes, vec![1, 2, 2, 1]);
        assert!(cert.structural_ok);
        assert!(cert.witness.is_none());
        assert_eq!(cert.comparison.verdict, FinalVerdict::Vacuous);
    }

    #[test]
    fn tree_has_unique_paths() {
        // binary-ish tree: 0 - {3,4}, 3 - {1}, 4 - {2}, 1 - {5}
        let tree =
            BipartiteGraph::from_edges(3, 3, [(0, 3), (0, 4), (1, 3), (2, 4), (1, 5)]).unwrap();
        let c = Constants::new(3, 2);
        let mut s = ExplorationState::new(&tree, 0, 1).unwrap();
        for _ in 0..3 {
            let r = s.step(&c, &EmbedPolicy::default());
            assert!(r.bad_set.is_none_or(|b| b.members.is_empty()));
        }
        let counts = s.linear_counts_from(0);
        for layer in s.layers() {
            for &v in layer {
                assert_eq!(counts[v as usize], 1);
            }
        }
    }

    #[test]
    fn complete_bipartite_hub_becomes_bad() {
        // K_{2,R+1} with R = R_1 = 2ℓt: from hub 0, the other hub 1 sits in
        // layer 2 with R+1 linear paths, above R_1
        let (ell, t) = (3usize, 2usize);
        let r1 = 2 * ell * t;
        let g = complete_bipartite(2, r1 + 1);
        let c = Constants::new(ell, t);
        let mut s = ExplorationState::new(&g, 0, 2).unwrap();
        s.step(&c, &EmbedPolicy::default());
        s.step(&c, &EmbedPolicy::default());
        assert_eq!(s.layers()[2], vec![1]);
        let bad = s.compute_bad_set(&c);
        assert_eq!(bad.members, vec![1]);
        assert_eq!(bad.levels[0].anchors[0].anchor, 0);

        let small = complete_bipartite(2, r1);
        let mut s = ExplorationState::new(&small, 0, 2).unwrap();
        s.step(&c, &EmbedPolicy::default());
        s.step(&c, &EmbedPolicy::default());
        assert!(s.compute_bad_set(&c).members.is_empty());
    }

    /// Root 0, `A` of size 12 below it, `S` of size 24 complete to `A`, and
    /// `B` of size 6 complete to `S`.
    fn planted() -> BipartiteGraph {
        let mut edges = Vec::new();
        let (s, a, b) = (1u32..=24, 25u32..=36, 37u32..=42);
        for x in a.clone() {
            edges.push((0, x));
            for y in s.clone() {
                edges.push((y, x));
            }
        }
        for y in s {
            for z in b.clone() {
                edges.push((y, z));
            }
        }
        BipartiteGraph::from_edges(25, 18, edges).unwrap()
    }

    #[test]
    fn planted_theta_is_embedded() {
        let g = planted();
        let opts = CertifierOptions {
            root: RootPolicy::Vertex(0),
            ..Default::default()
        };
        let cert = run_certifier(&g, 3, 2, &opts).unwrap();
        assert_eq!(cert.stages.last().unwrap().layer_sizes, vec![1, 12, 24, 6]);
        let w = cert.witness.expect("planted host yields a witness");
        w.validate(&g, 3, 2).unwrap();
        assert!(cert.structural_ok);
    }

    #[test]
    fn rejects_odd_cycles() {
        let c5 = SimpleGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert!(matches!(
            run_certifier(&c5, 3, 2, &CertifierOptions::default()),
            Err(ExploreError::NotBipartite)
        ));
    }
}
