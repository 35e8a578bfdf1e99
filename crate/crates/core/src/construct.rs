//! Construction pipelines: random algebraic graphs, the few-paths graph with
//! its bad pairs removed, the odd-length blowup construction and the
//! even-length union construction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{largest_prime_power_with, Field, FieldError, FieldSpec};
use crate::graph::{
    blowup, find_bad_pairs, path_counts_from, remove_bad_pairs, simplify, union_multigraph,
    BipartiteGraph, GraphError, GraphMeta, Host, PairScope, RemovalReport, DEFAULT_VERTEX_CAP,
};
use crate::mpoly::{PolyError, PolynomialSystem, DEFAULT_COEFF_CAP, GRID_CAP};

pub const DEFAULT_QUANTILE: f64 = 0.999;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{vertices} vertices per side exceed the cap of {cap}")]
    TooManyVertices { vertices: u128, cap: usize },
    #[error("no default polynomial degree for ell={0}; pass an explicit d_poly")]
    DegreeRequired(u32),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, ConstructError>;

/// Resource limits shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum number of stored polynomial coefficients.
    pub coeff_cap: usize,
    /// Maximum vertices per side of any generated graph.
    pub vertex_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            coeff_cap: DEFAULT_COEFF_CAP,
            vertex_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

/// Polynomial degree to use: the override if given, otherwise `2 ell^2`.
/// The default basis is only tractable for `ell <= 3`.
pub fn resolve_degree(ell: u32, d_poly: Option<u32>) -> Result<u32> {
    match d_poly {
        Some(d) => Ok(d),
        None if ell <= 3 => Ok(2 * ell * ell),
        None => Err(ConstructError::DegreeRequired(ell)),
    }
}

/// Note for reports when the degree differs from `2 ell^2`.
pub fn degree_note(ell: u32, d_poly: u32) -> Option<String> {
    (d_poly != 2 * ell * ell).then(|| {
        format!(
            "d_poly={d_poly} overrides the default 2*ell^2={}",
            2 * ell * ell
        )
    })
}

/// Coordinates of vertex id `id` in `F_q^ell`, most significant first.
pub fn vertex_coordinates(id: u32, q: u32, ell: u32) -> Vec<u32> {
    let mut out = vec![0u32; ell as usize];
    let mut rest = id;
    for slot in out.iter_mut().rev() {
        *slot = rest % q;
        rest /= q;
    }
    out
}

/// Random algebraic graph on `U = V = F_q^ell` from stream 0 of `seed`.
pub fn random_algebraic_graph(
    ell: u32,
    field: &Field,
    d_poly: u32,
    seed: u64,
) -> Result<(BipartiteGraph, PolynomialSystem)> {
    random_algebraic_graph_with(ell, field, d_poly, seed, 0, Caps::default())
}

/// Vertex `u` of `U` gets id `sum u_i q^(ell-1-i)` and vertex `v` of `V` the
/// id `q^ell` plus the same expression; `uv` is an edge iff all `ell - 1`
/// polynomials vanish at `(u, v)`.
pub fn random_algebraic_graph_with(
    ell: u32,
    field: &Field,
    d_poly: u32,
    seed: u64,
    stream: u64,
    caps: Caps,
) -> Result<(BipartiteGraph, PolynomialSystem)> {
    if ell < 2 {
        return Err(ConstructError::InvalidParams(format!(
            "ell must be at least 2, got {ell}"
        )));
    }
    let q = field.order();
    let side = (q as u128).pow(ell);
    if side > caps.vertex_cap as u128 {
        return Err(ConstructError::TooManyVertices {
            vertices: side,
            cap: caps.vertex_cap,
        });
    }
    let side = side as usize;
    let system = PolynomialSystem::sample(ell, field, d_poly, seed, stream, caps.coeff_cap)?;

    let edges: Vec<(u32, u32)> = if (side as u128) * (side as u128) <= GRID_CAP as u128 {
        let tables: Vec<Vec<u32>> = system
            .polys()
            .par_iter()
            .map(|f| f.value_table(field))
            .collect::<std::result::Result<_, _>>()?;
        (0..side)
            .into_par_iter()
            .flat_map_iter(|u| {
                let tables = &tables;
                (0..side).filter_map(move |v| {
                    let idx = u * side + v;
                    tables
                        .iter()
                        .all(|t| t[idx] == 0)
                        .then_some((u as u32, (side + v) as u32))
                })
            })
            .collect()
    } else {
        (0..side as u32)
            .into_par_iter()
            .flat_map_iter(|u| {
                let system = &system;
                let mut point = vertex_coordinates(u, q, ell);
                point.resize(2 * ell as usize, 0);
                (0..side as u32).filter_map(move |v| {
                    point[ell as usize..].copy_from_slice(&vertex_coordinates(v, q, ell));
                    system
                        .vanishes_raw(field, &point)
                        .then_some((u, side as u32 + v))
                })
            })
            .collect()
    };

    let mut g = BipartiteGraph::from_edges(side, side, edges)?;
    g.set_labels(
        (0..2 * side as u32)
            .map(|id| vertex_coordinates(id % side as u32, q, ell))
            .collect(),
    );
    g.meta = GraphMeta {
        ell: Some(ell),
        q: Some(q),
        seed: Some(seed),
        provenance: format!("random algebraic graph, d_poly={d_poly}, stream={stream}"),
    };
    Ok((g, system))
}

/// Parameters of the few-paths graph and the two theta-free constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub ell: u32,
    /// Number of theta paths to exclude.
    pub t: u64,
    /// Vertex budget.
    pub n: u64,
    /// Bad-pair threshold `T`.
    pub t_eff: u64,
    /// Polynomial degree; `None` means `2 ell^2`.
    pub d_poly: Option<u32>,
    pub seed: u64,
    pub scope: PairScope,
    /// Count paths for the even construction in the simplified graph instead
    /// of the multigraph union.
    pub count_in_simple: bool,
    pub caps: Caps,
}

impl ConstructionParams {
    pub fn new(ell: u32, t: u64, n: u64, t_eff: u64, seed: u64) -> Self {
        ConstructionParams {
            ell,
            t,
            n,
            t_eff,
            d_poly: None,
            seed,
            scope: PairScope::All,
            count_in_simple: false,
            caps: Caps::default(),
        }
    }

    /// `floor((t - 1) / T)`.
    pub fn blowup_factor(&self) -> u64 {
        if self.t_eff == 0 {
            return 0;
        }
        self.t.saturating_sub(1) / self.t_eff
    }

    /// Largest `h >= 1` with `h^ell * T <= t`, i.e. `max(1, floor((t/T)^(1/ell)))`.
    pub fn union_multiplicity(&self) -> u64 {
        let mut h = 1u64;
        while (h + 1)
            .checked_pow(self.ell)
            .and_then(|p| p.checked_mul(self.t_eff))
            .is_some_and(|v| v <= self.t)
        {
            h += 1;
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewPathsReport {
    pub ell: u32,
    pub n: u64,
    pub q: u32,
    pub seed: u64,
    pub t_eff: u64,
    pub d_poly: u32,
    pub d_poly_note: Option<String>,
    pub scope: PairScope,
    pub vertices_before: usize,
    pub edges_before: usize,
    pub bad_pairs: usize,
    pub removal: RemovalReport,
    pub vertices: usize,
    pub edges: usize,
    /// `n^(1 + 1/ell) / 4`
    pub quarter_bound: f64,
    pub edges_over_quarter_bound: f64,
    pub rescan_bad_pairs: usize,
}

fn check_field_budget(n: u64, ell: u32) -> Result<FieldSpec> {
    largest_prime_power_with(n, ell).map_err(|_| {
        ConstructError::InvalidParams(format!(
            "n={n} is too small: no prime power q with 2q^{ell} <= n"
        ))
    })
}

/// Random algebraic graph with `q` the largest prime power such that
/// `2 q^ell <= n`, with every `T`-bad pair removed.
pub fn build_few_paths_graph(
    ell: u32,
    n: u64,
    t_eff: u64,
    d_poly: Option<u32>,
    seed: u64,
    scope: PairScope,
    caps: Caps,
) -> Result<(BipartiteGraph, FewPathsReport)> {
    if t_eff == 0 {
        return Err(ConstructError::InvalidParams("T must be positive".into()));
    }
    let d = resolve_degree(ell, d_poly)?;
    let spec = check_field_budget(n, ell)?;
    let field = Field::from_spec(spec)?;
    let (g, _) = random_algebraic_graph_with(ell, &field, d, seed, 0, caps)?;
    let scan = find_bad_pairs(&g, t_eff as u128, ell as usize, scope);
    let (pruned, removal) = remove_bad_pairs(&g, &scan.pairs);
    let rescan = find_bad_pairs(&pruned, t_eff as u128, ell as usize, scope);
    if !rescan.pairs.is_empty() {
        return Err(ConstructError::Postcondition(format!(
            "{} bad pairs remain after removal",
            rescan.pairs.len()
        )));
    }
    let quarter_bound = (n as f64).powf(1.0 + 1.0 / ell as f64) / 4.0;
    let report = FewPathsReport {
        ell,
        n,
        q: spec.q,
        seed,
        t_eff,
        d_poly: d,
        d_poly_note: degree_note(ell, d),
        scope,
        vertices_before: g.vertex_count(),
        edges_before: g.edge_count(),
        bad_pairs: scan.pairs.len(),
        removal,
        vertices: pruned.vertex_count(),
        edges: pruned.edge_count(),
        quarter_bound,
        edges_over_quarter_bound: pruned.edge_count() as f64 / quarter_bound,
        rescan_bad_pairs: 0,
    };
    let mut pruned = pruned;
    pruned.meta.provenance = format!(
        "{} with {}-bad pairs removed",
        pruned.meta.provenance, t_eff
    );
    Ok((pruned, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddReport {
    pub params: ConstructionParams,
    pub m: u64,
    /// Vertex budget handed to the few-paths graph, `n / m`.
    pub base_budget: u64,
    pub base: FewPathsReport,
    pub vertices: usize,
    pub edges: usize,
    /// `edges / (t^(1 - 1/ell) * vertices^(1 + 1/ell))`
    pub density_ratio: f64,
}

/// `m`-blowup of the few-paths graph on `n / m` vertices, `m = floor((t-1)/T)`.
pub fn build_odd_construction(params: &ConstructionParams) -> Result<(BipartiteGraph, OddReport)> {
    let ell = params.ell;
    if ell < 3 || ell.is_multiple_of(2) {
        return Err(ConstructError::InvalidParams(format!(
            "odd construction needs odd ell >= 3, got {ell}"
        )));
    }
    let m = params.blowup_factor();
    if m == 0 {
        return Err(ConstructError::InvalidParams(format!(
            "t={} must exceed T={}",
            params.t, params.t_eff
        )));
    }
    let base_budget = params.n / m;
    let spec = check_field_budget(base_budget, ell)?;
    let per_side = (spec.q as u128).pow(ell) * m as u128;
    if per_side > params.caps.vertex_cap as u128 {
        return Err(ConstructError::TooManyVertices {
            vertices: per_side,
            cap: params.caps.vertex_cap,
        });
    }
    let (base, base_report) = build_few_paths_graph(
        ell,
        base_budget,
        params.t_eff,
        params.d_poly,
        params.seed,
        params.scope,
        params.caps,
    )?;
    let g = blowup(&base, m as usize, 2 * params.caps.vertex_cap)?;
    let vertices = g.vertex_count();
    let edges = g.edge_count();
    let report = OddReport {
        params: params.clone(),
        m,
        base_budget,
        base: base_report,
        vertices,
        edges,
        density_ratio: density_ratio(edges, params.t, vertices, 1.0 - 1.0 / ell as f64, ell),
    };
    Ok((g, report))
}

fn density_ratio(edges: usize, t: u64, vertices: usize, t_exponent: f64, ell: u32) -> f64 {
    let denom = (t as f64).powf(t_exponent) * (vertices as f64).powf(1.0 + 1.0 / ell as f64);
    if denom == 0.0 {
        0.0
    } else {
        edges as f64 / denom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvenReport {
    pub params: ConstructionParams,
    pub q: u32,
    pub h: u64,
    pub d_poly: u32,
    pub d_poly_note: Option<String>,
    /// Bad-pair threshold `T * h^ell`.
    pub threshold: u128,
    pub edges_per_sample: Vec<usize>,
    /// Edges of the union counted with multiplicity.
    pub multigraph_edges: u64,
    /// Surplus parallel edges removed by simplification.
    pub multiple_edges: u64,
    /// False flags a run where the surplus exceeds the vertex count.
    pub multiple_edges_within_n: bool,
    pub simple_edges: usize,
    pub bad_pairs: usize,
    pub removal: RemovalReport,
    pub vertices: usize,
    pub edges: usize,
    /// `edges / (t^(1/ell) * vertices^(1 + 1/ell))`
    pub density_ratio: f64,
}

/// Union of `h` independent random algebraic graphs, simplified, with every
/// `T h^ell`-bad pair removed.
pub fn build_even_construction(
    params: &ConstructionParams,
) -> Result<(BipartiteGraph, EvenReport)> {
    let ell = params.ell;
    if ell < 2 || ell % 2 == 1 {
        return Err(ConstructError::InvalidParams(format!(
            "even construction needs even ell >= 2, got {ell}"
        )));
    }
    if params.t_eff == 0 {
        return Err(ConstructError::InvalidParams("T must be positive".into()));
    }
    let h = params.union_multiplicity();
    build_even_with_h(params, h)
}

/// Even construction with an explicit union multiplicity.
pub fn build_even_with_h(
    params: &ConstructionParams,
    h: u64,
) -> Result<(BipartiteGraph, EvenReport)> {
    let ell = params.ell;
    if h == 0 {
        return Err(ConstructError::InvalidParams("h must be at least 1".into()));
    }
    let d = resolve_degree(ell, params.d_poly)?;
    let spec = check_field_budget(params.n, ell)?;
    let field = Field::from_spec(spec)?;
    let samples: Vec<BipartiteGraph> = (0..h)
        .map(|i| {
            random_algebraic_graph_with(ell, &field, d, params.seed, i, params.caps).map(|r| r.0)
        })
        .collect::<Result<_>>()?;
    let edges_per_sample = samples.iter().map(|g| g.edge_count()).collect();
    let union = union_multigraph(&samples)?;
    let (simple, multiple_edges) = simplify(&union);
    let threshold = (params.t_eff as u128).saturating_mul((h as u128).saturating_pow(ell));
    let counted: &BipartiteGraph = if params.count_in_simple {
        &simple
    } else {
        &union
    };
    let scan = find_bad_pairs(counted, threshold, ell as usize, params.scope);
    let (mut g, removal) = remove_bad_pairs(&simple, &scan.pairs);
    g.meta.provenance =
        format!("union of {h} random algebraic graphs, simplified, {threshold}-bad pairs removed");
    let vertices = g.vertex_count();
    let edges = g.edge_count();
    let report = EvenReport {
        params: params.clone(),
        q: spec.q,
        h,
        d_poly: d,
        d_poly_note: degree_note(ell, d),
        threshold,
        edges_per_sample,
        multigraph_edges: union.total_multiplicity(),
        multiple_edges,
        multiple_edges_within_n: multiple_edges <= union.vertex_count() as u64,
        simple_edges: simple.edge_count(),
        bad_pairs: scan.pairs.len(),
        removal,
        vertices,
        edges,
        density_ratio: density_ratio(edges, params.t, vertices, 1.0 / ell as f64, ell),
    };
    Ok((g, report))
}

/// Nearest-rank `quantile` of the path counts (length at most `max_len`) over
/// all vertex pairs, ignoring pairs whose count exceeds `exclude_above`.
/// Returns 0 when no pair remains.
pub fn pair_count_quantile<H: Host + ?Sized>(
    g: &H,
    max_len: usize,
    quantile: f64,
    exclude_above: Option<u128>,
) -> u128 {
    let n = g.vertex_count() as u32;
    let mut counts: Vec<u128> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let c = path_counts_from(g, x, max_len);
            (x + 1..n).map(move |y| c[y as usize])
        })
        .filter(|&c| exclude_above.is_none_or(|cap| c <= cap))
        .collect();
    if counts.is_empty() {
        return 0;
    }
    counts.sort_unstable();
    let rank = (quantile.clamp(0.0, 1.0) * counts.len() as f64).ceil() as usize;
    counts[rank.clamp(1, counts.len()) - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TEstimate {
    pub ell: u32,
    pub q: u32,
    pub d_poly: u32,
    pub quantile: f64,
    /// Pairs with more paths than this were left out.
    pub exclude_above: Option<u128>,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<u128>,
    pub min: u128,
    pub max: u128,
    /// The estimate, the maximum over seeds.
    pub t_eff: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub quantile: f64,
    pub first_seed: u64,
    /// Leave out pairs with more than `q/2` paths, the large side of the
    /// path count dichotomy. Off by default: for the field sizes reachable
    /// here the two sides are not separated and the cut lands in the bulk of
    /// the distribution.
    pub exclude_large: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            quantile: DEFAULT_QUANTILE,
            first_seed: 0,
            exclude_large: false,
        }
    }
}

/// Empirical bad-pair threshold: the maximum over seeds of the `quantile` of
/// per-pair path counts of length at most `ell`.
pub fn estimate_t(
    ell: u32,
    q: u64,
    d_poly: Option<u32>,
    num_seeds: usize,
    opts: EstimateOptions,
) -> Result<TEstimate> {
    if num_seeds == 0 {
        return Err(ConstructError::InvalidParams(
            "need at least one seed".into(),
        ));
    }
    let d = resolve_degree(ell, d_poly)?;
    let field = Field::new(q)?;
    let exclude_above = opts.exclude_large.then_some(field.order() as u128 / 2);
    let seeds: Vec<u64> = (opts.first_seed..opts.first_seed + num_seeds as u64).collect();
    let per_seed = seeds
        .iter()
        .map(|&s| {
            let (g, _) = random_algebraic_graph(ell, &field, d, s)?;
            Ok(pair_count_quantile(
                &g,
                ell as usize,
                opts.quantile,
                exclude_above,
            ))
        })
        .collect::<Result<Vec<u128>>>()?;
    let min = *per_seed.iter().min().unwrap();
    let max = *per_seed.iter().max().unwrap();
    Ok(TEstimate {
        ell,
        q: field.order(),
        d_poly: d,
        quantile: opts.quantile,
        exclude_above,
        seeds,
        per_seed,
        min,
        max,
        t_eff: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete_bipartite;

    #[test]
    fn coordinates_round_trip() {
        assert_eq!(vertex_coordinates(5, 3, 2), vec![1, 2]);
        assert_eq!(vertex_coordinates(26, 3, 3), vec![2, 2, 2]);
    }

    #[test]
    fn grid_matches_pointwise_evaluation() {
        let field = Field::new(3).unwrap();
        let (g, system) = random_algebraic_graph(2, &field, 8, 11).unwrap();
        assert_eq!(g.left_count(), 9);
        for u in 0..9u32 {
            for v in 0..9u32 {
                let mut point = vertex_coordinates(u, 3, 2);
                point.extend(vertex_coordinates(v, 3, 2));
                assert_eq!(g.has_edge(u, 9 + v), system.vanishes_raw(&field, &point));
            }
        }
        assert_eq!(g.labels().unwrap()[9 + 4], vec![1, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let field = Field::new(3).unwrap();
        assert!(random_algebraic_graph(1, &field, 2, 0).is_err());
        let small = Caps {
            vertex_cap: 8,
            ..Caps::default()
        };
        assert!(random_algebraic_graph_with(2, &field, 2, 0, 0, small).is_err());
        assert!(matches!(
            resolve_degree(4, None),
            Err(ConstructError::DegreeRequired(4))
        ));
        assert_eq!(resolve_degree(3, None).unwrap(), 18);
    }

    #[test]
    fn deterministic() {
        let field = Field::new(5).unwrap();
        let a = random_algebraic_graph(2, &field, 8, 3).unwrap().0;
        let b = random_algebraic_graph(2, &field, 8, 3).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_arithmetic() {
        let p = ConstructionParams::new(3, 7, 162, 2, 0);
        assert_eq!(p.blowup_factor(), 3);
        let mut e = ConstructionParams::new(2, 32, 98, 2, 0);
        assert_eq!(e.union_multiplicity(), 4);
        e.t = 31;
        assert_eq!(e.union_multiplicity(), 3);
        e.t = 1;
        assert_eq!(e.union_multiplicity(), 1);
    }

    #[test]
    fn quantile_examples() {
        let empty = BipartiteGraph::empty(3, 3);
        assert_eq!(pair_count_quantile(&empty, 3, 0.999, None), 0);
        let k2t = complete_bipartite(2, 6);
        assert_eq!(pair_count_quantile(&k2t, 2, 1.0, None), 6);
        assert_eq!(pair_count_quantile(&k2t, 2, 1.0, Some(3)), 2);
    }

    #[test]
    fn few_paths_graph_has_no_bad_pairs() {
        let (g, report) =
            build_few_paths_graph(3, 54, 2, None, 1, PairScope::All, Caps::default()).unwrap();
        assert_eq!(report.q, 3);
        assert_eq!(report.vertices_before, 54);
        assert!(find_bad_pairs(&g, 2, 3, PairScope::All).pairs.is_empty());
        assert!(build_few_paths_graph(3, 15, 2, None, 1, PairScope::All, Caps::default()).is_err());
    }
}
