//! Monte Carlo statistics of random algebraic graphs: paths by type in a
//! union of independent samples, bad-pair counts, the small-or-large
//! dichotomy of path counts and high moments of typed path counts.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{random_algebraic_graph_with, resolve_degree, Caps, ConstructError};
use crate::ffield::{Field, FieldError};
use crate::graph::{find_bad_pairs, union_multigraph, BipartiteGraph, GraphError, Host, PairScope};
use crate::mpoly::system_rng;

/// Pairs sampled per seed for moment estimates.
pub const DEFAULT_MOMENT_PAIRS: usize = 200;

/// Stream used for pair sampling, far above the graph streams `0..h`.
const SAMPLING_STREAM: u64 = 1 << 40;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("path type of length {len} is longer than ell={ell}")]
    TypeTooLong { len: usize, ell: usize },
    #[error("type index {index} out of range for h={h}")]
    IndexOutOfRange { index: usize, h: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Sequence of constituent graphs the edges of a path must come from, in
/// order. Indices are zero-based; display is one-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathType {
    indices: Vec<usize>,
}

impl PathType {
    pub fn new(indices: Vec<usize>, h: usize, ell: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(StatsError::InvalidParams("empty path type".into()));
        }
        if indices.len() > ell {
            return Err(StatsError::TypeTooLong {
                len: indices.len(),
                ell,
            });
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= h) {
            return Err(StatsError::IndexOutOfRange { index, h });
        }
        Ok(PathType { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// All `h^r` types of length `r`, in lexicographic order.
    pub fn all_of_length(h: usize, r: usize) -> Vec<PathType> {
        let mut out = vec![Vec::new()];
        for _ in 0..r {
            out = out
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..h).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|indices| PathType { indices })
            .collect()
    }
}

impl fmt::Display for PathType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `h` graphs on a common vertex set together with their multigraph union,
/// keeping track of which constituent each edge came from.
#[derive(Debug, Clone)]
pub struct TaggedUnion {
    ell: usize,
    parts: Vec<BipartiteGraph>,
    union: BipartiteGraph,
}

impl TaggedUnion {
    pub fn new(parts: Vec<BipartiteGraph>, ell: usize) -> Result<Self> {
        let union = union_multigraph(&parts)?;
        Ok(TaggedUnion { ell, parts, union })
    }

    /// Union of `h` random algebraic graphs drawn from streams `0..h` of `seed`.
    pub fn sample(
        ell: u32,
        field: &Field,
        d_poly: u32,
        seed: u64,
        h: usize,
        caps: Caps,
    ) -> Result<Self> {
        if h == 0 {
            return Err(StatsError::InvalidParams("h must be at least 1".into()));
        }
        let parts = (0..h as u64)
            .map(|i| random_algebraic_graph_with(ell, field, d_poly, seed, i, caps).map(|r| r.0))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(parts, ell as usize)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn h(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[BipartiteGraph] {
        &self.parts
    }

    pub fn union(&self) -> &BipartiteGraph {
        &self.union
    }

    pub fn path_type(&self, indices: Vec<usize>) -> Result<PathType> {
        PathType::new(indices, self.h(), self.ell)
    }

    fn check_type(&self, ty: &PathType) -> Result<()> {
        PathType::new(ty.indices.clone(), self.h(), self.ell).map(|_| ())
    }

    /// Number of simple paths of type `ty` from `x` to every vertex.
    pub fn typed_counts_from(&self, x: u32, ty: &PathType) -> Result<Vec<u128>> {
        self.check_type(ty)?;
        let n = self.union.vertex_count();
        if x as usize >= n {
            return Err(StatsError::VertexOutOfRange(x));
        }
        let mut counts = vec![0u128; n];
        let mut on_path = vec![false; n];
        on_path[x as usize] = true;
        self.walk(x, 0, 1, ty.indices(), &mut on_path, &mut counts);
        Ok(counts)
    }

    fn walk(
        &self,
        v: u32,
        depth: usize,
        weight: u128,
        ty: &[usize],
        on_path: &mut [bool],
        counts: &mut [u128],
    ) {
        let part = &self.parts[ty[depth]];
        let weights = part.weights(v);
        for (i, &w) in part.neighbors(v).iter().enumerate() {
            if on_path[w as usize] {
                continue;
            }
            let total = weight.saturating_mul(weights.map_or(1, |ws| ws[i] as u128));
            if depth + 1 == ty.len() {
                counts[w as usize] = counts[w as usize].saturating_add(total);
            } else {
                on_path[w as usize] = true;
                self.walk(w, depth + 1, total, ty, on_path, counts);
                on_path[w as usize] = false;
            }
        }
    }

    /// Number of simple `x`-`y` paths whose `j`-th edge lies in constituent
    /// `ty[j]`.
    pub fn count_typed_paths(&self, x: u32, y: u32, ty: &PathType) -> Result<u128> {
        if y as usize >= self.union.vertex_count() {
            return Err(StatsError::VertexOutOfRange(y));
        }
        Ok(self.typed_counts_from(x, ty)?[y as usize])
    }
}

/// Whether a path of length `r` can join `x` and `y` in a bipartite host.
fn parity_admits<H: Host + ?Sized>(g: &H, x: u32, y: u32, r: usize) -> bool {
    x != y && ((g.side(x) == g.side(y)) == r.is_multiple_of(2))
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row per `(ell, q, h, seed)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRow {
    pub ell: u32,
    pub q: u32,
    pub h: usize,
    pub seed: u64,
    pub vertices: usize,
    pub multigraph_edges: u64,
    pub threshold: u128,
    pub pairs_examined: u64,
    pub bad_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPairExpectation {
    pub ell: u32,
    pub q: u32,
    pub h: usize,
    pub d_poly: u32,
    pub t_eff: u64,
    /// `T_eff · h^ell`
    pub threshold: u128,
    pub rows: Vec<SeedRow>,
    pub mean: f64,
    pub stderr: f64,
}

pub const MIN_SEEDS: usize = 10;

/// Mean number of `T_eff h^ell`-bad pairs in the union of `h` independent
/// samples, over seeds `first_seed..first_seed + num_seeds`.
pub fn estimate_bad_pair_expectation(
    ell: u32,
    q: u64,
    h: usize,
    t_eff: u64,
    num_seeds: usize,
    first_seed: u64,
    d_poly: Option<u32>,
) -> Result<BadPairExpectation> {
    if num_seeds < MIN_SEEDS {
        return Err(StatsError::InvalidParams(format!(
            "need at least {MIN_SEEDS} seeds, got {num_seeds}"
        )));
    }
    if t_eff == 0 {
        return Err(StatsError::InvalidParams("T must be positive".into()));
    }
    let d = resolve_degree(ell, d_poly)?;
    let field = Field::new(q)?;
    let threshold = (t_eff as u128).saturating_mul((h as u128).saturating_pow(ell));
    let rows = (first_seed..first_seed + num_seeds as u64)
        .into_par_iter()
        .map(|seed| {
            let tagged = TaggedUnion::sample(ell, &field, d, seed, h, Caps::default())?;
            let union = tagged.union();
            let scan = find_bad_pairs(union, threshold, ell as usize, PairScope::All);
            Ok(SeedRow {
                ell,
                q: field.order(),
                h,
                seed,
                vertices: union.vertex_count(),
                multigraph_edges: union.total_multiplicity(),
                threshold,
                pairs_examined: scan.pairs_examined,
                bad_pairs: scan.pairs.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<f64> = rows.iter().map(|r| r.bad_pairs as f64).collect();
    let (mean, stderr) = mean_and_stderr(&counts);
    Ok(BadPairExpectation {
        ell,
        q: field.order(),
        h,
        d_poly: d,
        t_eff,
        threshold,
        rows,
        mean,
        stderr,
    })
}

/// Per-pair typed path counts split at a probe threshold and at `q/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyBand {
    pub path_type: PathType,
    /// Count `c` is small when `c <= t_probe`.
    pub t_probe: u128,
    /// Count `c` is large when `c > t_probe` and `2c >= scale`.
    pub scale: u64,
    pub histogram: BTreeMap<u128, u64>,
    pub pairs: u64,
    pub small: u64,
    pub middle: u64,
    pub large: u64,
    pub middle_fraction: f64,
    /// Some pair fell strictly between the two branches.
    pub flagged: bool,
}

impl DichotomyBand {
    fn new(path_type: PathType, t_probe: u128, scale: u64) -> Self {
        DichotomyBand {
            path_type,
            t_probe,
            scale,
            histogram: BTreeMap::new(),
            pairs: 0,
            small: 0,
            middle: 0,
            large: 0,
            middle_fraction: 0.0,
            flagged: false,
        }
    }

    fn add(&mut self, count: u128, times: u64) {
        *self.histogram.entry(count).or_insert(0) += times;
        self.pairs += times;
        if count <= self.t_probe {
            self.small += times;
        } else if count.saturating_mul(2) >= self.scale as u128 {
            self.large += times;
        } else {
            self.middle += times;
        }
    }

    fn merge(&mut self, other: &DichotomyBand) {
        for (&c, &k) in &other.histogram {
            self.add(c, k);
        }
    }

    fn finish(&mut self) {
        self.middle_fraction = if self.pairs == 0 {
            0.0
        } else {
            self.middle as f64 / self.pairs as f64
        };
        self.flagged = self.middle > 0;
    }
}

/// Histogram of typed path counts over every unordered pair whose sides
/// admit a path of that length.
pub fn dichotomy_histogram(
    tagged: &TaggedUnion,
    ty: &PathType,
    t_probe: u128,
    scale: u64,
) -> Result<DichotomyBand> {
    tagged.check_type(ty)?;
    let g = tagged.union();
    let n = g.vertex_count() as u32;
    let r = ty.len();
    let partial = (0..n)
        .into_par_iter()
        .map(|x| {
            let counts = tagged.typed_counts_from(x, ty)?;
            let mut band = DichotomyBand::new(ty.clone(), t_probe, scale);
            for y in x + 1..n {
                if parity_admits(g, x, y, r) {
                    band.add(counts[y as usize], 1);
                }
            }
            Ok(band)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut band = DichotomyBand::new(ty.clone(), t_probe, scale);
    for p in &partial {
        band.merge(p);
    }
    band.finish();
    Ok(band)
}

/// Dichotomy bands for every path length `2..=ell` of a single random
/// algebraic graph, aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyScan {
    pub ell: u32,
    pub q: u32,
    pub d_poly: u32,
    pub seeds: Vec<u64>,
    pub bands: Vec<DichotomyBand>,
}

pub fn dichotomy_scan(
    ell: u32,
    q: u64,
    seeds: &[u64],
    t_probe: u128,
    d_poly: Option<u32>,
) -> Result<DichotomyScan> {
    if q < 5 {
        return Err(StatsError::InvalidParams(format!(
            "dichotomy scan needs q >= 5, got {q}"
        )));
    }
    if seeds.is_empty() {
        return Err(StatsError::InvalidParams("need at least one seed".into()));
    }
    let d = resolve_degree(ell, d_poly)?;
    let field = Field::new(q)?;
    let scale = field.order() as u64;
    let types: Vec<PathType> = (2..=ell as usize)
        .flat_map(|r| PathType::all_of_length(1, r))
        .collect();
    let mut bands: Vec<DichotomyBand> = types
        .iter()
        .map(|t| DichotomyBand::new(t.clone(), t_probe, scale))
        .collect();
    for &seed in seeds {
        let tagged = TaggedUnion::sample(ell, &field, d, seed, 1, Caps::default())?;
        for (band, ty) in bands.iter_mut().zip(&types) {
            band.merge(&dichotomy_histogram(&tagged, ty, t_probe, scale)?);
        }
    }
    for band in &mut bands {
        band.finish();
    }
    Ok(DichotomyScan {
        ell,
        q: field.order(),
        d_poly: d,
        seeds: seeds.to_vec(),
        bands,
    })
}

/// Empirical `2ell`-th moment of `|S_I|` for one path type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub path_type: PathType,
    pub power: u32,
    /// Mean of `|S_I|` itself.
    pub mean_count: f64,
    /// Mean of `|S_I|^power`, pooled over all sampled pairs.
    pub mean: f64,
    /// Standard error of the per-seed means.
    pub stderr: f64,
    pub max_count: u128,
    /// `2 ell^2`
    pub bound: f64,
    /// `mean <= bound + 3 stderr`
    pub within_bound: bool,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub ell: u32,
    pub q: u32,
    pub h: usize,
    pub d_poly: u32,
    pub seeds: Vec<u64>,
    pub pairs_per_seed: usize,
    pub estimates: Vec<MomentEstimate>,
}

/// Samples `pairs` pairs admitting a path of length `r`, deterministically
/// from `seed`.
fn sample_pairs<H: Host + ?Sized>(g: &H, r: usize, pairs: usize, seed: u64) -> Vec<(u32, u32)> {
    let n = g.vertex_count() as u32;
    let mut rng = system_rng(seed, SAMPLING_STREAM + r as u64);
    let mut out = Vec::with_capacity(pairs);
    if n < 2 {
        return out;
    }
    let mut attempts = 0usize;
    while out.len() < pairs && attempts < pairs.saturating_mul(50) {
        attempts += 1;
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if parity_admits(g, x, y, r) {
            out.push((x, y));
        }
    }
    out
}

/// `2ell`-th moments of typed path counts for every type of length
/// `1..=ell` over `[h]`, on `pairs_per_seed` sampled pairs per seed.
pub fn estimate_moments(
    ell: u32,
    q: u64,
    h: usize,
    seeds: &[u64],
    pairs_per_seed: usize,
    d_poly: Option<u32>,
) -> Result<MomentReport> {
    if seeds.len() < 2 || pairs_per_seed == 0 {
        return Err(StatsError::InvalidParams(
            "need at least two seeds and one pair per seed".into(),
        ));
    }
    let d = resolve_degree(ell, d_poly)?;
    let field = Field::new(q)?;
    let power = 2 * ell;
    let types: Vec<PathType> = (1..=ell as usize)
        .flat_map(|r| PathType::all_of_length(h, r))
        .collect();

    // per seed, per type: (sum of |S|, sum of |S|^power, max, samples)
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let tagged = TaggedUnion::sample(ell, &field, d, seed, h, Caps::default())?;
            types
                .iter()
                .map(|ty| {
                    let pairs = sample_pairs(tagged.union(), ty.len(), pairs_per_seed, seed);
                    let mut acc = (0f64, 0f64, 0u128, 0u64);
                    for (x, y) in pairs {
                        let c = tagged.count_typed_paths(x, y, ty)?;
                        acc.0 += c as f64;
                        acc.1 += (c as f64).powi(power as i32);
                        acc.2 = acc.2.max(c);
                        acc.3 += 1;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let bound = 2.0 * (ell * ell) as f64;
    let estimates = types
        .iter()
        .enumerate()
        .map(|(k, ty)| {
            let samples: u64 = per_seed.iter().map(|s| s[k].3).sum();
            let denom = samples.max(1) as f64;
            let seed_means: Vec<f64> = per_seed
                .iter()
                .filter(|s| s[k].3 > 0)
                .map(|s| s[k].1 / s[k].3 as f64)
                .collect();
            let (_, stderr) = mean_and_stderr(&seed_means);
            let mean = per_seed.iter().map(|s| s[k].1).sum::<f64>() / denom;
            MomentEstimate {
                path_type: ty.clone(),
                power,
                mean_count: per_seed.iter().map(|s| s[k].0).sum::<f64>() / denom,
                mean,
                stderr,
                max_count: per_seed.iter().map(|s| s[k].2).max().unwrap_or(0),
                bound,
                within_bound: mean <= bound + 3.0 * stderr,
                samples,
            }
        })
        .collect();
    Ok(MomentReport {
        ell,
        q: field.order(),
        h,
        d_poly: d,
        seeds: seeds.to_vec(),
        pairs_per_seed,
        estimates,
    })
}

/// True when each estimate is at most the previous one plus three combined
/// standard errors.
pub fn non_increasing_within_noise(points: &[(f64, f64)]) -> bool {
    points
        .windows(2)
        .all(|w| w[1].0 <= w[0].0 + 3.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, count_paths_upto, enumerate_paths_upto};

    #[test]
    fn type_validation() {
        assert!(matches!(
            PathType::new(vec![0, 0, 0], 2, 2),
            Err(StatsError::TypeTooLong { len: 3, ell: 2 })
        ));
        assert!(matches!(
            PathType::new(vec![2], 2, 2),
            Err(StatsError::IndexOutOfRange { index: 2, h: 2 })
        ));
        assert_eq!(PathType::all_of_length(2, 3).len(), 8);
        assert_eq!(
            PathType::new(vec![0, 1], 2, 2).unwrap().to_string(),
            "(1,2)"
        );
    }

    #[test]
    fn single_graph_types_sum_to_plain_counts() {
        let field = Field::new(3).unwrap();
        let tagged = TaggedUnion::sample(3, &field, 18, 4, 1, Caps::default()).unwrap();
        let g = tagged.union();
        let types: Vec<PathType> = (1..=3)
            .flat_map(|r| PathType::all_of_length(1, r))
            .collect();
        for x in 0..g.vertex_count() as u32 {
            let per_type: Vec<Vec<u128>> = types
                .iter()
                .map(|t| tagged.typed_counts_from(x, t).unwrap())
                .collect();
            for y in 0..g.vertex_count() as u32 {
                if x == y {
                    continue;
                }
                let sum: u128 = per_type.iter().map(|c| c[y as usize]).sum();
                assert_eq!(sum, count_paths_upto(g, x, y, 3).unwrap());
            }
        }
    }

    #[test]
    fn typed_counts_match_filtered_enumeration() {
        let field = Field::new(5).unwrap();
        let tagged = TaggedUnion::sample(2, &field, 8, 9, 2, Caps::default()).unwrap();
        let (g, parts) = (tagged.union(), tagged.parts());
        let types: Vec<PathType> = (1..=2)
            .flat_map(|r| PathType::all_of_length(2, r))
            .collect();
        for (x, y) in [(0u32, 25u32), (3, 40), (7, 12), (1, 2)] {
            for ty in &types {
                let oracle = enumerate_paths_upto(g, x, y, ty.len())
                    .unwrap()
                    .into_iter()
                    .filter(|p| p.len() == ty.len() + 1)
                    .filter(|p| {
                        p.windows(2)
                            .zip(ty.indices())
                            .all(|(e, &i)| parts[i].has_edge(e[0], e[1]))
                    })
                    .count() as u128;
                assert_eq!(
                    tagged.count_typed_paths(x, y, ty).unwrap(),
                    oracle,
                    "pair ({x},{y}) type {ty}"
                );
            }
        }
    }

    #[test]
    fn types_partition_weighted_union_counts() {
        let field = Field::new(3).unwrap();
        let tagged = TaggedUnion::sample(2, &field, 8, 2, 3, Caps::default()).unwrap();
        let g = tagged.union();
        for r in 1..=2 {
            let types = PathType::all_of_length(3, r);
            for x in 0..g.vertex_count() as u32 {
                let total: Vec<u128> = types
                    .iter()
                    .map(|t| tagged.typed_counts_from(x, t).unwrap())
                    .fold(vec![0; g.vertex_count()], |acc, c| {
                        acc.iter().zip(&c).map(|(a, b)| a + b).collect()
                    });
                for y in 0..g.vertex_count() as u32 {
                    if y == x {
                        continue;
                    }
                    let weighted: u128 = enumerate_paths_upto(g, x, y, r)
                        .unwrap()
                        .iter()
                        .filter(|p| p.len() == r + 1)
                        .map(|p| {
                            p.windows(2)
                                .map(|e| g.multiplicity(e[0], e[1]) as u128)
                                .product::<u128>()
                        })
                        .sum();
                    assert_eq!(total[y as usize], weighted);
                }
            }
        }
    }

    #[test]
    fn threshold_one_counts_connected_pairs() {
        let est = estimate_bad_pair_expectation(2, 3, 1, 1, 10, 0, None).unwrap();
        let field = Field::new(3).unwrap();
        for row in &est.rows {
            let tagged = TaggedUnion::sample(2, &field, 8, row.seed, 1, Caps::default()).unwrap();
            let g = tagged.union();
            let n = g.vertex_count() as u32;
            let mut reachable = 0;
            for x in 0..n {
                for y in x + 1..n {
                    if count_paths_upto(g, x, y, 2).unwrap() > 0 {
                        reachable += 1;
                    }
                }
            }
            assert_eq!(row.bad_pairs, reachable);
            assert!(row.bad_pairs as u64 <= (n as u64) * (n as u64));
        }
        assert!(estimate_bad_pair_expectation(2, 3, 1, 1, 9, 0, None).is_err());
    }

    #[test]
    fn complete_bipartite_is_all_large() {
        let m = 6;
        let tagged = TaggedUnion::new(vec![complete_bipartite(m, m)], 3).unwrap();
        for r in 2..=3 {
            let ty = tagged.path_type(vec![0; r]).unwrap();
            let band = dichotomy_histogram(&tagged, &ty, 2, m as u64).unwrap();
            assert_eq!(band.large, band.pairs);
            assert!(!band.flagged);
        }
    }

    #[test]
    fn zero_and_one_are_small() {
        let mut band = DichotomyBand::new(PathType::all_of_length(1, 2).remove(0), 1, 11);
        band.add(0, 5);
        band.add(1, 3);
        band.add(3, 1);
        band.add(6, 2);
        band.finish();
        assert_eq!((band.small, band.middle, band.large), (8, 1, 2));
        assert!(band.flagged);
    }

    #[test]
    fn fourth_moment_of_common_neighbors_is_exact() {
        // ell = 2, r = 2: |S| counts common neighbors. Degree 8 makes the
        // 2k <= 8 incidences of k distinct middle vertices independent, so
        // E|S|^4 = sum_k S(4,k) (q^2)_k q^(-2k), tending to the Bell number 15.
        let q = 13.0f64;
        let stirling = [1.0, 7.0, 6.0, 1.0];
        let exact: f64 = (1..=4)
            .map(|k| {
                let falling: f64 = (0..k).map(|i| q * q - i as f64).product();
                stirling[k - 1] * falling / (q * q).powi(k as i32)
            })
            .sum();
        let seeds: Vec<u64> = (0..30).collect();
        let report = estimate_moments(2, 13, 1, &seeds, 200, None).unwrap();
        let pair = &report.estimates[1];
        assert_eq!(pair.path_type.len(), 2);
        assert!((pair.mean - exact).abs() <= 4.0 * pair.stderr, "{} vs {exact}", pair.mean);
        // the literal bound 2 ell^2 = 8 sits below the exact value
        assert!(exact > pair.bound);
    }

    #[test]
    fn edge_moment_matches_edge_probability() {
        // a single edge has |S| in {0, 1}, present with probability exactly 1/q
        let seeds: Vec<u64> = (0..30).collect();
        let report = estimate_moments(2, 7, 1, &seeds, 200, None).unwrap();
        let edge = &report.estimates[0];
        assert_eq!(edge.path_type.len(), 1);
        assert!(
            (edge.mean - 1.0 / 7.0).abs() <= 4.0 * edge.stderr.max(0.005),
            "{edge:?}"
        );
        assert_eq!(edge.mean, edge.mean_count);
        assert!(edge.within_bound);
    }

    #[test]
    fn sampling_is_deterministic() {
        let seeds = [3u64, 4];
        let a = estimate_moments(2, 5, 2, &seeds, 50, None).unwrap();
        let b = estimate_moments(2, 5, 2, &seeds, 50, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimates.len(), 2 + 4);
    }

    #[test]
    fn trend_check() {
        assert!(non_increasing_within_noise(&[
            (5.0, 0.1),
            (5.2, 0.1),
            (4.0, 0.1)
        ]));
        assert!(!non_increasing_within_noise(&[(5.0, 0.1), (6.0, 0.1)]));
    }
}
