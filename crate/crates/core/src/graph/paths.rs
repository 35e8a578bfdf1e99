use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphError, Host};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PairScope {
    /// Same-side and cross-side pairs.
    #[default]
    All,
    /// Only pairs with one endpoint on each side.
    CrossSide,
}

impl PairScope {
    fn admits<H: Host + ?Sized>(self, g: &H, x: u32, y: u32) -> bool {
        match self {
            PairScope::All => true,
            PairScope::CrossSide => g.side(x) != g.side(y),
        }
    }
}

struct Dfs<'a, H: Host + ?Sized> {
    g: &'a H,
    on_path: Vec<bool>,
    max_len: usize,
}

impl<H: Host + ?Sized> Dfs<'_, H> {
    /// Walks every simple path leaving `v` at depth `depth`, calling `visit`
    /// with the endpoint, its depth and the product of edge weights.
    fn walk(
        &mut self,
        root: u32,
        v: u32,
        depth: usize,
        weight: u128,
        visit: &mut impl FnMut(u32, usize, u128),
    ) {
        if depth == self.max_len {
            return;
        }
        let g = self.g;
        let weights = g.weights(v);
        for (i, &w) in g.neighbors(v).iter().enumerate() {
            if self.on_path[w as usize] {
                continue;
            }
            let step = weights.map_or(1, |ws| ws[i] as u128);
            let total = weight.saturating_mul(step);
            if let (Some(a), Some(b)) = (g.side(root), g.side(w)) {
                debug_assert_eq!((depth + 1) % 2 == 1, a != b, "bipartite parity violated");
            }
            visit(w, depth + 1, total);
            self.on_path[w as usize] = true;
            self.walk(root, w, depth + 1, total, visit);
            self.on_path[w as usize] = false;
        }
    }
}

/// Weighted number of simple paths from `x` to every vertex with at most
/// `max_len` edges. Entry `x` is zero.
pub fn path_counts_from<H: Host + ?Sized>(g: &H, x: u32, max_len: usize) -> Vec<u128> {
    let mut counts = vec![0u128; g.vertex_count()];
    let mut dfs = Dfs {
        g,
        on_path: vec![false; g.vertex_count()],
        max_len,
    };
    dfs.on_path[x as usize] = true;
    dfs.walk(x, x, 0, 1, &mut |w, _, weight| {
        counts[w as usize] = counts[w as usize].saturating_add(weight);
    });
    counts
}

/// Number of distinct simple `x`-`y` paths of length at most `max_len`; in a
/// multigraph each path counts with the product of its edge multiplicities.
pub fn count_paths_upto<H: Host + ?Sized>(
    g: &H,
    x: u32,
    y: u32,
    max_len: usize,
) -> Result<u128, GraphError> {
    if max_len < 1 {
        return Err(GraphError::ZeroLength);
    }
    if x == y {
        return Err(GraphError::SameEndpoints);
    }
    let n = g.vertex_count() as u32;
    for v in [x, y] {
        if v >= n {
            return Err(GraphError::VertexOutOfRange(v));
        }
    }
    let mut total = 0u128;
    let mut dfs = Dfs {
        g,
        on_path: vec![false; g.vertex_count()],
        max_len,
    };
    dfs.on_path[x as usize] = true;
    // paths through y are not continued, so stop at y by marking it visited
    // only after it is counted
    dfs.walk(x, x, 0, 1, &mut |w, _, weight| {
        if w == y {
            total = total.saturating_add(weight);
        }
    });
    Ok(total)
}

/// Explicit list of the simple `x`-`y` paths of length at most `max_len`.
pub fn enumerate_paths_upto<H: Host + ?Sized>(
    g: &H,
    x: u32,
    y: u32,
    max_len: usize,
) -> Result<Vec<Vec<u32>>, GraphError> {
    if max_len < 1 {
        return Err(GraphError::ZeroLength);
    }
    if x == y {
        return Err(GraphError::SameEndpoints);
    }
    fn rec<H: Host + ?Sized>(
        g: &H,
        path: &mut Vec<u32>,
        y: u32,
        max_len: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        let v = *path.last().unwrap();
        if v == y {
            out.push(path.clone());
            return;
        }
        if path.len() > max_len {
            return;
        }
        for &w in g.neighbors(v) {
            if !path.contains(&w) {
                path.push(w);
                rec(g, path, y, max_len, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(g, &mut vec![x], y, max_len, &mut out);
    Ok(out)
}

/// Result of a bad-pair scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPairScan {
    /// Pairs `(x, y)` with `x < y` and at least `threshold` paths.
    pub pairs: Vec<(u32, u32)>,
    pub threshold: u128,
    pub max_len: usize,
    pub pairs_examined: u64,
    /// True when only a random subset of pairs was examined.
    pub sampled: bool,
}

/// Every pair `{x, y}` joined by at least `threshold` paths of length at most
/// `max_len`.
pub fn find_bad_pairs<H: Host + ?Sized>(
    g: &H,
    threshold: u128,
    max_len: usize,
    scope: PairScope,
) -> BadPairScan {
    let n = g.vertex_count() as u32;
    let per_source: Vec<(Vec<(u32, u32)>, u64)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let counts = path_counts_from(g, x, max_len);
            let mut bad = Vec::new();
            let mut examined = 0u64;
            for y in x + 1..n {
                if !scope.admits(g, x, y) {
                    continue;
                }
                examined += 1;
                if counts[y as usize] >= threshold {
                    bad.push((x, y));
                }
            }
            (bad, examined)
        })
        .collect();
    let pairs_examined = per_source.iter().map(|p| p.1).sum();
    BadPairScan {
        pairs: per_source.into_iter().flat_map(|p| p.0).collect(),
        threshold,
        max_len,
        pairs_examined,
        sampled: false,
    }
}

/// Like [`find_bad_pairs`] but only over `samples` uniformly drawn pairs.
pub fn find_bad_pairs_sampled<H: Host + ?Sized>(
    g: &H,
    threshold: u128,
    max_len: usize,
    scope: PairScope,
    samples: usize,
    seed: u64,
) -> BadPairScan {
    let n = g.vertex_count() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = Vec::with_capacity(samples);
    if n >= 2 {
        let mut attempts = 0usize;
        while drawn.len() < samples && attempts < samples.saturating_mul(20) {
            attempts += 1;
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && scope.admits(g, a, b) {
                drawn.push((a.min(b), a.max(b)));
            }
        }
    }
    drawn.sort_unstable();
    drawn.dedup();
    let pairs = drawn
        .par_iter()
        .filter(|&&(x, y)| count_paths_upto(g, x, y, max_len).is_ok_and(|c| c >= threshold))
        .copied()
        .collect();
    BadPairScan {
        pairs,
        threshold,
        max_len,
        pairs_examined: drawn.len() as u64,
        sampled: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, even_cycle, BipartiteGraph, SimpleGraph};

    #[test]
    fn complete_bipartite_counts() {
        let k33 = complete_bipartite(3, 3);
        assert_eq!(count_paths_upto(&k33, 0, 3, 3).unwrap(), 5);
        // same side, only length-1 paths allowed
        assert_eq!(count_paths_upto(&k33, 0, 1, 1).unwrap(), 0);
        assert_eq!(count_paths_upto(&k33, 0, 1, 2).unwrap(), 3);
    }

    #[test]
    fn cycle_antipodes() {
        let c6 = even_cycle(3);
        // vertex 0 is cycle position 0, the antipode (position 3) is right id 3 + 1
        assert_eq!(count_paths_upto(&c6, 0, 4, 3).unwrap(), 2);
        assert_eq!(enumerate_paths_upto(&c6, 0, 4, 3).unwrap().len(), 2);
    }

    #[test]
    fn errors() {
        let k22 = complete_bipartite(2, 2);
        assert!(matches!(
            count_paths_upto(&k22, 0, 2, 0),
            Err(GraphError::ZeroLength)
        ));
        assert!(matches!(
            count_paths_upto(&k22, 1, 1, 2),
            Err(GraphError::SameEndpoints)
        ));
    }

    #[test]
    fn multiplicities_multiply_along_paths() {
        // 0 - 2 (x2) - 1 - 3 (x3) ... path 0-2-1-3 has weight 2*1*3 = 6
        let g =
            BipartiteGraph::from_weighted_edges(2, 2, [(0, 2, 2), (1, 2, 1), (1, 3, 3)]).unwrap();
        assert_eq!(count_paths_upto(&g, 0, 3, 3).unwrap(), 6);
        assert_eq!(count_paths_upto(&g, 0, 1, 2).unwrap(), 2);
    }

    #[test]
    fn bad_pairs() {
        let k2t = complete_bipartite(2, 5);
        let scan = find_bad_pairs(&k2t, 5, 2, PairScope::All);
        assert!(scan.pairs.contains(&(0, 1)));
        let cross = find_bad_pairs(&k2t, 5, 2, PairScope::CrossSide);
        assert!(cross.pairs.is_empty());

        let c6 = even_cycle(3);
        let scan = find_bad_pairs(&c6, 1, 3, PairScope::All);
        for (u, v, _) in c6.edges() {
            assert!(scan.pairs.contains(&(u.min(v), u.max(v))));
        }
        assert_eq!(scan.pairs_examined, 15);

        let sampled = find_bad_pairs_sampled(&k2t, 5, 2, PairScope::All, 200, 1);
        assert!(sampled.sampled);
        assert!(sampled.pairs.iter().all(|p| *p == (0, 1)));
    }

    #[test]
    fn works_on_simple_graphs() {
        let tri = SimpleGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(count_paths_upto(&tri, 0, 1, 2).unwrap(), 2);
    }
}
