//! Degree regularization: bipartize, peel to large minimum degree, then trim
//! vertices whose degree exceeds `Δ` times the minimum.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::graph::{BipartiteGraph, Host, Side, SimpleGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizeReport {
    pub ell: usize,
    pub c: f64,
    pub input_vertices: usize,
    pub input_edges: usize,
    /// Edges kept by the bipartition (at least half of the input).
    pub cut_edges: usize,
    /// True when the input was already bipartite.
    pub was_bipartite: bool,
    /// Vertices of degree below this were peeled, by default half the average
    /// degree of the bipartized graph.
    pub peel_threshold: f64,
    /// Vertices removed for exceeding `Δ` times the minimum degree.
    pub trimmed: usize,
    pub vertices: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    /// `max_degree <= Δ · min_degree`
    pub degree_ratio_ok: bool,
    /// Whether the input has at least `6 ℓ c n^(1+1/ℓ)` edges.
    pub precondition_met: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Regularized {
    pub graph: BipartiteGraph,
    /// Input id of every output vertex.
    pub original_ids: Vec<u32>,
    pub report: RegularizeReport,
}

/// Side assignment cutting at least half of the edges. Exact for bipartite
/// input.
pub fn max_cut_sides(g: &SimpleGraph) -> (Vec<Side>, bool) {
    if let Some(sides) = g.bipartition() {
        return (sides, true);
    }
    let n = g.vertex_count();
    let mut side: Vec<Option<Side>> = vec![None; n];
    for v in 0..n as u32 {
        let (mut left, mut right) = (0usize, 0usize);
        for &w in g.neighbors(v) {
            match side[w as usize] {
                Some(Side::Left) => left += 1,
                Some(Side::Right) => right += 1,
                None => {}
            }
        }
        side[v as usize] = Some(if left > right {
            Side::Right
        } else {
            Side::Left
        });
    }
    let mut side: Vec<Side> = side.into_iter().map(Option::unwrap).collect();
    // flip any vertex with more neighbors on its own side; the cut grows
    // strictly, so this terminates
    loop {
        let mut changed = false;
        for v in 0..n as u32 {
            let same = g
                .neighbors(v)
                .iter()
                .filter(|&&w| side[w as usize] == side[v as usize])
                .count();
            if 2 * same > g.degree(v) {
                side[v as usize] = match side[v as usize] {
                    Side::Left => Side::Right,
                    Side::Right => Side::Left,
                };
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (side, false)
}

fn degrees_within(g: &SimpleGraph, alive: &[bool]) -> Vec<usize> {
    (0..g.vertex_count() as u32)
        .map(|v| {
            if alive[v as usize] {
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| alive[w as usize])
                    .count()
            } else {
                0
            }
        })
        .collect()
}

/// Removes vertices of degree below `threshold` until none is left.
fn peel(g: &SimpleGraph, alive: &mut [bool], threshold: f64) {
    let mut deg = degrees_within(g, alive);
    let mut stack: Vec<u32> = (0..g.vertex_count() as u32)
        .filter(|&v| alive[v as usize] && (deg[v as usize] as f64) < threshold)
        .collect();
    while let Some(v) = stack.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for &w in g.neighbors(v) {
            if alive[w as usize] {
                deg[w as usize] -= 1;
                if (deg[w as usize] as f64) < threshold {
                    stack.push(w);
                }
            }
        }
    }
}

/// `threshold` overrides the peeling threshold, which defaults to half the
/// average degree after bipartization.
pub fn regularize_degrees<H: Host + ?Sized>(
    g: &H,
    ell: usize,
    c: f64,
    threshold: Option<f64>,
) -> Regularized {
    let simple = SimpleGraph::from_host(g);
    let n = simple.vertex_count();
    let input_edges = simple.edge_count();
    let (sides, was_bipartite) = max_cut_sides(&simple);
    let cut = SimpleGraph::from_edges(
        n,
        simple
            .edges()
            .filter(|&(a, b)| sides[a as usize] != sides[b as usize]),
    )
    .expect("subgraph of a valid graph");
    let cut_edges = cut.edge_count();

    let mut alive = vec![true; n];
    let peel_threshold = threshold.unwrap_or(if n == 0 {
        0.0
    } else {
        cut_edges as f64 / n as f64
    });
    peel(&cut, &mut alive, peel_threshold);

    let delta = BigUint::from(20 * ell).pow(2 * ell as u32);
    let mut trimmed = 0;
    loop {
        let deg = degrees_within(&cut, &alive);
        let live: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        let Some(min) = live.iter().map(|&v| deg[v]).min() else {
            break;
        };
        let cap = &delta * min;
        let over: Vec<usize> = live
            .into_iter()
            .filter(|&v| BigUint::from(deg[v]) > cap)
            .collect();
        if over.is_empty() {
            break;
        }
        trimmed += over.len();
        for v in over {
            alive[v] = false;
        }
        peel(&cut, &mut alive, peel_threshold);
    }

    // relabel: surviving left vertices first
    let mut original_ids: Vec<u32> = (0..n as u32)
        .filter(|&v| alive[v as usize] && sides[v as usize] == Side::Left)
        .collect();
    let left = original_ids.len();
    original_ids
        .extend((0..n as u32).filter(|&v| alive[v as usize] && sides[v as usize] == Side::Right));
    let mut new_id = vec![u32::MAX; n];
    for (i, &v) in original_ids.iter().enumerate() {
        new_id[v as usize] = i as u32;
    }
    let edges = cut
        .edges()
        .filter(|&(a, b)| alive[a as usize] && alive[b as usize])
        .map(|(a, b)| (new_id[a as usize], new_id[b as usize]));
    let graph = BipartiteGraph::from_edges(left, original_ids.len() - left, edges)
        .expect("cut edges cross sides");

    let degrees = graph.degrees();
    let min_degree = degrees.iter().copied().min().unwrap_or(0);
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let needed = 6.0 * ell as f64 * c * (n as f64).powf(1.0 + 1.0 / ell as f64);
    let precondition_met = input_edges as f64 >= needed;
    let failure = if graph.vertex_count() == 0 {
        Some(format!(
            "nothing survives peeling at threshold {peel_threshold:.3}{}",
            if precondition_met {
                ""
            } else {
                "; edge-count precondition unmet"
            }
        ))
    } else {
        None
    };
    let report = RegularizeReport {
        ell,
        c,
        input_vertices: n,
        input_edges,
        cut_edges,
        was_bipartite,
        peel_threshold,
        trimmed,
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        min_degree,
        max_degree,
        degree_ratio_ok: BigUint::from(max_degree) <= &delta * min_degree,
        precondition_met,
        failure,
    };
    Regularized {
        graph,
        original_ids,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, even_cycle};

    #[test]
    fn star_peels_away() {
        let star = complete_bipartite(1, 6);
        // default threshold 6/7 keeps everything
        assert!(regularize_degrees(&star, 2, 1.0, None)
            .report
            .failure
            .is_none());
        let r = regularize_degrees(&star, 2, 1.0, Some(2.0));
        assert!(r.report.failure.is_some());
        assert_eq!(r.graph.vertex_count(), 0);
    }

    #[test]
    fn bipartite_input_is_kept() {
        let c8 = even_cycle(4);
        let r = regularize_degrees(&c8, 2, 0.1, None);
        assert!(r.report.was_bipartite);
        assert_eq!(r.report.cut_edges, 8);
        assert_eq!(r.graph.edge_count(), 8);
        assert_eq!(r.report.min_degree, 2);
    }

    #[test]
    fn odd_cycle_keeps_half() {
        let c5 = SimpleGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let (sides, bip) = max_cut_sides(&c5);
        assert!(!bip);
        let cut = c5
            .edges()
            .filter(|&(a, b)| sides[a as usize] != sides[b as usize])
            .count();
        assert!(cut >= 3);
    }
}
