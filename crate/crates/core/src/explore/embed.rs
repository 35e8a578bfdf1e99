//! Turning many linear paths from one anchor into a theta subgraph.
//!
//! Given an anchor `v_{i-1}`, children `A` of the anchor in `L_i` and targets
//! `B` in `L_k`: trim the families of linear `A`-`B` paths until every
//! target keeps many paths and every surviving prefix extends in `ℓt` ways,
//! pick `ℓt` paths into each target that only share the target, embed a
//! spider with `t` legs of length `ℓ-k+i-1` into the graph spanned by the
//! last two layers of the surviving paths, and close each leg through a
//! fresh path back to the anchor.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Constants, ExplorationState, Status};
use crate::graph::Host;
use crate::theta::ThetaWitness;

/// Largest number of linear paths enumerated for one embedding attempt.
pub const EMBED_PATH_CAP: usize = 200_000;
const ROOT_ATTEMPTS: usize = 256;
const LEG_SEARCH_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EmbedOutcome {
    Witness,
    Failed { part: u8, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub anchor: u32,
    /// Layer of the children `A`; the anchor sits in layer `i - 1`.
    pub i: usize,
    pub k: usize,
    pub a_size: usize,
    pub b_size: usize,
    /// `P(A, B)`
    pub paths: usize,
    /// `P(A,B)/|A| > 2ℓt(Δd)^(k-i-1)`
    pub hypothesis_a: bool,
    /// `P(A,B)/|B| > R_(k-i)`
    pub hypothesis_b: bool,
    pub surviving_targets: usize,
    pub surviving_paths: usize,
    pub removed_by_target_rule: usize,
    pub removed_by_prefix_rule: usize,
    /// Whether fewer than `P(A,B)` paths were removed; only meaningful when
    /// both hypotheses hold.
    pub removal_guard: Option<bool>,
    /// Targets that kept `ℓt` paths disjoint apart from the target.
    pub targets_with_fan: usize,
    pub targets_without_fan: usize,
    /// Most paths into one target meeting the interior of a picked path.
    pub max_intersecting: usize,
    /// `R_(k-i) / (2ℓt)`
    pub intersect_bound: String,
    pub contact_layer: usize,
    pub h_min_degree: usize,
    pub leg_length: usize,
    pub outcome: EmbedOutcome,
    pub witness: Option<ThetaWitness>,
}

fn enumerate_linear<H: Host + ?Sized>(
    state: &ExplorationState<'_, H>,
    a: u32,
    target_layer: usize,
    targets: &BTreeSet<u32>,
    out: &mut Vec<Vec<u32>>,
) -> bool {
    fn rec<H: Host + ?Sized>(
        s: &ExplorationState<'_, H>,
        path: &mut Vec<u32>,
        layer: usize,
        target_layer: usize,
        targets: &BTreeSet<u32>,
        out: &mut Vec<Vec<u32>>,
    ) -> bool {
        let v = *path.last().unwrap();
        if layer == target_layer {
            if targets.contains(&v) {
                out.push(path.clone());
            }
            return out.len() <= EMBED_PATH_CAP;
        }
        for &w in s.host().neighbors(v) {
            if s.status(w) == Status::Layer(layer + 1) {
                path.push(w);
                let ok = rec(s, path, layer + 1, target_layer, targets, out);
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let Some(layer) = state.layer_of(a) else {
        return true;
    };
    rec(state, &mut vec![a], layer, target_layer, targets, out)
}

/// Path of exactly `len` edges from `start` in `h`, avoiding `used`, ending
/// in `ends`. Depth-first with smallest ids first.
fn find_leg(
    h: &BTreeMap<u32, Vec<u32>>,
    start: u32,
    len: usize,
    used: &BTreeSet<u32>,
    ends: &BTreeSet<u32>,
    budget: &mut u64,
) -> Option<Vec<u32>> {
    fn rec(
        h: &BTreeMap<u32, Vec<u32>>,
        path: &mut Vec<u32>,
        len: usize,
        used: &BTreeSet<u32>,
        ends: &BTreeSet<u32>,
        budget: &mut u64,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let v = *path.last().unwrap();
        if path.len() == len + 1 {
            return ends.contains(&v);
        }
        for &w in &h[&v] {
            if used.contains(&w) || path.contains(&w) {
                continue;
            }
            path.push(w);
            if rec(h, path, len, used, ends, budget) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = vec![start];
    rec(h, &mut path, len, used, ends, budget).then_some(path)
}

pub fn embed_theta<H: Host + ?Sized>(
    state: &ExplorationState<'_, H>,
    constants: &Constants,
    anchor: u32,
    a: &[u32],
    b: &[u32],
) -> EmbedReport {
    let ell = constants.ell;
    let t = constants.t;
    let lt = ell * t;
    let k = state.stage();
    let i = state.layer_of(anchor).map_or(0, |l| l + 1);
    let span = k.saturating_sub(i);
    let r_threshold = constants.r.get(span).cloned().unwrap_or_default();
    let mut report = EmbedReport {
        anchor,
        i,
        k,
        a_size: a.len(),
        b_size: b.len(),
        paths: 0,
        hypothesis_a: false,
        hypothesis_b: false,
        surviving_targets: 0,
        surviving_paths: 0,
        removed_by_target_rule: 0,
        removed_by_prefix_rule: 0,
        removal_guard: None,
        targets_with_fan: 0,
        targets_without_fan: 0,
        max_intersecting: 0,
        intersect_bound: (&r_threshold / BigUint::from(2 * lt)).to_string(),
        contact_layer: 0,
        h_min_degree: 0,
        leg_length: (ell + i).saturating_sub(k + 1),
        outcome: EmbedOutcome::Failed {
            part: 1,
            reason: String::new(),
        },
        witness: None,
    };
    let fail = |mut report: EmbedReport, part: u8, reason: String| {
        report.outcome = EmbedOutcome::Failed { part, reason };
        report
    };
    if i == 0 || i >= k || a.is_empty() || b.is_empty() {
        return fail(
            report,
            1,
            "anchor must sit below layer k-1 with nonempty A and B".into(),
        );
    }

    // Part 1: trim path families
    let targets: BTreeSet<u32> = b.iter().copied().collect();
    let mut paths = Vec::new();
    for &x in a {
        if !enumerate_linear(state, x, k, &targets, &mut paths) {
            return fail(
                report,
                1,
                format!("more than {EMBED_PATH_CAP} linear paths"),
            );
        }
    }
    let total = paths.len();
    report.paths = total;
    let delta_d = constants.delta_d(state.d());
    let a_bound = BigUint::from(2 * lt) * delta_d.pow((k - i - 1) as u32);
    report.hypothesis_a = BigUint::from(total) > a_bound * a.len();
    report.hypothesis_b = BigUint::from(total) > &r_threshold * b.len();

    let mut alive = vec![true; total];
    let mut prefix_id: HashMap<&[u32], usize> = HashMap::new();
    let mut prefix_of = Vec::with_capacity(total);
    for p in &paths {
        let next = prefix_id.len();
        prefix_of.push(*prefix_id.entry(&p[..p.len() - 1]).or_insert(next));
    }
    let mut prefix_count = vec![0usize; prefix_id.len()];
    let mut prefix_members: Vec<Vec<usize>> = vec![Vec::new(); prefix_id.len()];
    let mut target_count: BTreeMap<u32, usize> = targets.iter().map(|&x| (x, 0)).collect();
    let mut target_members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (idx, p) in paths.iter().enumerate() {
        prefix_count[prefix_of[idx]] += 1;
        prefix_members[prefix_of[idx]].push(idx);
        *target_count.get_mut(p.last().unwrap()).unwrap() += 1;
        target_members
            .entry(*p.last().unwrap())
            .or_default()
            .push(idx);
    }
    let r_cap = r_threshold.to_u128().unwrap_or(u128::MAX);
    let mut live_targets: BTreeSet<u32> = targets.clone();
    loop {
        let mut changed = false;
        let drop: Vec<u32> = live_targets
            .iter()
            .copied()
            .filter(|x| 2 * target_count[x] as u128 <= r_cap)
            .collect();
        for x in drop {
            live_targets.remove(&x);
            changed = true;
            for &idx in target_members.get(&x).map_or(&[][..], |v| v.as_slice()) {
                if std::mem::replace(&mut alive[idx], false) {
                    prefix_count[prefix_of[idx]] -= 1;
                    report.removed_by_target_rule += 1;
                }
            }
            target_count.insert(x, 0);
        }
        for pid in 0..prefix_count.len() {
            if prefix_count[pid] > 0 && prefix_count[pid] < lt {
                changed = true;
                for &idx in &prefix_members[pid] {
                    if std::mem::replace(&mut alive[idx], false) {
                        *target_count.get_mut(paths[idx].last().unwrap()).unwrap() -= 1;
                        report.removed_by_prefix_rule += 1;
                    }
                }
                prefix_count[pid] = 0;
            }
        }
        if !changed {
            break;
        }
    }
    let removed = report.removed_by_target_rule + report.removed_by_prefix_rule;
    if report.hypothesis_a && report.hypothesis_b {
        report.removal_guard = Some(removed < total);
    }
    report.surviving_targets = live_targets.len();
    report.surviving_paths = total - removed;
    if live_targets.is_empty() {
        return fail(report, 1, "trimming removed every target".into());
    }

    // Part 2: ℓt paths into each target, disjoint apart from the target
    let mut fans: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &x in &live_targets {
        let members: Vec<usize> = target_members[&x]
            .iter()
            .copied()
            .filter(|&idx| alive[idx])
            .collect();
        let mut taken: BTreeSet<u32> = BTreeSet::new();
        let mut fan = Vec::new();
        for &idx in &members {
            let interior = &paths[idx][..paths[idx].len() - 1];
            if interior.iter().any(|v| taken.contains(v)) {
                continue;
            }
            let meets = members
                .iter()
                .filter(|&&o| {
                    paths[o][..paths[o].len() - 1]
                        .iter()
                        .any(|v| interior.contains(v))
                })
                .count();
            report.max_intersecting = report.max_intersecting.max(meets);
            taken.extend(interior.iter().copied());
            fan.push(idx);
            if fan.len() == lt {
                break;
            }
        }
        if fan.len() == lt {
            fans.insert(x, fan);
        }
    }
    report.targets_with_fan = fans.len();
    report.targets_without_fan = live_targets.len() - fans.len();
    if fans.is_empty() {
        return fail(
            report,
            2,
            format!("no target has {lt} paths disjoint apart from the target"),
        );
    }

    // Part 3: spider in H, then close the legs
    let ends: BTreeSet<u32> = fans.keys().copied().collect();
    let contact: BTreeSet<u32> = fans
        .keys()
        .flat_map(|x| target_members[x].iter().copied().filter(|&idx| alive[idx]))
        .map(|idx| paths[idx][paths[idx].len() - 2])
        .collect();
    report.contact_layer = contact.len();
    let mut h: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &v in contact.iter().chain(ends.iter()) {
        let other = if contact.contains(&v) {
            &ends
        } else {
            &contact
        };
        let nbrs: Vec<u32> = state
            .host()
            .neighbors(v)
            .iter()
            .copied()
            .filter(|w| other.contains(w))
            .collect();
        h.insert(v, nbrs);
    }
    report.h_min_degree = h.values().map(Vec::len).min().unwrap_or(0);

    let leg = report.leg_length;
    let candidates: Vec<u32> = if leg.is_multiple_of(2) {
        ends.iter().copied().collect()
    } else {
        contact.iter().copied().collect()
    };
    let mut budget = LEG_SEARCH_BUDGET;
    for &u in candidates.iter().take(ROOT_ATTEMPTS) {
        let mut used: BTreeSet<u32> = BTreeSet::from([u]);
        let mut legs: Vec<Vec<u32>> = Vec::new();
        if leg == 0 {
            legs = vec![vec![u]; t];
        } else {
            for _ in 0..t {
                match find_leg(&h, u, leg, &used, &ends, &mut budget) {
                    Some(path) => {
                        used.extend(path.iter().copied());
                        legs.push(path);
                    }
                    None => break,
                }
            }
            if legs.len() < t {
                continue;
            }
        }
        // close each leg end through an unused path of its fan
        let mut closing: Vec<Vec<u32>> = Vec::new();
        let mut picked_from: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
        for l in &legs {
            let end = *l.last().unwrap();
            let chosen = fans[&end].iter().copied().find(|&idx| {
                !picked_from.get(&end).is_some_and(|s| s.contains(&idx))
                    && paths[idx][..paths[idx].len() - 1]
                        .iter()
                        .all(|v| !used.contains(v))
            });
            let Some(idx) = chosen else {
                break;
            };
            picked_from.entry(end).or_default().insert(idx);
            used.extend(paths[idx][..paths[idx].len() - 1].iter().copied());
            closing.push(paths[idx].clone());
        }
        if closing.len() < t {
            continue;
        }
        let theta_paths: Vec<Vec<u32>> = legs
            .iter()
            .zip(&closing)
            .map(|(l, c)| {
                let mut p = vec![anchor];
                p.extend(c.iter().copied());
                p.extend(l.iter().rev().skip(1).copied());
                p
            })
            .collect();
        let witness = ThetaWitness {
            x: anchor,
            y: u,
            paths: theta_paths,
        };
        match witness.validate(state.host(), ell, t) {
            Ok(()) => {
                report.outcome = EmbedOutcome::Witness;
                report.witness = Some(witness);
                return report;
            }
            Err(e) => return fail(report, 3, format!("assembled witness rejected: {e}")),
        }
    }
    fail(
        report,
        3,
        format!("no spider with {t} legs of length {leg} could be closed"),
    )
}
