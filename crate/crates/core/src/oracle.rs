//! Brute-force reference computations used by the test suites.
//!
//! Everything in this module is enumeration-based and independent of the
//! algorithms it cross-checks. Intended for desk-scale instances only.

use std::collections::BTreeSet;

use crate::model::{LinkId, NodeId, Path, Topology};
use crate::routing::Metric;

/// All simple paths between `a` and `b`, as link sequences.
pub fn all_simple_paths(topo: &Topology, a: &NodeId, b: &NodeId) -> Vec<Vec<LinkId>> {
    let mut out = Vec::new();
    let mut links = Vec::new();
    let mut visited = BTreeSet::new();
    visited.insert(a.clone());
    dfs_paths(topo, a, b, &mut visited, &mut links, &mut out);
    out
}

fn dfs_paths(
    topo: &Topology,
    cur: &NodeId,
    dst: &NodeId,
    visited: &mut BTreeSet<NodeId>,
    links: &mut Vec<LinkId>,
    out: &mut Vec<Vec<LinkId>>,
) {
    if cur == dst {
        out.push(links.clone());
        return;
    }
    for &lid in topo.incident(cur) {
        let next = topo.link(lid).unwrap().other(cur).unwrap().clone();
        if visited.contains(&next) {
            continue;
        }
        visited.insert(next.clone());
        links.push(lid);
        dfs_paths(topo, &next, dst, visited, links, out);
        links.pop();
        visited.remove(&next);
    }
}

/// Minimum total cost over all link-disjoint simple path pairs, or `None`
/// if no disjoint pair exists.
pub fn best_pair_cost(topo: &Topology, a: &NodeId, b: &NodeId, metric: Metric) -> Option<f64> {
    let paths = all_simple_paths(topo, a, b);
    let mut best: Option<f64> = None;
    for (i, p) in paths.iter().enumerate() {
        let pset: BTreeSet<LinkId> = p.iter().copied().collect();
        for q in paths.iter().skip(i + 1) {
            if q.iter().any(|l| pset.contains(l)) {
                continue;
            }
            let cost: f64 = p
                .iter()
                .chain(q.iter())
                .map(|&l| metric.cost(topo, l))
                .sum();
            if best.is_none_or(|b| cost < b) {
                best = Some(cost);
            }
        }
    }
    best
}

/// All distinct simple cycles within a link fragment, each reported as the
/// sorted set of its link ids.
pub fn all_cycles(topo: &Topology, fragment: &BTreeSet<LinkId>) -> Vec<Vec<LinkId>> {
    let mut nodes: BTreeSet<NodeId> = BTreeSet::new();
    for &l in fragment {
        let link = topo.link(l).unwrap();
        nodes.insert(link.endpoints.0.clone());
        nodes.insert(link.endpoints.1.clone());
    }
    let mut found: BTreeSet<Vec<LinkId>> = BTreeSet::new();
    // a simple cycle through link l = l + a simple path between its
    // endpoints avoiding l
    for &l in fragment {
        let link = topo.link(l).unwrap();
        let (a, b) = (&link.endpoints.0, &link.endpoints.1);
        let mut rest = fragment.clone();
        rest.remove(&l);
        for mut path in simple_paths_in_fragment(topo, &rest, a, b) {
            path.push(l);
            path.sort();
            found.insert(path);
        }
    }
    found.into_iter().collect()
}

fn simple_paths_in_fragment(
    topo: &Topology,
    fragment: &BTreeSet<LinkId>,
    a: &NodeId,
    b: &NodeId,
) -> Vec<Vec<LinkId>> {
    let mut out = Vec::new();
    let mut links = Vec::new();
    let mut visited = BTreeSet::new();
    visited.insert(a.clone());
    dfs_fragment(topo, fragment, a, b, &mut visited, &mut links, &mut out);
    out
}

fn dfs_fragment(
    topo: &Topology,
    fragment: &BTreeSet<LinkId>,
    cur: &NodeId,
    dst: &NodeId,
    visited: &mut BTreeSet<NodeId>,
    links: &mut Vec<LinkId>,
    out: &mut Vec<Vec<LinkId>>,
) {
    if cur == dst && !links.is_empty() {
        out.push(links.clone());
        return;
    }
    for &lid in topo.incident(cur) {
        if !fragment.contains(&lid) {
            continue;
        }
        let next = topo.link(lid).unwrap().other(cur).unwrap().clone();
        if visited.contains(&next) && next != *dst {
            continue;
        }
        if links.contains(&lid) {
            continue;
        }
        visited.insert(next.clone());
        links.push(lid);
        dfs_fragment(topo, fragment, &next, dst, visited, links, out);
        links.pop();
        visited.remove(&next);
    }
}

/// Validates that a returned link sequence is a closed simple cycle.
pub fn is_cycle(topo: &Topology, links: &[LinkId]) -> bool {
    if links.len() < 3 {
        return false;
    }
    let distinct: BTreeSet<LinkId> = links.iter().copied().collect();
    if distinct.len() != links.len() {
        return false;
    }
    // consecutive links (cyclically) must chain through shared nodes, and
    // every node on the cycle must have degree exactly 2
    let mut degree: std::collections::BTreeMap<NodeId, u32> = Default::default();
    for &l in links {
        let link = topo.link(l).unwrap();
        *degree.entry(link.endpoints.0.clone()).or_insert(0) += 1;
        *degree.entry(link.endpoints.1.clone()).or_insert(0) += 1;
    }
    if !degree.values().all(|&d| d == 2) {
        return false;
    }
    let open = Path::new(links[..links.len() - 1].to_vec(), topo);
    open.is_ok()
}

/// Length-weighted spare capacity recomputed directly from per-link maps.
pub fn recount_spare_weighted(topo: &Topology, sol: &crate::spp::SppSolution) -> f64 {
    sol.spare
        .iter()
        .map(|(link, units)| {
            let width: u32 = units
                .iter()
                .map(|u| {
                    u.sharers
                        .iter()
                        .map(|d| sol.demands[d].units)
                        .max()
                        .unwrap_or(0)
                })
                .sum();
            topo.length(*link) * f64::from(width)
        })
        .sum()
}
