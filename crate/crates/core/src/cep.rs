//! Cycle elimination: turns a coding group's protection topology into a
//! tree so that linear coding trails can be built over it.
//!
//! Strict mode removes the longest link of each cycle and codes its data
//! over the cycle remainder. Relaxed mode runs the extended five-step
//! procedure: alternative link removals, separation points, off-cycle
//! reroutes, and finally demotion of irreconcilable members to 1+1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::group::{CodingGroup, Mode};
use crate::model::{Demand, DemandId, LinkId, NodeId, Path, PathPair, Topology};

/// A link removed by cycle elimination and the capacity it saved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedLink {
    pub link: LinkId,
    /// Length-weighted saving (one unit of the link's length).
    pub saving: f64,
}

/// A separation point: the cycle is kept physically but treated as broken
/// at `node`, where `detached` hangs off as a leaf of the coding structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub node: NodeId,
    pub detached: LinkId,
}

/// Cycle-free protection topology of one coding group, with the final
/// protection route of every remaining member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectionTree {
    pub group_id: crate::group::GroupId,
    pub tree_links: BTreeSet<LinkId>,
    pub routes: BTreeMap<DemandId, Path>,
    pub removed: Vec<RemovedLink>,
    pub separations: Vec<Separation>,
    /// Members demoted to dedicated 1+1 protection.
    pub apsed: BTreeSet<DemandId>,
}

/// Node of the effective coding graph. A `Detached` node is the split leaf
/// copy created by a separation point.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum EffNode {
    Node(NodeId),
    Detached(LinkId),
}

impl std::fmt::Display for EffNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EffNode::Node(n) => write!(f, "{n}"),
            EffNode::Detached(l) => write!(f, "split@{l}"),
        }
    }
}

impl ProtectionTree {
    /// Starting state: routes are the members' original protection paths.
    pub fn initial(
        group: &CodingGroup,
        pairs: &BTreeMap<DemandId, PathPair>,
    ) -> Self {
        let routes: BTreeMap<DemandId, Path> = group
            .members
            .iter()
            .map(|d| (*d, pairs[d].protection.clone()))
            .collect();
        let tree_links = routes
            .values()
            .flat_map(|p| p.links().iter().copied())
            .collect();
        ProtectionTree {
            group_id: group.id,
            tree_links,
            routes,
            removed: Vec::new(),
            separations: Vec::new(),
            apsed: BTreeSet::new(),
        }
    }

    fn refresh_links(&mut self) {
        self.tree_links = self
            .routes
            .values()
            .flat_map(|p| p.links().iter().copied())
            .collect();
    }

    /// Effective endpoints of a tree link, accounting for separations.
    pub fn eff_ends(&self, topo: &Topology, link: LinkId) -> (EffNode, EffNode) {
        let l = topo.link(link).unwrap();
        let eff = |n: &NodeId| {
            if self
                .separations
                .iter()
                .any(|s| s.detached == link && s.node == *n)
            {
                EffNode::Detached(link)
            } else {
                EffNode::Node(n.clone())
            }
        };
        (eff(&l.endpoints.0), eff(&l.endpoints.1))
    }

    /// Adjacency of the effective coding graph, incident links in
    /// ascending id order.
    pub fn eff_adjacency(&self, topo: &Topology) -> BTreeMap<EffNode, Vec<(LinkId, EffNode)>> {
        let mut adj: BTreeMap<EffNode, Vec<(LinkId, EffNode)>> = BTreeMap::new();
        for &l in &self.tree_links {
            let (a, b) = self.eff_ends(topo, l);
            adj.entry(a.clone()).or_default().push((l, b.clone()));
            adj.entry(b).or_default().push((l, a));
        }
        for v in adj.values_mut() {
            v.sort();
        }
        adj
    }

    /// The effective node at which `demand`'s route terminates on physical
    /// node `node`, given its terminal link there.
    pub fn eff_endpoint(&self, node: &NodeId, terminal: LinkId) -> EffNode {
        if self
            .separations
            .iter()
            .any(|s| s.detached == terminal && s.node == *node)
        {
            EffNode::Detached(terminal)
        } else {
            EffNode::Node(node.clone())
        }
    }

    /// Per-link capacity width: the widest member routed over the link.
    pub fn link_widths(&self, demands: &BTreeMap<DemandId, Demand>) -> BTreeMap<LinkId, u32> {
        let mut widths: BTreeMap<LinkId, u32> = BTreeMap::new();
        for (d, route) in &self.routes {
            let units = demands[d].units;
            for &l in route.links() {
                let w = widths.entry(l).or_insert(0);
                *w = (*w).max(units);
            }
        }
        widths
    }

    pub fn is_acyclic_effective(&self, topo: &Topology) -> bool {
        min_fundamental_cycle(&self.eff_adjacency(topo), topo).is_none()
    }
}

/// Deterministic cycle search over a raw link fragment: depth-first from
/// the smallest node, incident links visited in ascending id order. Returns
/// the first cycle closed, as an ordered link sequence.
pub fn find_cycle(fragment: &BTreeSet<LinkId>, topo: &Topology) -> Option<Vec<LinkId>> {
    let mut adj: BTreeMap<NodeId, Vec<(LinkId, NodeId)>> = BTreeMap::new();
    for &l in fragment {
        let link = topo.link(l).unwrap();
        let (a, b) = (&link.endpoints.0, &link.endpoints.1);
        adj.entry(a.clone()).or_default().push((l, b.clone()));
        adj.entry(b.clone()).or_default().push((l, a.clone()));
    }
    for v in adj.values_mut() {
        v.sort();
    }
    let mut visited: BTreeSet<NodeId> = BTreeSet::new();
    for root in adj.keys().cloned().collect::<Vec<_>>() {
        if visited.contains(&root) {
            continue;
        }
        // parent chain: node -> (parent node, via link)
        let mut parent: BTreeMap<NodeId, (NodeId, LinkId)> = BTreeMap::new();
        let mut stack = vec![(root.clone(), None::<LinkId>)];
        while let Some((node, via)) = stack.pop() {
            if visited.contains(&node) {
                continue;
            }
            visited.insert(node.clone());
            // descend in ascending link order: push in reverse
            for &(l, ref next) in adj[&node].iter().rev() {
                if Some(l) == via {
                    continue;
                }
                if visited.contains(next) {
                    // back edge closes a cycle next -> ... -> node -> next
                    if let Some(cycle) = close_cycle(&parent, &node, next, l) {
                        return Some(cycle);
                    }
                } else {
                    parent.insert(next.clone(), (node.clone(), l));
                    stack.push((next.clone(), Some(l)));
                }
            }
        }
    }
    None
}

fn close_cycle(
    parent: &BTreeMap<NodeId, (NodeId, LinkId)>,
    from: &NodeId,
    to: &NodeId,
    closing: LinkId,
) -> Option<Vec<LinkId>> {
    // walk ancestors of `from` until `to`
    let mut links = vec![closing];
    let mut cur = from.clone();
    while cur != *to {
        let (p, l) = parent.get(&cur)?.clone();
        links.push(l);
        cur = p;
    }
    links.reverse();
    Some(links)
}

/// Smallest fundamental cycle (total length, then sorted link ids) of the
/// effective graph, as an ordered link walk.
fn min_fundamental_cycle(
    adj: &BTreeMap<EffNode, Vec<(LinkId, EffNode)>>,
    topo: &Topology,
) -> Option<Vec<LinkId>> {
    // spanning forest by DFS, ascending link ids
    let mut parent: BTreeMap<EffNode, (EffNode, LinkId)> = BTreeMap::new();
    let mut depth: BTreeMap<EffNode, usize> = BTreeMap::new();
    let mut visited: BTreeSet<EffNode> = BTreeSet::new();
    let mut chords: Vec<(LinkId, EffNode, EffNode)> = Vec::new();
    for root in adj.keys() {
        if visited.contains(root) {
            continue;
        }
        depth.insert(root.clone(), 0);
        let mut stack = vec![root.clone()];
        visited.insert(root.clone());
        while let Some(node) = stack.pop() {
            for (l, next) in &adj[&node] {
                if let Some((_, via)) = parent.get(&node) {
                    if via == l {
                        continue;
                    }
                }
                if visited.contains(next) {
                    chords.push((*l, node.clone(), next.clone()));
                } else {
                    visited.insert(next.clone());
                    parent.insert(next.clone(), (node.clone(), *l));
                    depth.insert(next.clone(), depth[&node] + 1);
                    stack.push(next.clone());
                }
            }
        }
    }
    // each chord appears twice (once per endpoint); dedupe by link id
    let mut seen = BTreeSet::new();
    let mut best: Option<(f64, Vec<LinkId>, Vec<LinkId>)> = None;
    for (l, a, b) in chords {
        if !seen.insert(l) {
            continue;
        }
        let cycle = fundamental_cycle(&parent, &depth, &a, &b, l);
        let total: f64 = cycle.iter().map(|&c| topo.length(c)).sum();
        let mut sorted = cycle.clone();
        sorted.sort();
        let better = match &best {
            None => true,
            Some((t, s, _)) => total < *t - 1e-12 || ((total - *t).abs() <= 1e-12 && sorted < *s),
        };
        if better {
            best = Some((total, sorted, cycle));
        }
    }
    best.map(|(_, _, c)| c)
}

fn fundamental_cycle(
    parent: &BTreeMap<EffNode, (EffNode, LinkId)>,
    depth: &BTreeMap<EffNode, usize>,
    a: &EffNode,
    b: &EffNode,
    chord: LinkId,
) -> Vec<LinkId> {
    let (mut x, mut y) = (a.clone(), b.clone());
    let mut up_x = Vec::new();
    let mut up_y = Vec::new();
    while depth[&x] > depth[&y] {
        let (p, l) = parent[&x].clone();
        up_x.push(l);
        x = p;
    }
    while depth[&y] > depth[&x] {
        let (p, l) = parent[&y].clone();
        up_y.push(l);
        y = p;
    }
    while x != y {
        let (px, lx) = parent[&x].clone();
        let (py, ly) = parent[&y].clone();
        up_x.push(lx);
        up_y.push(ly);
        x = px;
        y = py;
    }
    // walk: chord then a-side up to the meeting point, then down the b-side
    let mut cycle = vec![chord];
    cycle.extend(up_x);
    up_y.reverse();
    cycle.extend(up_y);
    cycle
}

/// Runs cycle elimination appropriate for the group's mode.
pub fn eliminate(
    group: &CodingGroup,
    pairs: &BTreeMap<DemandId, PathPair>,
    topo: &Topology,
) -> ProtectionTree {
    let mut tree = ProtectionTree::initial(group, pairs);
    match group.mode {
        Mode::Strict => eliminate_basic(&mut tree, topo),
        Mode::Relaxed => eliminate_extended(&mut tree, pairs, topo),
    }
    tree
}

/// Basic procedure: repeatedly remove the longest link of the smallest
/// remaining cycle and code its data over the cycle remainder.
pub fn eliminate_basic(tree: &mut ProtectionTree, topo: &Topology) {
    while let Some(cycle) = min_fundamental_cycle(&tree.eff_adjacency(topo), topo) {
        cep_basic(tree, &cycle, topo);
    }
}

/// One basic elimination step on a known cycle: the longest link (ties:
/// lowest id) is emptied and its demands rerouted over the remainder.
pub fn cep_basic(tree: &mut ProtectionTree, cycle: &[LinkId], topo: &Topology) {
    let &longest = cycle
        .iter()
        .max_by(|&&a, &&b| {
            topo.length(a)
                .partial_cmp(&topo.length(b))
                .unwrap()
                .then(b.cmp(&a))
        })
        .expect("cycle is non-empty");
    apply_removal(tree, cycle, longest, topo);
}

fn apply_removal(tree: &mut ProtectionTree, cycle: &[LinkId], removed: LinkId, topo: &Topology) {
    let cycle_set: BTreeSet<LinkId> = cycle.iter().copied().collect();
    let affected: Vec<DemandId> = tree
        .routes
        .iter()
        .filter(|(_, p)| p.contains(removed))
        .map(|(&d, _)| d)
        .collect();
    for d in affected {
        let rerouted = reroute_over_cycle(&tree.routes[&d], &cycle_set, topo)
            .expect("cycle remainder reconnects the route");
        tree.routes.insert(d, rerouted);
    }
    tree.removed.push(RemovedLink {
        link: removed,
        saving: topo.length(removed),
    });
    tree.refresh_links();
}

/// XOR of a route with a cycle, reduced to a simple path between the
/// route's endpoints. This is how data on a removed link is coded with the
/// data over the rest of the cycle.
fn reroute_over_cycle(
    route: &Path,
    cycle: &BTreeSet<LinkId>,
    topo: &Topology,
) -> Option<Path> {
    let route_set = route.link_set();
    let xor: BTreeSet<LinkId> = route_set
        .symmetric_difference(cycle)
        .copied()
        .collect();
    let (a, b) = route.endpoints(topo)?;
    let links = simple_path_in_set(&xor, &a, &b, topo)?;
    Path::new(links, topo).ok()
}

/// Deterministic DFS for a simple path between two nodes inside a link set.
fn simple_path_in_set(
    set: &BTreeSet<LinkId>,
    from: &NodeId,
    to: &NodeId,
    topo: &Topology,
) -> Option<Vec<LinkId>> {
    let mut adj: BTreeMap<NodeId, Vec<(LinkId, NodeId)>> = BTreeMap::new();
    for &l in set {
        let link = topo.link(l).unwrap();
        let (a, b) = (&link.endpoints.0, &link.endpoints.1);
        adj.entry(a.clone()).or_default().push((l, b.clone()));
        adj.entry(b.clone()).or_default().push((l, a.clone()));
    }
    for v in adj.values_mut() {
        v.sort();
    }
    fn dfs(
        adj: &BTreeMap<NodeId, Vec<(LinkId, NodeId)>>,
        cur: &NodeId,
        to: &NodeId,
        visited: &mut BTreeSet<NodeId>,
        path: &mut Vec<LinkId>,
    ) -> bool {
        if cur == to {
            return true;
        }
        let Some(edges) = adj.get(cur) else { return false };
        for (l, next) in edges {
            if visited.contains(next) {
                continue;
            }
            visited.insert(next.clone());
            path.push(*l);
            if dfs(adj, next, to, visited, path) {
                return true;
            }
            path.pop();
            visited.remove(next);
        }
        false
    }
    let mut visited = BTreeSet::from([from.clone()]);
    let mut path = Vec::new();
    dfs(&adj, from, to, &mut visited, &mut path).then_some(path)
}

/// Extended five-step procedure for relaxed mode.
pub fn eliminate_extended(
    tree: &mut ProtectionTree,
    pairs: &BTreeMap<DemandId, PathPair>,
    topo: &Topology,
) {
    let mut fuel = 8 * topo.link_count() + 16;
    while let Some(cycle) = min_fundamental_cycle(&tree.eff_adjacency(topo), topo) {
        if fuel == 0 {
            // last resort: demote everything still riding the cycle
            let on_cycle: Vec<DemandId> = tree
                .routes
                .iter()
                .filter(|(_, p)| cycle.iter().any(|l| p.contains(*l)))
                .map(|(&d, _)| d)
                .collect();
            for d in on_cycle {
                tree.routes.remove(&d);
                tree.apsed.insert(d);
            }
            tree.refresh_links();
            continue;
        }
        fuel -= 1;
        extended_step(tree, &cycle, pairs, topo);
    }
}

fn extended_step(
    tree: &mut ProtectionTree,
    cycle: &[LinkId],
    pairs: &BTreeMap<DemandId, PathPair>,
    topo: &Topology,
) {
    let cycle_set: BTreeSet<LinkId> = cycle.iter().copied().collect();
    // steps 1-2: longest link first, then next-longest, skipping any removal
    // that would overlap a member's reroute with its own primary
    let mut by_length: Vec<LinkId> = cycle.to_vec();
    by_length.sort_by(|&a, &b| {
        topo.length(b)
            .partial_cmp(&topo.length(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    for &cand in &by_length {
        if removal_is_safe(tree, &cycle_set, cand, pairs, topo) {
            apply_removal(tree, cycle, cand, topo);
            return;
        }
    }
    // step 3: separation point
    if let Some(sep) = find_separation(tree, cycle, topo) {
        tree.separations.push(sep);
        return;
    }
    // step 4: reroute the conflicting portions off the cycle
    let removal = by_length[0];
    if try_off_cycle_reroute(tree, cycle, removal, pairs, topo) {
        return;
    }
    // step 5: demote the conflicting members to 1+1
    let conflicting = conflicting_members(tree, &cycle_set, removal, pairs, topo);
    for d in conflicting {
        tree.routes.remove(&d);
        tree.apsed.insert(d);
    }
    tree.refresh_links();
}

fn conflicting_members(
    tree: &ProtectionTree,
    cycle: &BTreeSet<LinkId>,
    removal: LinkId,
    pairs: &BTreeMap<DemandId, PathPair>,
    topo: &Topology,
) -> Vec<DemandId> {
    tree.routes
        .iter()
        .filter(|(_, p)| p.contains(removal))
        .filter(|(d, p)| match reroute_over_cycle(p, cycle, topo) {
            Some(new_route) => !crate::model::link_disjoint(&new_route, &pairs[d].primary),
            None => true,
        })
        .map(|(&d, _)| d)
        .collect()
}

fn removal_is_safe(
    tree: &ProtectionTree,
    cycle: &BTreeSet<LinkId>,
    removal: LinkId,
    pairs: &BTreeMap<DemandId, PathPair>,
    topo: &Topology,
) -> bool {
    for (d, route) in &tree.routes {
        if !route.contains(removal) {
            continue;
        }
        match reroute_over_cycle(route, cycle, topo) {
            Some(new_route) => {
                if !crate::model::link_disjoint(&new_route, &pairs[d].primary) {
                    return false;
                }
            }
            None => return false,
        }
    }
    true
}

/// Step 3: a node whose two on-cycle links carry no mutual data and whose
/// on-cycle data terminates there on both sides.
fn find_separation(
    tree: &ProtectionTree,
    cycle: &[LinkId],
    topo: &Topology,
) -> Option<Separation> {
    let mut candidates: Vec<(NodeId, LinkId, LinkId)> = Vec::new();
    for (i, &l) in cycle.iter().enumerate() {
        let next = cycle[(i + 1) % cycle.len()];
        let (la, lb) = (topo.link(l).unwrap(), topo.link(next).unwrap());
        for n in [&la.endpoints.0, &la.endpoints.1] {
            if lb.touches(n) {
                candidates.push((n.clone(), l.min(next), l.max(next)));
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    for (node, l1, l2) in candidates {
        let users = |l: LinkId| -> Vec<&DemandId> {
            tree.routes
                .iter()
                .filter(|(_, p)| p.contains(l))
                .map(|(d, _)| d)
                .collect()
        };
        let (u1, u2) = (users(l1), users(l2));
        if u1.iter().any(|d| u2.contains(d)) {
            continue;
        }
        let ends_at = |d: &DemandId, l: LinkId| -> bool {
            let route = &tree.routes[d];
            let Ok(nodes) = route.node_sequence(topo) else { return false };
            let Some((first, last)) = nodes.first().zip(nodes.last()) else { return false };
            let terminal_first = *route.links().first().unwrap() == l && *first == node;
            let terminal_last = *route.links().last().unwrap() == l && *last == node;
            terminal_first || terminal_last
        };
        let all_terminate = u1.iter().all(|d| ends_at(d, l1)) && u2.iter().all(|d| ends_at(d, l2));
        if all_terminate {
            return Some(Separation {
                node,
                detached: l1,
            });
        }
    }
    None
}

/// Step 4: move conflicting members off the cycle entirely via the cheapest
/// detour that avoids their own primary and the removed link.
fn try_off_cycle_reroute(
    tree: &mut ProtectionTree,
    cycle: &[LinkId],
    removal: LinkId,
    pairs: &BTreeMap<DemandId, PathPair>,
    topo: &Topology,
) -> bool {
    let cycle_set: BTreeSet<LinkId> = cycle.iter().copied().collect();
    let conflicting = conflicting_members(tree, &cycle_set, removal, pairs, topo);
    let mut detours: BTreeMap<DemandId, Path> = BTreeMap::new();
    for d in &conflicting {
        let forbidden: BTreeSet<LinkId> = pairs[d]
            .primary
            .links()
            .iter()
            .copied()
            .chain([removal])
            .collect();
        let (a, b) = tree.routes[d].endpoints(topo).expect("route has endpoints");
        match cheapest_path_avoiding(topo, &a, &b, &forbidden) {
            Some(p) => {
                detours.insert(*d, p);
            }
            None => return false,
        }
    }
    // commit: detours for the conflicting, cycle reroute for the rest
    let others: Vec<DemandId> = tree
        .routes
        .iter()
        .filter(|(d, p)| p.contains(removal) && !detours.contains_key(d))
        .map(|(&d, _)| d)
        .collect();
    for d in others {
        let rerouted = match reroute_over_cycle(&tree.routes[&d], &cycle_set, topo) {
            Some(p) => p,
            None => return false,
        };
        tree.routes.insert(d, rerouted);
    }
    for (d, p) in detours {
        tree.routes.insert(d, p);
    }
    tree.removed.push(RemovedLink {
        link: removal,
        saving: topo.length(removal),
    });
    tree.refresh_links();
    true
}

fn cheapest_path_avoiding(
    topo: &Topology,
    a: &NodeId,
    b: &NodeId,
    forbidden: &BTreeSet<LinkId>,
) -> Option<Path> {
    // Bellman-Ford style relaxation; costs are positive lengths
    let mut dist: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut pred: BTreeMap<NodeId, (NodeId, LinkId)> = BTreeMap::new();
    dist.insert(a.clone(), 0.0);
    for _ in 0..topo.node_count() {
        let mut changed = false;
        for node in topo.nodes() {
            let Some(&d) = dist.get(node) else { continue };
            for &lid in topo.incident(node) {
                if forbidden.contains(&lid) {
                    continue;
                }
                let link = topo.link(lid).unwrap();
                let next = link.other(node).unwrap();
                let cand = d + link.length;
                let better = match dist.get(next) {
                    None => true,
                    Some(&cur) => cand < cur - 1e-12,
                };
                if better {
                    dist.insert(next.clone(), cand);
                    pred.insert(next.clone(), (node.clone(), lid));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.get(b)?;
    let mut links = Vec::new();
    let mut cur = b.clone();
    while cur != *a {
        let (p, l) = pred.get(&cur)?.clone();
        links.push(l);
        cur = p;
    }
    links.reverse();
    Path::new(links, topo).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;

    #[test]
    fn ring_cycle_is_found() {
        let (t, group, pairs) = fixtures::ring_group();
        let fragment: BTreeSet<LinkId> =
            group.protection_topology.keys().copied().collect();
        let cycle = find_cycle(&fragment, &t).unwrap();
        assert!(oracle::is_cycle(&t, &cycle));
        assert_eq!(cycle.len(), 6);
        let _ = pairs.len();
    }

    #[test]
    fn tree_has_no_cycle() {
        let (t, _sol) = fixtures::conversion_scenario();
        let fragment: BTreeSet<LinkId> =
            [1, 2, 3].into_iter().map(LinkId).collect();
        assert_eq!(find_cycle(&fragment, &t), None);
    }

    #[test]
    fn theta_graph_cycle_is_deterministic_and_smallest() {
        let (t, fragment) = fixtures::theta_graph();
        let cycle = find_cycle(&fragment, &t).unwrap();
        assert!(oracle::is_cycle(&t, &cycle));
        let mut sorted = cycle.clone();
        sorted.sort();
        let all = oracle::all_cycles(&t, &fragment);
        assert_eq!(all.len(), 3);
        let smallest = all.iter().min().unwrap();
        assert_eq!(&sorted, smallest);
    }

    #[test]
    fn ring_elimination_removes_longest_link() {
        let (t, group, pairs) = fixtures::ring_group();
        let tree = eliminate(&group, &pairs, &t);
        let longest = fixtures::ring_longest_link();
        assert_eq!(tree.removed.len(), 1);
        assert_eq!(tree.removed[0].link, longest);
        assert!((tree.removed[0].saving - t.length(longest)).abs() < 1e-9);
        assert!(!tree.tree_links.contains(&longest));
        assert_eq!(find_cycle(&tree.tree_links, &t), None);
        // every member still connected end to end within the tree
        for (d, route) in &tree.routes {
            let pair = &pairs[d];
            assert_eq!(
                route.endpoints(&t).map(|(a, b)| sorted_pair(a, b)),
                pair.protection.endpoints(&t).map(|(a, b)| sorted_pair(a, b)),
            );
            assert!(route.links().iter().all(|l| tree.tree_links.contains(l)));
        }
    }

    fn sorted_pair(a: crate::model::NodeId, b: crate::model::NodeId) -> (NodeId, NodeId) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    #[test]
    fn equal_lengths_break_ties_by_lowest_id() {
        let (t, group, pairs) = fixtures::ring_group_equal_lengths();
        let tree = eliminate(&group, &pairs, &t);
        assert_eq!(tree.removed.len(), 1);
        let removed = tree.removed[0].link;
        let lowest = group.protection_topology.keys().copied().min().unwrap();
        assert_eq!(removed, lowest);
    }

    #[test]
    fn already_tree_is_a_noop() {
        let (t, sol) = fixtures::conversion_scenario();
        let group = crate::group::CodingGroup::from_members(
            crate::group::GroupId(1),
            [DemandId(1)].into_iter().collect(),
            Mode::Strict,
            &sol.pairs,
        );
        let tree = eliminate(&group, &sol.pairs, &t);
        assert!(tree.removed.is_empty());
        assert_eq!(
            tree.tree_links,
            sol.pairs[&DemandId(1)].protection.link_set()
        );
    }

    #[test]
    fn extended_picks_second_longest_when_first_conflicts() {
        let (t, group, pairs) = fixtures::relaxed_conflict_ring();
        let tree = eliminate(&group, &pairs, &t);
        assert_eq!(tree.removed.len(), 1);
        assert_eq!(tree.removed[0].link, fixtures::relaxed_conflict_expected_removal());
        assert!(tree.apsed.is_empty());
        assert!(tree.is_acyclic_effective(&t));
        // exhaustive check: the skipped longest link really was unsafe
        let cycle_set: BTreeSet<LinkId> = group.protection_topology.keys().copied().collect();
        let initial = ProtectionTree::initial(&group, &pairs);
        assert!(!removal_is_safe(
            &initial,
            &cycle_set,
            fixtures::relaxed_conflict_longest(),
            &pairs,
            &t
        ));
    }

    #[test]
    fn separation_point_keeps_cycle_with_zero_saving() {
        let (t, group, pairs) = fixtures::separation_ring();
        let tree = eliminate(&group, &pairs, &t);
        assert!(tree.removed.is_empty(), "no saving expected");
        assert_eq!(tree.separations.len(), 1);
        assert!(tree.is_acyclic_effective(&t));
        // physically the ring is intact
        assert!(find_cycle(&tree.tree_links, &t).is_some());
    }

    #[test]
    fn strict_tree_never_meets_member_primaries() {
        for seed in 300..310u64 {
            let (t, demands) = fixtures::random_instance(seed, 6..=10, 2..=5);
            let sol = crate::spp::solve_spp(&t, &demands, crate::routing::Metric::Length).unwrap();
            let design = crate::group::form_groups(&sol, &t, Mode::Strict);
            for gd in &design.groups {
                assert!(gd.tree.is_acyclic_effective(&t));
                for m in &gd.group.members {
                    for l in sol.pairs[m].primary.links() {
                        assert!(
                            !gd.tree.tree_links.contains(l),
                            "seed {seed}: tree meets primary of {m:?}"
                        );
                    }
                }
            }
        }
    }
}
