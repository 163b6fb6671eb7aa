//! Min-cost link-disjoint path pair computation.
//!
//! Uses the two-step Bhandari construction: shortest path, then a second
//! search in a residual graph where the first path's arcs are reversed with
//! negated cost. Interleaving arcs cancel, which makes the optimization
//! joint rather than sequential and keeps trap topologies solvable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Demand, LinkId, NodeId, Path, PathPair, Topology};

/// Cost metric for routing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Length,
    Hops,
}

impl Metric {
    pub fn cost(&self, topo: &Topology, link: LinkId) -> f64 {
        match self {
            Metric::Length => topo.length(link),
            Metric::Hops => 1.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("no pair of link-disjoint paths between {0} and {1}")]
    NoDisjointPair(NodeId, NodeId),
    #[error("endpoints are not distinct: {0}")]
    SameEndpoints(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Directed use of an undirected link.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Arc {
    link: LinkId,
    /// true: endpoints.0 -> endpoints.1
    forward: bool,
}

fn arc_head(topo: &Topology, arc: Arc) -> &NodeId {
    let l = topo.link(arc.link).unwrap();
    if arc.forward {
        &l.endpoints.1
    } else {
        &l.endpoints.0
    }
}

fn arc_tail(topo: &Topology, arc: Arc) -> &NodeId {
    let l = topo.link(arc.link).unwrap();
    if arc.forward {
        &l.endpoints.0
    } else {
        &l.endpoints.1
    }
}

/// Single-source shortest path over a filtered arc set, Bellman-Ford style
/// so negative residual costs are handled. Deterministic: nodes and incident
/// links are visited in ascending order.
fn shortest_path<F>(
    topo: &Topology,
    src: &NodeId,
    dst: &NodeId,
    mut arc_cost: F,
) -> Option<Vec<Arc>>
where
    F: FnMut(Arc) -> Option<f64>,
{
    let mut dist: BTreeMap<&NodeId, f64> = BTreeMap::new();
    let mut pred: BTreeMap<&NodeId, Arc> = BTreeMap::new();
    dist.insert(src, 0.0);
    let n = topo.node_count();
    for _ in 0..n {
        let mut changed = false;
        for node in topo.nodes() {
            let Some(&d) = dist.get(node) else { continue };
            for &lid in topo.incident(node) {
                let link = topo.link(lid).unwrap();
                let forward = link.endpoints.0 == *node;
                let arc = Arc { link: lid, forward };
                let Some(cost) = arc_cost(arc) else { continue };
                let head = arc_head(topo, arc);
                let cand = d + cost;
                let better = match dist.get(head) {
                    None => true,
                    Some(&cur) => cand < cur - 1e-12,
                };
                if better {
                    dist.insert(head, cand);
                    pred.insert(head, arc);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.get(dst)?;
    let mut arcs = Vec::new();
    let mut cur = dst;
    while cur != src {
        let arc = *pred.get(cur)?;
        cur = arc_tail(topo, arc);
        arcs.push(arc);
    }
    arcs.reverse();
    Some(arcs)
}

/// Min-total-cost pair of link-disjoint paths between `a` and `b`.
/// The primary is the cheaper of the two.
pub fn disjoint_pair(
    topo: &Topology,
    a: &NodeId,
    b: &NodeId,
    metric: Metric,
) -> Result<(Path, Path), RoutingError> {
    if a == b {
        return Err(RoutingError::SameEndpoints(a.clone()));
    }
    for n in [a, b] {
        if !topo.contains_node(n) {
            return Err(RoutingError::UnknownNode(n.clone()));
        }
    }
    let no_pair = || RoutingError::NoDisjointPair(a.clone(), b.clone());

    let first = shortest_path(topo, a, b, |arc| Some(metric.cost(topo, arc.link)))
        .ok_or_else(no_pair)?;
    let on_first: BTreeMap<LinkId, bool> =
        first.iter().map(|arc| (arc.link, arc.forward)).collect();

    // Residual graph: arcs of the first path are closed in their used
    // direction and carry negated cost in the reverse direction.
    let second = shortest_path(topo, a, b, |arc| match on_first.get(&arc.link) {
        None => Some(metric.cost(topo, arc.link)),
        Some(&fwd) if fwd == arc.forward => None,
        Some(_) => Some(-metric.cost(topo, arc.link)),
    })
    .ok_or_else(no_pair)?;

    // Union minus interleaved cancellations.
    let mut usage: BTreeMap<LinkId, i32> = BTreeMap::new();
    for arc in first.iter().chain(second.iter()) {
        let delta = if arc.forward { 1 } else { -1 };
        *usage.entry(arc.link).or_insert(0) += delta;
    }
    usage.retain(|_, v| *v != 0);

    let (p, q) = decompose_two_paths(topo, &usage, a, b).ok_or_else(no_pair)?;
    let p = Path::new(p, topo).expect("decomposed walk is a simple path");
    let q = Path::new(q, topo).expect("decomposed walk is a simple path");
    let (cp, cq) = (path_cost(topo, &p, metric), path_cost(topo, &q, metric));
    let primary_first = cp < cq
        || (cp == cq && (p.hops(), p.links()) <= (q.hops(), q.links()));
    if primary_first {
        Ok((p, q))
    } else {
        Ok((q, p))
    }
}

fn path_cost(topo: &Topology, p: &Path, metric: Metric) -> f64 {
    p.links().iter().map(|&l| metric.cost(topo, l)).sum()
}

/// Splits a set of directed link uses (two arc-disjoint a->b paths) into two
/// link sequences. At every junction the lowest link id is taken first.
fn decompose_two_paths(
    topo: &Topology,
    usage: &BTreeMap<LinkId, i32>,
    a: &NodeId,
    b: &NodeId,
) -> Option<(Vec<LinkId>, Vec<LinkId>)> {
    let mut remaining = usage.clone();
    let total = usage.len();
    let walk = |remaining: &mut BTreeMap<LinkId, i32>| -> Option<Vec<LinkId>> {
        let mut links = Vec::new();
        let mut cur = a.clone();
        while cur != *b {
            let mut step = None;
            for &lid in topo.incident(&cur) {
                if let Some(&dir) = remaining.get(&lid) {
                    let link = topo.link(lid).unwrap();
                    let outgoing = if link.endpoints.0 == cur { 1 } else { -1 };
                    if dir == outgoing {
                        step = Some((lid, link.other(&cur).unwrap().clone()));
                        break;
                    }
                }
            }
            let (lid, next) = step?;
            remaining.remove(&lid);
            links.push(lid);
            cur = next;
            if links.len() > total {
                return None; // malformed usage set
            }
        }
        Some(links)
    };
    let p = walk(&mut remaining)?;
    let q = walk(&mut remaining)?;
    if remaining.is_empty() {
        Some((p, q))
    } else {
        None
    }
}

/// Routes one demand as a [`PathPair`].
pub fn route_demand(
    topo: &Topology,
    demand: &Demand,
    metric: Metric,
) -> Result<PathPair, RoutingError> {
    let (primary, protection) =
        disjoint_pair(topo, &demand.endpoints.0, &demand.endpoints.1, metric)?;
    Ok(PathPair::new(demand, primary, protection, topo)
        .expect("disjoint pair satisfies the pair invariants"))
}
