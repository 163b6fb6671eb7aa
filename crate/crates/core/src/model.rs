//! Core graph and path data model: topology, demands, paths and path pairs.
//!
//! All types are immutable after construction and safe to share across
//! threads. A link is a bidirectional span; link-disjointness of two paths
//! therefore coincides with span-disjointness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque node label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Self {
        NodeId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({})", self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Index of a bidirectional link (span).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkId({})", self.0)
    }
}

/// Identifier of an end-to-end demand.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandId(pub u32);

impl fmt::Display for DemandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for DemandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DemandId({})", self.0)
    }
}

/// A bidirectional weighted link between two distinct nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    /// Unordered endpoint pair, stored in declaration order.
    pub endpoints: (NodeId, NodeId),
    /// Physical length in km, strictly positive.
    pub length: f64,
}

impl Link {
    /// The endpoint opposite `n`, if `n` is an endpoint.
    pub fn other(&self, n: &NodeId) -> Option<&NodeId> {
        if *n == self.endpoints.0 {
            Some(&self.endpoints.1)
        } else if *n == self.endpoints.1 {
            Some(&self.endpoints.0)
        } else {
            None
        }
    }

    pub fn touches(&self, n: &NodeId) -> bool {
        *n == self.endpoints.0 || *n == self.endpoints.1
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("link {0} is a self-loop")]
    SelfLoop(LinkId),
    #[error("duplicate link id {0}")]
    DuplicateLinkId(LinkId),
    #[error("parallel link {0} between {1} and {2}")]
    ParallelLink(LinkId, NodeId, NodeId),
    #[error("link {0} references unknown node {1}")]
    UnknownEndpoint(LinkId, NodeId),
    #[error("link {0} has non-positive length {1}")]
    NonPositiveLength(LinkId, f64),
}

/// Mesh network: node set plus bidirectional weighted links.
///
/// At most one link per unordered node pair; no self-loops; all lengths
/// strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Topology {
    nodes: BTreeSet<NodeId>,
    links: BTreeMap<LinkId, Link>,
    #[serde(skip)]
    adjacency: BTreeMap<NodeId, Vec<LinkId>>,
}

impl Topology {
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        links: impl IntoIterator<Item = Link>,
    ) -> Result<Self, TopologyError> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let mut by_id = BTreeMap::new();
        let mut by_pair = BTreeSet::new();
        for link in links {
            if link.endpoints.0 == link.endpoints.1 {
                return Err(TopologyError::SelfLoop(link.id));
            }
            for end in [&link.endpoints.0, &link.endpoints.1] {
                if !nodes.contains(end) {
                    return Err(TopologyError::UnknownEndpoint(link.id, end.clone()));
                }
            }
            if !(link.length > 0.0) || !link.length.is_finite() {
                return Err(TopologyError::NonPositiveLength(link.id, link.length));
            }
            let pair = ordered_pair(&link.endpoints.0, &link.endpoints.1);
            if !by_pair.insert(pair) {
                return Err(TopologyError::ParallelLink(
                    link.id,
                    link.endpoints.0.clone(),
                    link.endpoints.1.clone(),
                ));
            }
            if by_id.insert(link.id, link.clone()).is_some() {
                return Err(TopologyError::DuplicateLinkId(link.id));
            }
        }
        let mut adjacency: BTreeMap<NodeId, Vec<LinkId>> =
            nodes.iter().map(|n| (n.clone(), Vec::new())).collect();
        for link in by_id.values() {
            adjacency
                .get_mut(&link.endpoints.0)
                .unwrap()
                .push(link.id);
            adjacency
                .get_mut(&link.endpoints.1)
                .unwrap()
                .push(link.id);
        }
        // incident links kept in ascending id order for deterministic traversal
        for inc in adjacency.values_mut() {
            inc.sort();
        }
        Ok(Topology {
            nodes,
            links: by_id,
            adjacency,
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter()
    }

    pub fn contains_node(&self, n: &NodeId) -> bool {
        self.nodes.contains(n)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn length(&self, id: LinkId) -> f64 {
        self.links[&id].length
    }

    /// Incident links of `n` in ascending id order.
    pub fn incident(&self, n: &NodeId) -> &[LinkId] {
        self.adjacency.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn link_between(&self, a: &NodeId, b: &NodeId) -> Option<&Link> {
        self.incident(a)
            .iter()
            .map(|id| &self.links[id])
            .find(|l| l.touches(b))
    }
}

fn ordered_pair(a: &NodeId, b: &NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DemandError {
    #[error("demand {0} endpoints are not distinct")]
    SelfDemand(DemandId),
    #[error("demand {0} references unknown node {1}")]
    UnknownEndpoint(DemandId, NodeId),
    #[error("demand {0} has non-positive units")]
    NonPositiveUnits(DemandId),
}

/// A bidirectional end-to-end traffic demand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub id: DemandId,
    pub endpoints: (NodeId, NodeId),
    pub units: u32,
}

impl Demand {
    pub fn new(
        id: DemandId,
        a: NodeId,
        b: NodeId,
        units: u32,
        topo: &Topology,
    ) -> Result<Self, DemandError> {
        if a == b {
            return Err(DemandError::SelfDemand(id));
        }
        for n in [&a, &b] {
            if !topo.contains_node(n) {
                return Err(DemandError::UnknownEndpoint(id, n.clone()));
            }
        }
        if units == 0 {
            return Err(DemandError::NonPositiveUnits(id));
        }
        Ok(Demand {
            id,
            endpoints: (a, b),
            units,
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("links {0} and {1} do not share a node")]
    BrokenWalk(LinkId, LinkId),
    #[error("link {0} repeated")]
    RepeatedLink(LinkId),
    #[error("interior node {0} repeated")]
    RepeatedNode(NodeId),
    #[error("paths of pair {0} do not connect the same endpoints")]
    EndpointMismatch(DemandId),
    #[error("paths of pair {0} share link {1}")]
    NotDisjoint(DemandId, LinkId),
}

/// A simple path, stored as an ordered link sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    links: Vec<LinkId>,
}

impl Path {
    /// Validates the walk property and simplicity against `topo`.
    pub fn new(links: Vec<LinkId>, topo: &Topology) -> Result<Self, PathError> {
        let mut seen = BTreeSet::new();
        for &id in &links {
            if topo.link(id).is_none() {
                return Err(PathError::UnknownLink(id));
            }
            if !seen.insert(id) {
                return Err(PathError::RepeatedLink(id));
            }
        }
        let path = Path { links };
        if path.links.len() > 1 {
            // node_sequence re-validates connectivity and simplicity
            path.node_sequence(topo)?;
        }
        Ok(path)
    }

    pub fn empty() -> Self {
        Path { links: Vec::new() }
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn link_set(&self) -> BTreeSet<LinkId> {
        self.links.iter().copied().collect()
    }

    pub fn contains(&self, id: LinkId) -> bool {
        self.links.contains(&id)
    }

    pub fn length(&self, topo: &Topology) -> f64 {
        self.links.iter().map(|&l| topo.length(l)).sum()
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    /// The node sequence of the walk. For a single-link path the link's
    /// declared endpoint order is used.
    pub fn node_sequence(&self, topo: &Topology) -> Result<Vec<NodeId>, PathError> {
        match self.links.len() {
            0 => Ok(Vec::new()),
            1 => {
                let l = &topo.link(self.links[0]).ok_or(PathError::UnknownLink(self.links[0]))?;
                Ok(vec![l.endpoints.0.clone(), l.endpoints.1.clone()])
            }
            _ => {
                let first = topo.link(self.links[0]).unwrap();
                let second = topo.link(self.links[1]).unwrap();
                let shared = if second.touches(&first.endpoints.0) {
                    first.endpoints.0.clone()
                } else if second.touches(&first.endpoints.1) {
                    first.endpoints.1.clone()
                } else {
                    return Err(PathError::BrokenWalk(self.links[0], self.links[1]));
                };
                let start = first.other(&shared).unwrap().clone();
                let mut nodes = vec![start, shared];
                for window in self.links.windows(2) {
                    let (prev, next) = (window[0], window[1]);
                    let cur = nodes.last().unwrap().clone();
                    let link = topo.link(next).unwrap();
                    let following = link
                        .other(&cur)
                        .ok_or(PathError::BrokenWalk(prev, next))?
                        .clone();
                    nodes.push(following);
                }
                let mut interior = BTreeSet::new();
                for n in &nodes[..nodes.len()] {
                    if !interior.insert(n.clone()) {
                        return Err(PathError::RepeatedNode(n.clone()));
                    }
                }
                Ok(nodes)
            }
        }
    }

    /// Unordered endpoint pair; `None` for the empty path.
    pub fn endpoints(&self, topo: &Topology) -> Option<(NodeId, NodeId)> {
        let nodes = self.node_sequence(topo).ok()?;
        let (first, last) = (nodes.first()?, nodes.last()?);
        Some((first.clone(), last.clone()))
    }
}

/// True iff the link sets of `p` and `q` are disjoint.
pub fn link_disjoint(p: &Path, q: &Path) -> bool {
    let q_set = q.link_set();
    p.links().iter().all(|l| !q_set.contains(l))
}

/// A demand's link-disjoint primary and protection paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPair {
    pub demand_id: DemandId,
    pub primary: Path,
    pub protection: Path,
}

impl PathPair {
    pub fn new(
        demand: &Demand,
        primary: Path,
        protection: Path,
        topo: &Topology,
    ) -> Result<Self, PathError> {
        for path in [&primary, &protection] {
            let ends = path
                .endpoints(topo)
                .ok_or(PathError::EndpointMismatch(demand.id))?;
            let want = &demand.endpoints;
            let matches = (ends.0 == want.0 && ends.1 == want.1)
                || (ends.0 == want.1 && ends.1 == want.0);
            if !matches {
                return Err(PathError::EndpointMismatch(demand.id));
            }
        }
        if let Some(shared) = primary.links().iter().find(|l| protection.contains(**l)) {
            return Err(PathError::NotDisjoint(demand.id, *shared));
        }
        Ok(PathPair {
            demand_id: demand.id,
            primary,
            protection,
        })
    }
}
