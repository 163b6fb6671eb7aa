//! Conversion of a protection tree into a hierarchy of linear 1+N coding
//! trails: a truck trail spanning the tree edge-to-edge, plus branch trails
//! spawned recursively at branch points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cep::{EffNode, ProtectionTree};
use crate::group::CodingGroup;
use crate::model::{Demand, DemandId, LinkId, Topology};

/// Which payload of a demand an atom or end node belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    S,
    T,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::S => Side::T,
            Side::T => Side::S,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::S => f.write_str("S"),
            Side::T => f.write_str("T"),
        }
    }
}

/// Reference to one end node of a demand inside an entity expression.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct EndRef {
    pub demand: DemandId,
    pub side: Side,
    pub complemented: bool,
}

impl fmt::Display for EndRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prime = if self.complemented { "'" } else { "" };
        write!(f, "{}{}_{}", self.side, prime, self.demand)
    }
}

/// Swap S and T references and toggle the complement marks. Involution.
pub fn complement(expr: &[EndRef]) -> Vec<EndRef> {
    let mut out: Vec<EndRef> = expr
        .iter()
        .map(|r| EndRef {
            demand: r.demand,
            side: r.side.opposite(),
            complemented: !r.complemented,
        })
        .collect();
    out.sort();
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum EntityKind {
    /// End node physically on the trail.
    RealOnTrail,
    /// End node attached to the trail via a dedicated path.
    DirectAttached,
    /// Merged representation of several end nodes behind a common link.
    BranchPoint,
}

/// One placed entity along a trail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailEntity {
    pub kind: EntityKind,
    pub node: EffNode,
    /// Index into the trail's node sequence.
    pub position: usize,
    /// Shown end-node expression (after step-4 omissions).
    pub represents: Vec<EndRef>,
    /// All end nodes spanned behind a branch point, including omitted ones.
    pub spans: Vec<(DemandId, Side)>,
    /// Off-trail links of a direct attachment (the path to the end node).
    /// Branch-point subtrees are covered by their own trails instead.
    pub attachment: Vec<LinkId>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrailId(pub u32);

impl fmt::Display for TrailId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A linear 1+N coding trail over the protection tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trail {
    pub id: TrailId,
    /// 0 = truck trail, k >= 1 = branch depth.
    pub level: u32,
    pub nodes: Vec<EffNode>,
    pub links: Vec<LinkId>,
    pub entities: Vec<TrailEntity>,
    /// Parent trail and the index of the branch-point entity there.
    pub parent: Option<(TrailId, usize)>,
    /// Complemented branch-point expression seen at the trail origin.
    pub origin_complement: Option<Vec<EndRef>>,
}

/// All trails of one group plus the single placement of every end node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailHierarchy {
    pub group_id: crate::group::GroupId,
    pub trails: Vec<Trail>,
    pub placement: BTreeMap<(DemandId, Side), TrailId>,
}

impl TrailHierarchy {
    pub fn trail(&self, id: TrailId) -> &Trail {
        &self.trails[id.0 as usize]
    }

    /// Truck trails (one per connected tree component).
    pub fn trucks(&self) -> impl Iterator<Item = &Trail> {
        self.trails.iter().filter(|t| t.level == 0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrailError {
    #[error("end node {1} of demand {0} does not lie on the protection tree")]
    MalformedTree(DemandId, String),
}

/// Where each remaining member's end nodes sit on the effective tree.
pub fn end_placements(
    tree: &ProtectionTree,
    demands: &BTreeMap<DemandId, Demand>,
    topo: &Topology,
) -> Result<BTreeMap<EffNode, Vec<(DemandId, Side)>>, TrailError> {
    let mut ends: BTreeMap<EffNode, Vec<(DemandId, Side)>> = BTreeMap::new();
    for (&d, route) in &tree.routes {
        let nodes = route
            .node_sequence(topo)
            .map_err(|_| TrailError::MalformedTree(d, "broken route".into()))?;
        let links = route.links();
        let (first, last) = match (nodes.first(), nodes.last()) {
            (Some(f), Some(l)) => (f.clone(), l.clone()),
            _ => return Err(TrailError::MalformedTree(d, "empty route".into())),
        };
        let demand = &demands[&d];
        let (s_node, s_link, t_node, t_link) = if first == demand.endpoints.0 {
            (first, links[0], last, links[links.len() - 1])
        } else if last == demand.endpoints.0 {
            (last, links[links.len() - 1], first, links[0])
        } else {
            return Err(TrailError::MalformedTree(d, demand.endpoints.0.to_string()));
        };
        let s_eff = tree.eff_endpoint(&s_node, s_link);
        let t_eff = tree.eff_endpoint(&t_node, t_link);
        ends.entry(s_eff).or_default().push((d, Side::S));
        ends.entry(t_eff).or_default().push((d, Side::T));
    }
    for refs in ends.values_mut() {
        refs.sort();
    }
    Ok(ends)
}

struct Builder<'a> {
    tree: &'a ProtectionTree,
    topo: &'a Topology,
    adj: BTreeMap<EffNode, Vec<(LinkId, EffNode)>>,
    ends: BTreeMap<EffNode, Vec<(DemandId, Side)>>,
    rng: ChaCha8Rng,
    trails: Vec<Trail>,
    placement: BTreeMap<(DemandId, Side), TrailId>,
}

/// Builds the trail hierarchy for a group's protection tree.
///
/// The initial truck-trail link is the longest tree link (ties by lowest
/// id). Where the construction allows a free choice — which link continues
/// a trail at a fork — the choice is drawn from a deterministic generator
/// seeded by `seed`, so runs are reproducible and different seeds exercise
/// the construction's freedom.
pub fn build_trails(
    group: &CodingGroup,
    tree: &ProtectionTree,
    demands: &BTreeMap<DemandId, Demand>,
    topo: &Topology,
    seed: u64,
) -> Result<TrailHierarchy, TrailError> {
    let ends = end_placements(tree, demands, topo)?;
    let adj = tree.eff_adjacency(topo);
    for node in ends.keys() {
        if !adj.contains_key(node) && !tree.tree_links.is_empty() {
            let (d, _) = ends[node][0];
            return Err(TrailError::MalformedTree(d, node.to_string()));
        }
    }
    let mut builder = Builder {
        tree,
        topo,
        adj,
        ends,
        rng: ChaCha8Rng::seed_from_u64(seed ^ (u64::from(group.id.0) << 32)),
        trails: Vec::new(),
        placement: BTreeMap::new(),
    };
    // one truck trail per connected component, components ordered by their
    // smallest node
    let mut assigned: BTreeSet<EffNode> = BTreeSet::new();
    let components = builder.components();
    for comp in components {
        if comp.iter().any(|n| assigned.contains(n)) {
            continue;
        }
        assigned.extend(comp.iter().cloned());
        builder.build_truck(&comp);
    }
    Ok(TrailHierarchy {
        group_id: group.id,
        trails: builder.trails,
        placement: builder.placement,
    })
}

impl Builder<'_> {
    fn components(&self) -> Vec<BTreeSet<EffNode>> {
        let mut seen: BTreeSet<EffNode> = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.adj.keys() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start.clone()];
            while let Some(n) = stack.pop() {
                if !comp.insert(n.clone()) {
                    continue;
                }
                for (_, next) in &self.adj[&n] {
                    if !comp.contains(next) {
                        stack.push(next.clone());
                    }
                }
            }
            seen.extend(comp.iter().cloned());
            out.push(comp);
        }
        out
    }

    fn build_truck(&mut self, comp: &BTreeSet<EffNode>) {
        // step 1: longest link inside the component, lowest id on ties
        let mut candidates: Vec<LinkId> = self
            .tree
            .tree_links
            .iter()
            .copied()
            .filter(|&l| {
                let (a, _) = self.tree.eff_ends(self.topo, l);
                comp.contains(&a)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            self.topo
                .length(b)
                .partial_cmp(&self.topo.length(a))
                .unwrap()
                .then(a.cmp(&b))
        });
        let Some(&initial) = candidates.first() else { return };
        let (a, b) = self.tree.eff_ends(self.topo, initial);
        let mut nodes = vec![a, b];
        let mut links = vec![initial];
        // step 2: extend both ends to the edges of the tree
        self.extend(&mut nodes, &mut links, true);
        self.extend(&mut nodes, &mut links, false);
        self.place_trail(0, nodes, links, None, None);
    }

    /// Extends the trail from its front (`true`) or back (`false`) until a
    /// leaf; forks are resolved by the seeded generator.
    fn extend(&mut self, nodes: &mut Vec<EffNode>, links: &mut Vec<LinkId>, front: bool) {
        loop {
            let cur = if front {
                nodes.first().unwrap().clone()
            } else {
                nodes.last().unwrap().clone()
            };
            let used: BTreeSet<LinkId> = links.iter().copied().collect();
            let options: Vec<(LinkId, EffNode)> = self.adj[&cur]
                .iter()
                .filter(|(l, _)| !used.contains(l))
                .cloned()
                .collect();
            if options.is_empty() {
                return;
            }
            let pick = if options.len() == 1 {
                0
            } else {
                self.rng.gen_range(0..options.len())
            };
            let (l, next) = options[pick].clone();
            if front {
                nodes.insert(0, next);
                links.insert(0, l);
            } else {
                nodes.push(next);
                links.push(l);
            }
        }
    }

    /// Steps 3-12: place entities along a trail, then recurse into every
    /// branch point.
    fn place_trail(
        &mut self,
        level: u32,
        nodes: Vec<EffNode>,
        links: Vec<LinkId>,
        parent: Option<(TrailId, usize)>,
        origin_complement: Option<Vec<EndRef>>,
    ) -> TrailId {
        let id = TrailId(self.trails.len() as u32);
        let trail_links: BTreeSet<LinkId> = links.iter().copied().collect();
        let mut entities: Vec<TrailEntity> = Vec::new();
        // branch entities to expand later: (entity index, branch node, link, far node)
        let mut pending: Vec<(usize, EffNode, LinkId, EffNode)> = Vec::new();

        if let Some(expr) = &origin_complement {
            entities.push(TrailEntity {
                kind: EntityKind::BranchPoint,
                node: nodes[0].clone(),
                position: 0,
                represents: expr.clone(),
                spans: Vec::new(),
                attachment: Vec::new(),
            });
        }

        for (pos, node) in nodes.iter().enumerate() {
            let is_origin = origin_complement.is_some() && pos == 0;
            if !is_origin {
                // Lemma-1 entities: end nodes physically on the trail,
                // ordered along zero-length hypothetical links
                if let Some(here) = self.ends.get(node) {
                    for &(d, side) in here {
                        entities.push(TrailEntity {
                            kind: EntityKind::RealOnTrail,
                            node: node.clone(),
                            position: pos,
                            represents: vec![EndRef {
                                demand: d,
                                side,
                                complemented: false,
                            }],
                            spans: Vec::new(),
                            attachment: Vec::new(),
                        });
                        self.placement.insert((d, side), id);
                    }
                }
            }
            // off-trail subtrees hanging at this node (none at an origin:
            // they belong to the parent trail)
            if is_origin {
                continue;
            }
            for (l, far) in self.adj[node].clone() {
                if trail_links.contains(&l) {
                    continue;
                }
                let (subtree_ends, subtree_links) = self.subtree_ends(node, l, &far);
                match subtree_ends.len() {
                    0 => {}
                    1 => {
                        let (d, side) = subtree_ends[0];
                        entities.push(TrailEntity {
                            kind: EntityKind::DirectAttached,
                            node: node.clone(),
                            position: pos,
                            represents: vec![EndRef {
                                demand: d,
                                side,
                                complemented: false,
                            }],
                            spans: subtree_ends.clone(),
                            attachment: subtree_links,
                        });
                        self.placement.insert((d, side), id);
                    }
                    _ => {
                        // step 4: omit demands bounded entirely within this
                        // branch point
                        let spanned: BTreeSet<(DemandId, Side)> =
                            subtree_ends.iter().copied().collect();
                        let shown: Vec<EndRef> = subtree_ends
                            .iter()
                            .filter(|(d, side)| {
                                !spanned.contains(&(*d, side.opposite()))
                            })
                            .map(|&(demand, side)| EndRef {
                                demand,
                                side,
                                complemented: false,
                            })
                            .collect();
                        let idx = entities.len();
                        entities.push(TrailEntity {
                            kind: EntityKind::BranchPoint,
                            node: node.clone(),
                            position: pos,
                            represents: shown,
                            spans: subtree_ends,
                            attachment: Vec::new(),
                        });
                        pending.push((idx, node.clone(), l, far.clone()));
                    }
                }
            }
        }

        self.trails.push(Trail {
            id,
            level,
            nodes,
            links,
            entities,
            parent,
            origin_complement,
        });

        // steps 6-12: one branch trail per branch point
        for (entity_idx, branch_node, first_link, far) in pending {
            let shown = self.trails[id.0 as usize].entities[entity_idx]
                .represents
                .clone();
            let origin = complement(&shown);
            let mut nodes = vec![branch_node, far];
            let mut links = vec![first_link];
            // step 7: extend away from the branch point only
            self.extend(&mut nodes, &mut links, false);
            self.place_trail(level + 1, nodes, links, Some((id, entity_idx)), Some(origin));
        }
        id
    }

    /// End nodes and links inside the subtree reached from `node` via `link`.
    fn subtree_ends(
        &self,
        node: &EffNode,
        link: LinkId,
        far: &EffNode,
    ) -> (Vec<(DemandId, Side)>, Vec<LinkId>) {
        let mut out = Vec::new();
        let mut links = BTreeSet::from([link]);
        let mut stack = vec![(far.clone(), link)];
        let mut seen = BTreeSet::from([node.clone()]);
        while let Some((n, via)) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            links.insert(via);
            if let Some(here) = self.ends.get(&n) {
                out.extend(here.iter().copied());
            }
            for (l, next) in &self.adj[&n] {
                if !seen.contains(next) {
                    stack.push((next.clone(), *l));
                }
            }
        }
        out.sort();
        (out, links.into_iter().collect())
    }
}

/// Fuses maximal runs of adjacent hypothetical entities into single merged
/// entities. Entities physically on the trail are never fused.
pub fn merge_adjacent(trail: &Trail) -> Trail {
    let mut merged: Vec<TrailEntity> = Vec::new();
    let mut run: Vec<TrailEntity> = Vec::new();
    let flush = |run: &mut Vec<TrailEntity>, merged: &mut Vec<TrailEntity>| {
        if run.len() >= 2 {
            let mut represents = Vec::new();
            let mut spans = Vec::new();
            for e in run.iter() {
                represents.extend(e.represents.iter().copied());
                spans.extend(e.spans.iter().copied());
            }
            represents.sort();
            spans.sort();
            merged.push(TrailEntity {
                kind: EntityKind::BranchPoint,
                node: run[0].node.clone(),
                position: run[0].position,
                represents,
                spans,
                attachment: run.iter().flat_map(|e| e.attachment.iter().copied()).collect(),
            });
        } else {
            merged.extend(run.drain(..));
        }
        run.clear();
    };
    for e in &trail.entities {
        // a run breaks at a real end node or across a physical trail link
        if run.last().is_some_and(|p| p.position != e.position) {
            flush(&mut run, &mut merged);
        }
        if e.kind == EntityKind::RealOnTrail {
            flush(&mut run, &mut merged);
            merged.push(e.clone());
        } else {
            run.push(e.clone());
        }
    }
    flush(&mut run, &mut merged);
    Trail {
        entities: merged,
        ..trail.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(demand: u32, side: Side, complemented: bool) -> EndRef {
        EndRef {
            demand: DemandId(demand),
            side,
            complemented,
        }
    }

    #[test]
    fn complement_swaps_sides_and_is_an_involution() {
        let expr = vec![r(1, Side::S, false), r(2, Side::T, false)];
        let comp = complement(&expr);
        assert_eq!(comp, vec![r(1, Side::T, true), r(2, Side::S, true)]);
        assert_eq!(complement(&comp), expr);
    }

    #[test]
    fn merge_fuses_hypothetical_runs_only() {
        let node = EffNode::Node(crate::model::NodeId::from("B"));
        let real = TrailEntity {
            kind: EntityKind::RealOnTrail,
            node: node.clone(),
            position: 0,
            represents: vec![r(1, Side::S, false)],
            spans: vec![],
            attachment: vec![],
        };
        let direct = |d: u32, side: Side| TrailEntity {
            kind: EntityKind::DirectAttached,
            node: node.clone(),
            position: 1,
            represents: vec![r(d, side, false)],
            spans: vec![(DemandId(d), side)],
            attachment: vec![],
        };
        let trail = Trail {
            id: TrailId(0),
            level: 0,
            nodes: vec![node.clone()],
            links: vec![],
            entities: vec![real.clone(), direct(2, Side::S), direct(4, Side::T), real.clone()],
            parent: None,
            origin_complement: None,
        };
        let merged = merge_adjacent(&trail);
        assert_eq!(merged.entities.len(), 3);
        assert_eq!(merged.entities[1].kind, EntityKind::BranchPoint);
        assert_eq!(
            merged.entities[1].represents,
            vec![r(2, Side::S, false), r(4, Side::T, false)]
        );
        // idempotence
        assert_eq!(merge_adjacent(&merged), merged);
    }

    #[test]
    fn all_real_trail_unchanged_by_merge() {
        let node = EffNode::Node(crate::model::NodeId::from("A"));
        let mk = |d: u32| TrailEntity {
            kind: EntityKind::RealOnTrail,
            node: node.clone(),
            position: 0,
            represents: vec![r(d, Side::S, false)],
            spans: vec![],
            attachment: vec![],
        };
        let trail = Trail {
            id: TrailId(0),
            level: 0,
            nodes: vec![node.clone()],
            links: vec![],
            entities: vec![mk(1), mk(2), mk(3)],
            parent: None,
            origin_complement: None,
        };
        assert_eq!(merge_adjacent(&trail), trail);
    }
}
