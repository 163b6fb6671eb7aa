//! Algebraic verification of single-link-failure recovery.
//!
//! Protection-trail contents are modeled as XOR expressions over per-end
//! symbol atoms. For every possible link failure the verifier checks that
//! each affected demand can reconstruct its missing remote symbol from the
//! expressions arriving at its end nodes, and produces an explicit XOR
//! witness when it can.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cep::{EffNode, ProtectionTree};
use crate::group::{CppDesign, Mode};
use crate::model::{Demand, DemandId, LinkId, NodeId, Topology};
use crate::spp::SppSolution;
use crate::trail::{end_placements, Side, TrailError};

/// One transmitted symbol: the payload entering a demand at one side.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct SymbolAtom {
    pub demand: DemandId,
    pub side: Side,
}

impl fmt::Display for SymbolAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.side, self.demand)
    }
}

/// An XOR combination of symbol atoms (GF(2) vector, set-of-atoms form).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct SymbolExpr(BTreeSet<SymbolAtom>);

impl SymbolExpr {
    pub fn empty() -> Self {
        SymbolExpr(BTreeSet::new())
    }

    pub fn atom(demand: DemandId, side: Side) -> Self {
        SymbolExpr(BTreeSet::from([SymbolAtom { demand, side }]))
    }

    pub fn xor(&self, other: &SymbolExpr) -> SymbolExpr {
        SymbolExpr(self.0.symmetric_difference(&other.0).copied().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &SymbolAtom> {
        self.0.iter()
    }

    pub fn contains(&self, atom: &SymbolAtom) -> bool {
        self.0.contains(atom)
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Direction of flow on a link, relative to its stored endpoint order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Direction {
    /// endpoints.0 -> endpoints.1
    Forward,
    /// endpoints.1 -> endpoints.0
    Backward,
}

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error(transparent)]
    Trail(#[from] TrailError),
}

/// Accumulated expressions on every directed tree link, optionally with one
/// failed link cut out of the tree, one member whose primary has failed, and
/// a set of muted members emitting nothing.
///
/// Each end node injects everything it knows: its own payload plus — while
/// its primary works — the remote payload received over it, i.e. the full
/// demand parity. An end of the affected demand only knows its own payload.
/// The expression flowing toward a link end is then the XOR of the emissions
/// of every end node on the opposite side of that link — the cut form of
/// the trail accumulation.
pub fn link_expressions(
    tree: &ProtectionTree,
    demands: &BTreeMap<DemandId, Demand>,
    topo: &Topology,
    failed: Option<LinkId>,
    affected: Option<DemandId>,
    muted: &BTreeSet<DemandId>,
) -> Result<BTreeMap<(LinkId, Direction), SymbolExpr>, TrailError> {
    let ends = end_placements(tree, demands, topo)?;
    let adj = tree.eff_adjacency(topo);
    let emission = |d: DemandId, side: Side| -> SymbolExpr {
        if muted.contains(&d) {
            SymbolExpr::empty()
        } else if affected == Some(d) {
            SymbolExpr::atom(d, side)
        } else {
            SymbolExpr::atom(d, Side::S).xor(&SymbolExpr::atom(d, Side::T))
        }
    };
    let mut out = BTreeMap::new();
    for &l in &tree.tree_links {
        if Some(l) == failed {
            continue;
        }
        let (ea, eb) = tree.eff_ends(topo, l);
        let side_of = |start: &EffNode| -> SymbolExpr {
            let mut expr = SymbolExpr::empty();
            let mut seen: BTreeSet<EffNode> = BTreeSet::new();
            let mut stack = vec![start.clone()];
            while let Some(n) = stack.pop() {
                if !seen.insert(n.clone()) {
                    continue;
                }
                if let Some(here) = ends.get(&n) {
                    for &(d, side) in here {
                        expr = expr.xor(&emission(d, side));
                    }
                }
                for (el, next) in adj.get(&n).into_iter().flatten() {
                    if *el == l || Some(*el) == failed || seen.contains(next) {
                        continue;
                    }
                    stack.push(next.clone());
                }
            }
            expr
        };
        // Forward flow (a -> b) carries everything on a's side, and vice
        // versa
        out.insert((l, Direction::Forward), side_of(&ea));
        out.insert((l, Direction::Backward), side_of(&eb));
    }
    Ok(out)
}

/// Steady-state expressions with no failure and nobody muted.
pub fn steady_state(
    tree: &ProtectionTree,
    demands: &BTreeMap<DemandId, Demand>,
    topo: &Topology,
) -> Result<BTreeMap<(LinkId, Direction), SymbolExpr>, TrailError> {
    link_expressions(tree, demands, topo, None, None, &BTreeSet::new())
}

/// One basis element available to a decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Evidence {
    /// Expression arriving over an incident protection link.
    LinkExpr { link: LinkId, direction: Direction },
    /// A symbol known locally at the node.
    LocalAtom(SymbolAtom),
}

/// The XOR combination one end node used to reconstruct its missing symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeWitness {
    pub side: Side,
    pub node: NodeId,
    pub recovered: SymbolAtom,
    pub used: Vec<Evidence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Unaffected,
    /// Recovered through the coded protection structure.
    Recovered { witnesses: Vec<DecodeWitness> },
    /// Recovered over a dedicated 1+1 protection path.
    RecoveredDedicated,
    Lost { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub failed: LinkId,
    pub verdicts: BTreeMap<DemandId, Verdict>,
    /// Members whose coded protection route crosses the failed link and who
    /// therefore stop transmitting (relaxed mode only).
    pub muted: BTreeSet<DemandId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub pass: bool,
    pub reports: Vec<FailureReport>,
}

/// GF(2) span test: can `target` be written as an XOR of `basis` elements?
/// Returns the indices of one such combination.
fn in_span(basis: &[SymbolExpr], target: &SymbolExpr) -> Option<Vec<usize>> {
    // Gaussian elimination with combination tracking
    let mut rows: Vec<(SymbolExpr, BTreeSet<usize>)> = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        let mut expr = b.clone();
        let mut combo = BTreeSet::from([i]);
        for (pivot, pcombo) in &rows {
            if let Some(lead) = pivot.atoms().next() {
                if expr.contains(lead) {
                    expr = expr.xor(pivot);
                    combo = combo.symmetric_difference(pcombo).copied().collect();
                }
            }
        }
        if !expr.is_empty() {
            rows.push((expr, combo));
            rows.sort_by(|a, b| a.0.atoms().next().cmp(&b.0.atoms().next()));
        }
    }
    let mut expr = target.clone();
    let mut combo: BTreeSet<usize> = BTreeSet::new();
    loop {
        let Some(lead) = expr.atoms().next().copied() else {
            return Some(combo.into_iter().collect());
        };
        let row = rows
            .iter()
            .find(|(p, _)| p.atoms().next() == Some(&lead))?;
        expr = expr.xor(&row.0);
        combo = combo.symmetric_difference(&row.1).copied().collect();
    }
}

/// Simulates the failure of one link against a complete design.
pub fn simulate_failure(
    design: &CppDesign,
    failed: LinkId,
    topo: &Topology,
) -> Result<FailureReport, VerifyError> {
    if topo.link(failed).is_none() {
        return Err(VerifyError::UnknownLink(failed));
    }
    let demands = &design.spp.demands;
    // relaxed mode: everyone whose coded route rides the failed link goes
    // quiet so surviving expressions stay decodable
    let mut muted: BTreeSet<DemandId> = BTreeSet::new();
    if design.mode == Mode::Relaxed {
        for gd in &design.groups {
            for (&d, route) in &gd.tree.routes {
                if route.contains(failed) {
                    muted.insert(d);
                }
            }
        }
    }
    let mut verdicts: BTreeMap<DemandId, Verdict> = BTreeMap::new();
    for (&d, pair) in &design.spp.pairs {
        if !pair.primary.contains(failed) {
            verdicts.insert(d, Verdict::Unaffected);
            continue;
        }
        let gd = design
            .groups
            .iter()
            .find(|g| g.group.members.contains(&d))
            .expect("every demand belongs to a group");
        if gd.tree.apsed.contains(&d) {
            // dedicated protection is link-disjoint from the primary, so it
            // survives this failure by construction
            verdicts.insert(d, Verdict::RecoveredDedicated);
            continue;
        }
        let cut = gd.tree.tree_links.contains(&failed).then_some(failed);
        let exprs = link_expressions(&gd.tree, demands, topo, cut, Some(d), &muted)?;
        let mut witnesses = Vec::new();
        let mut lost: Option<String> = None;
        for side in [Side::S, Side::T] {
            let node = match side {
                Side::S => demands[&d].endpoints.0.clone(),
                Side::T => demands[&d].endpoints.1.clone(),
            };
            match decode_at(&gd.tree, &exprs, demands, topo, d, side, &node) {
                Some(w) => witnesses.push(w),
                None => {
                    lost = Some(format!(
                        "end {side} of demand {d} at node {node} cannot reconstruct {}",
                        SymbolAtom {
                            demand: d,
                            side: side.opposite()
                        }
                    ));
                    break;
                }
            }
        }
        verdicts.insert(
            d,
            match lost {
                Some(reason) => Verdict::Lost { reason },
                None => Verdict::Recovered { witnesses },
            },
        );
    }
    Ok(FailureReport {
        failed,
        verdicts,
        muted,
    })
}

#[allow(clippy::too_many_arguments)]
fn decode_at(
    tree: &ProtectionTree,
    exprs: &BTreeMap<(LinkId, Direction), SymbolExpr>,
    demands: &BTreeMap<DemandId, Demand>,
    topo: &Topology,
    demand: DemandId,
    side: Side,
    node: &NodeId,
) -> Option<DecodeWitness> {
    let mut basis: Vec<SymbolExpr> = Vec::new();
    let mut evidence: Vec<Evidence> = Vec::new();
    // expressions arriving over incident protection links
    for &l in topo.incident(node) {
        if !tree.tree_links.contains(&l) {
            continue;
        }
        let link = topo.link(l).unwrap();
        let direction = if link.endpoints.1 == *node {
            Direction::Forward
        } else {
            Direction::Backward
        };
        let Some(expr) = exprs.get(&(l, direction)) else { continue };
        basis.push(expr.clone());
        evidence.push(Evidence::LinkExpr { link: l, direction });
    }
    // symbols known locally: every co-located group member end knows its own
    // payload, and the remote one too while its primary is intact
    for (&j, route) in &tree.routes {
        let (a, b) = route.endpoints(topo)?;
        for (end_node, end_side) in [
            (&demands[&j].endpoints.0, Side::S),
            (&demands[&j].endpoints.1, Side::T),
        ] {
            if end_node == node && (a == *end_node || b == *end_node) {
                let mut known = vec![end_side];
                if j != demand {
                    known.push(end_side.opposite());
                }
                for side in known {
                    let atom = SymbolAtom { demand: j, side };
                    basis.push(SymbolExpr::atom(j, side));
                    evidence.push(Evidence::LocalAtom(atom));
                }
            }
        }
    }
    let missing = SymbolAtom {
        demand,
        side: side.opposite(),
    };
    let target = SymbolExpr::atom(demand, side.opposite());
    let combo = in_span(&basis, &target)?;
    Some(DecodeWitness {
        side,
        node: node.clone(),
        recovered: missing,
        used: combo.into_iter().map(|i| evidence[i].clone()).collect(),
    })
}

/// Simulates every single-link failure in ascending link-id order.
pub fn verify_all(design: &CppDesign, topo: &Topology) -> Result<VerificationOutcome, VerifyError> {
    let mut reports = Vec::new();
    let mut pass = true;
    for link in topo.links() {
        let report = simulate_failure(design, link.id, topo)?;
        if report
            .verdicts
            .values()
            .any(|v| matches!(v, Verdict::Lost { .. }))
        {
            pass = false;
        }
        reports.push(report);
    }
    Ok(VerificationOutcome { pass, reports })
}

/// Independent validity oracle for an SPP solution: sharing legality and
/// exact dimensioning of spare units against worst-case activation.
pub fn check_spp_validity(sol: &SppSolution, topo: &Topology) -> Result<(), String> {
    for (&link, units) in &sol.spare {
        for unit in units {
            let sharers: Vec<DemandId> = unit.sharers.iter().copied().collect();
            for (i, &a) in sharers.iter().enumerate() {
                for &b in &sharers[i + 1..] {
                    if !crate::model::link_disjoint(&sol.pairs[&a].primary, &sol.pairs[&b].primary)
                    {
                        return Err(format!(
                            "unit {} on link {link} shared by {a} and {b} with overlapping primaries",
                            unit.unit_index
                        ));
                    }
                }
            }
        }
    }
    // every protection link of every demand must hold a unit listing it
    for (&d, pair) in &sol.pairs {
        for &l in pair.protection.links() {
            let listed = sol
                .spare
                .get(&l)
                .map(|units| units.iter().any(|u| u.sharers.contains(&d)))
                .unwrap_or(false);
            if !listed {
                return Err(format!("demand {d} has no spare unit on link {l}"));
            }
        }
    }
    // spare width on each link == worst single-failure activation
    for (&link, _) in &sol.spare {
        let width = sol.spare_units(link);
        let mut worst = 0u32;
        for fail in topo.links() {
            if fail.id == link {
                continue;
            }
            let activated: u32 = sol
                .pairs
                .values()
                .filter(|p| p.primary.contains(fail.id) && p.protection.contains(link))
                .map(|p| sol.demands[&p.demand_id].units)
                .sum();
            worst = worst.max(activated);
        }
        if width != worst {
            return Err(format!(
                "link {link}: spare width {width} but worst-case activation {worst}"
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq)]
pub enum DiversityError {
    #[error("payload length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cannot code an empty payload set")]
    Empty,
}

/// Bytewise XOR parity over equal-length payloads.
pub fn diversity_parity(payloads: &[Vec<u8>]) -> Result<Vec<u8>, DiversityError> {
    let first = payloads.first().ok_or(DiversityError::Empty)?;
    let mut parity = vec![0u8; first.len()];
    for p in payloads {
        if p.len() != first.len() {
            return Err(DiversityError::LengthMismatch {
                expected: first.len(),
                got: p.len(),
            });
        }
        for (out, byte) in parity.iter_mut().zip(p) {
            *out ^= byte;
        }
    }
    Ok(parity)
}

/// Reconstructs the one missing payload from the parity and the surviving
/// payloads.
pub fn diversity_recover(
    parity: &[u8],
    surviving: &[Vec<u8>],
) -> Result<Vec<u8>, DiversityError> {
    let mut missing = parity.to_vec();
    for p in surviving {
        if p.len() != parity.len() {
            return Err(DiversityError::LengthMismatch {
                expected: parity.len(),
                got: p.len(),
            });
        }
        for (out, byte) in missing.iter_mut().zip(p) {
            *out ^= byte;
        }
    }
    Ok(missing)
}
