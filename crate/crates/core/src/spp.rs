//! Shared path protection baseline: per-demand disjoint path pairs plus a
//! per-link spare-unit sharing assignment under failure-disjoint sharing.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{link_disjoint, Demand, DemandId, LinkId, PathPair, Topology};
use crate::routing::{route_demand, Metric, RoutingError};

/// One unit of spare capacity on a link, shared by demands whose primary
/// paths are pairwise link-disjoint (no single failure activates two of
/// them).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpareUnit {
    pub unit_index: u32,
    pub sharers: BTreeSet<DemandId>,
}

/// A complete SPP solution: routed pairs and the sharing assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SppSolution {
    pub demands: BTreeMap<DemandId, Demand>,
    pub pairs: BTreeMap<DemandId, PathPair>,
    pub spare: BTreeMap<LinkId, Vec<SpareUnit>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SppError {
    #[error("demand {0}: {1}")]
    Routing(DemandId, RoutingError),
}

/// Routes every demand and assigns spare units greedily.
///
/// Demands are processed in ascending id order; a protection path joins the
/// lowest-indexed compatible spare unit on each of its links, else opens a
/// new one. Deterministic for a given input.
pub fn solve_spp(
    topo: &Topology,
    demands: &[Demand],
    metric: Metric,
) -> Result<SppSolution, SppError> {
    let mut sorted: Vec<&Demand> = demands.iter().collect();
    sorted.sort_by_key(|d| d.id);
    let mut pairs = BTreeMap::new();
    for d in &sorted {
        let pair = route_demand(topo, d, metric).map_err(|e| SppError::Routing(d.id, e))?;
        pairs.insert(d.id, pair);
    }
    let demands: BTreeMap<DemandId, Demand> = sorted.iter().map(|d| (d.id, (*d).clone())).collect();
    let spare = assign_spare(&pairs, &demands);
    Ok(SppSolution {
        demands,
        pairs,
        spare,
    })
}

/// First-fit spare-unit assignment over pre-routed pairs.
pub fn assign_spare(
    pairs: &BTreeMap<DemandId, PathPair>,
    demands: &BTreeMap<DemandId, Demand>,
) -> BTreeMap<LinkId, Vec<SpareUnit>> {
    let mut spare: BTreeMap<LinkId, Vec<SpareUnit>> = BTreeMap::new();
    for (&id, pair) in pairs {
        debug_assert!(demands.contains_key(&id));
        for &link in pair.protection.links() {
            let units = spare.entry(link).or_default();
            let slot = units.iter_mut().find(|unit| {
                unit.sharers
                    .iter()
                    .all(|other| link_disjoint(&pair.primary, &pairs[other].primary))
            });
            match slot {
                Some(unit) => {
                    unit.sharers.insert(id);
                }
                None => {
                    let unit_index = units.len() as u32;
                    units.push(SpareUnit {
                        unit_index,
                        sharers: BTreeSet::from([id]),
                    });
                }
            }
        }
    }
    spare
}

impl SppSolution {
    /// Working units on a link: sum of units of demands whose primary
    /// traverses it.
    pub fn working_units(&self, link: LinkId) -> u32 {
        self.pairs
            .values()
            .filter(|p| p.primary.contains(link))
            .map(|p| self.demands[&p.demand_id].units)
            .sum()
    }

    /// Spare units on a link: each spare unit is as wide as its widest
    /// sharer.
    pub fn spare_units(&self, link: LinkId) -> u32 {
        self.spare
            .get(&link)
            .map(|units| {
                units
                    .iter()
                    .map(|u| {
                        u.sharers
                            .iter()
                            .map(|d| self.demands[d].units)
                            .max()
                            .unwrap_or(0)
                    })
                    .sum()
            })
            .unwrap_or(0)
    }

    pub fn working_weighted(&self, topo: &Topology) -> f64 {
        topo.links()
            .map(|l| f64::from(self.working_units(l.id)) * l.length)
            .sum()
    }

    pub fn spare_weighted(&self, topo: &Topology) -> f64 {
        topo.links()
            .map(|l| f64::from(self.spare_units(l.id)) * l.length)
            .sum()
    }
}

/// Spare capacity percentage and its length-weighted components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scap {
    pub spare_weighted: f64,
    pub working_weighted: f64,
    pub percent: f64,
}

/// SCaP = 100 * spare / (spare + working), length-weighted.
pub fn scap(sol: &SppSolution, topo: &Topology) -> Scap {
    let spare = sol.spare_weighted(topo);
    let working = sol.working_weighted(topo);
    let total = spare + working;
    let percent = if total == 0.0 { 0.0 } else { 100.0 * spare / total };
    Scap {
        spare_weighted: spare,
        working_weighted: working,
        percent,
    }
}
