//! Shared test instances: small hand-built scenarios with known-by-hand
//! optima, plus a seeded random instance generator.
//!
//! These are compiled into the library (not just `#[cfg(test)]`) so the
//! integration tests, the acceptance suite and the benchmarks can reuse
//! them.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::group::{CodingGroup, GroupId, Mode};
use crate::model::{Demand, DemandId, Link, LinkId, NodeId, Path, PathPair, Topology};
use crate::routing::Metric;
use crate::spp::{solve_spp, SppSolution};

fn n(s: &str) -> NodeId {
    NodeId::from(s)
}

fn link(id: u32, a: &str, b: &str, length: f64) -> Link {
    Link {
        id: LinkId(id),
        endpoints: (n(a), n(b)),
        length,
    }
}

fn topo(nodes: &[&str], links: Vec<Link>) -> Topology {
    Topology::new(nodes.iter().map(|s| NodeId::from(*s)), links).unwrap()
}

fn path(topo: &Topology, links: &[u32]) -> Path {
    Path::new(links.iter().map(|&l| LinkId(l)).collect(), topo).unwrap()
}

/// Unit square: two equal-cost disjoint routes between opposite corners.
pub fn square() -> Topology {
    topo(
        &["A", "B", "C", "D"],
        vec![
            link(1, "A", "B", 1.0),
            link(2, "B", "C", 1.0),
            link(3, "C", "D", 1.0),
            link(4, "D", "A", 1.0),
        ],
    )
}

/// A bridge graph with no disjoint pair between its ends.
pub fn path_graph() -> Topology {
    topo(
        &["A", "B", "C"],
        vec![link(1, "A", "B", 1.0), link(2, "B", "C", 1.0)],
    )
}

/// The classic trap: the shortest S-T path blocks every disjoint
/// complement, so the optimal pair avoids it.
pub fn trap() -> Topology {
    topo(
        &["S", "A", "B", "T"],
        vec![
            link(1, "S", "A", 1.0),
            link(2, "A", "B", 1.0),
            link(3, "B", "T", 1.0),
            link(4, "S", "B", 4.0),
            link(5, "A", "T", 4.0),
        ],
    )
}

/// Two demands whose protections share link 5 (P-Q). With
/// `disjoint_primaries` the primaries are single separate links and the
/// shared link needs one spare unit; otherwise the primaries share a middle
/// link and the spare unit cannot be shared.
pub fn sharing_ladder(disjoint_primaries: bool) -> (Topology, Vec<Demand>) {
    let shared_core = vec![
        link(3, "S1", "P", 2.0),
        link(4, "Q", "T1", 2.0),
        link(5, "P", "Q", 3.0),
        link(6, "S2", "P", 2.0),
        link(7, "Q", "T2", 2.0),
    ];
    let t = if disjoint_primaries {
        let mut links = vec![link(1, "S1", "T1", 1.0), link(2, "S2", "T2", 1.0)];
        links.extend(shared_core);
        topo(&["S1", "T1", "S2", "T2", "P", "Q"], links)
    } else {
        let mut links = vec![
            link(1, "S1", "M", 1.0),
            link(2, "N", "T1", 1.0),
            link(8, "S2", "M", 1.0),
            link(9, "N", "T2", 1.0),
            link(10, "M", "N", 1.0),
        ];
        links.extend(shared_core);
        topo(&["S1", "T1", "S2", "T2", "P", "Q", "M", "N"], links)
    };
    let demands = vec![
        Demand::new(DemandId(1), n("S1"), n("T1"), 1, &t).unwrap(),
        Demand::new(DemandId(2), n("S2"), n("T2"), 1, &t).unwrap(),
    ];
    (t, demands)
}

/// The protection link both ladder demands route over.
pub fn sharing_ladder_shared_link() -> LinkId {
    LinkId(5)
}

pub fn sharing_ladder_solution(disjoint_primaries: bool) -> (Topology, SppSolution) {
    let (t, demands) = sharing_ladder(disjoint_primaries);
    let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
    (t, sol)
}

/// Two demands whose primaries share a link and whose protections share a
/// link: they can never join the same coding group.
pub fn conflicting_pair() -> (Topology, SppSolution) {
    sharing_ladder_solution(false)
}

/// Four demands whose SPP sharing structure converts into two coding groups
/// with zero extra capacity.
///
/// Demands 1 and 4 share a primary link (W1-W2), so they cannot be grouped;
/// protections of 1 and 2 meet on S1-P, protections of 3 and 4 share the
/// long P-Q and Q-R spans. The greedy merge builds groups {3,4} then {1,2},
/// and the resulting trees cover exactly the links the SPP spare units
/// occupied.
pub fn conversion_scenario() -> (Topology, SppSolution) {
    let t = topo(
        &[
            "S1", "D1", "S2", "D2", "S3", "D3", "S4", "D4", "W1", "W2", "P", "Q", "R",
        ],
        vec![
            link(1, "S1", "W1", 1.0),
            link(2, "W1", "W2", 1.0),
            link(3, "W2", "D1", 1.0),
            link(4, "S2", "D2", 1.0),
            link(5, "P", "Q", 5.0),
            link(6, "S3", "D3", 1.0),
            link(7, "S4", "W1", 1.0),
            link(8, "W2", "D4", 1.0),
            link(9, "S1", "P", 2.0),
            link(10, "Q", "D1", 2.0),
            link(11, "S2", "S1", 2.0),
            link(12, "P", "D2", 2.0),
            link(13, "S3", "P", 2.0),
            link(14, "S4", "P", 2.0),
            link(15, "Q", "R", 4.0),
            link(16, "R", "D3", 7.0),
            link(17, "R", "D4", 5.0),
        ],
    );
    let demands = vec![
        Demand::new(DemandId(1), n("S1"), n("D1"), 1, &t).unwrap(),
        Demand::new(DemandId(2), n("S2"), n("D2"), 1, &t).unwrap(),
        Demand::new(DemandId(3), n("S3"), n("D3"), 1, &t).unwrap(),
        Demand::new(DemandId(4), n("S4"), n("D4"), 1, &t).unwrap(),
    ];
    let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
    // the scenario depends on these exact routes; fail loudly if the
    // instance drifts
    debug_assert_eq!(sol.pairs[&DemandId(1)].protection, path(&t, &[9, 5, 10]));
    debug_assert_eq!(sol.pairs[&DemandId(4)].primary, path(&t, &[7, 2, 8]));
    (t, sol)
}

/// Demand 1's primary (link 1) lies on demand 2's protection: legal under
/// relaxed grouping, a rule violation under strict grouping.
pub fn primary_protection_overlap() -> (Topology, SppSolution) {
    let t = topo(
        &["A", "B", "C", "S2", "T2"],
        vec![
            link(1, "A", "B", 1.0),
            link(2, "A", "C", 2.0),
            link(3, "C", "B", 2.0),
            link(4, "S2", "T2", 1.0),
            link(5, "S2", "A", 2.0),
            link(6, "B", "T2", 2.0),
        ],
    );
    let demands = vec![
        Demand::new(DemandId(1), n("A"), n("B"), 1, &t).unwrap(),
        Demand::new(DemandId(2), n("S2"), n("T2"), 1, &t).unwrap(),
    ];
    let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
    debug_assert!(sol.pairs[&DemandId(2)].protection.contains(LinkId(1)));
    (t, sol)
}

/// Two demands protected along a common chain S1-A-B-D1 / S2-A-B-D2; their
/// coded tree is a single trail through the middle link A-B. Returns the
/// middle link id too.
pub fn two_demand_chain() -> (Topology, SppSolution, LinkId) {
    let t = topo(
        &["S1", "D1", "S2", "D2", "A", "B"],
        vec![
            link(1, "S1", "A", 1.0),
            link(2, "A", "B", 2.0),
            link(3, "B", "D1", 1.0),
            link(4, "S2", "A", 1.0),
            link(5, "B", "D2", 1.0),
            link(6, "S1", "D1", 1.0),
            link(7, "S2", "D2", 1.0),
        ],
    );
    let demands = vec![
        Demand::new(DemandId(1), n("S1"), n("D1"), 1, &t).unwrap(),
        Demand::new(DemandId(2), n("S2"), n("D2"), 1, &t).unwrap(),
    ];
    let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
    (t, sol, LinkId(2))
}

fn ring_group_with_lengths(ring_lengths: [f64; 6]) -> (Topology, CodingGroup, BTreeMap<DemandId, PathPair>) {
    // ring B-C-D-E-F-A-B carrying five protections; primaries are direct
    // chords
    let [bc, cd, de, ef, fa, ab] = ring_lengths;
    let t = topo(
        &["A", "B", "C", "D", "E", "F"],
        vec![
            link(1, "B", "C", bc),
            link(2, "C", "D", cd),
            link(3, "D", "E", de),
            link(4, "E", "F", ef),
            link(5, "F", "A", fa),
            link(6, "A", "B", ab),
            link(7, "F", "B", 1.0),
            link(8, "A", "C", 1.0),
            link(9, "B", "D", 1.0),
            link(10, "C", "E", 1.0),
            link(11, "D", "F", 1.0),
        ],
    );
    let spec: [(u32, &str, &str, u32, [u32; 2]); 5] = [
        (1, "B", "D", 9, [1, 2]),
        (2, "C", "E", 10, [2, 3]),
        (3, "D", "F", 11, [3, 4]),
        (4, "F", "B", 7, [5, 6]),
        (5, "A", "C", 8, [6, 1]),
    ];
    let mut pairs = BTreeMap::new();
    for (id, a, b, chord, prot) in spec {
        let d = Demand::new(DemandId(id), n(a), n(b), 1, &t).unwrap();
        let pair = PathPair::new(&d, path(&t, &[chord]), path(&t, &prot), &t).unwrap();
        pairs.insert(DemandId(id), pair);
    }
    let group = CodingGroup::from_members(
        GroupId(1),
        pairs.keys().copied().collect(),
        Mode::Strict,
        &pairs,
    );
    (t, group, pairs)
}

/// Five demands whose protections jointly cover a six-link ring; link 6
/// (A-B) is the longest and is the one cycle elimination removes.
pub fn ring_group() -> (Topology, CodingGroup, BTreeMap<DemandId, PathPair>) {
    ring_group_with_lengths([1.0, 2.0, 3.0, 2.0, 1.0, 10.0])
}

pub fn ring_longest_link() -> LinkId {
    LinkId(6)
}

/// Same ring with all lengths equal: removal ties break toward the lowest
/// link id.
pub fn ring_group_equal_lengths() -> (Topology, CodingGroup, BTreeMap<DemandId, PathPair>) {
    ring_group_with_lengths([1.0; 6])
}

/// Two nodes joined by three internally disjoint routes: exactly three
/// simple cycles. Returns the full link set as the fragment.
pub fn theta_graph() -> (Topology, BTreeSet<LinkId>) {
    let t = topo(
        &["X", "Y", "M", "N"],
        vec![
            link(1, "X", "Y", 1.0),
            link(2, "X", "M", 1.0),
            link(3, "M", "Y", 1.0),
            link(4, "X", "N", 1.0),
            link(5, "N", "Y", 1.0),
        ],
    );
    let fragment = t.links().map(|l| l.id).collect();
    (t, fragment)
}

/// Relaxed-mode ring where removing the longest link (1, A-B) would reroute
/// demand 1's protection across its own primary (which rides ring link 4),
/// so the extended procedure removes the second-longest link (4, D-E)
/// instead.
pub fn relaxed_conflict_ring() -> (Topology, CodingGroup, BTreeMap<DemandId, PathPair>) {
    let t = topo(
        &["A", "B", "C", "D", "E", "F", "P", "Q", "R"],
        vec![
            link(1, "A", "B", 5.0),
            link(2, "B", "C", 1.0),
            link(3, "C", "D", 1.0),
            link(4, "D", "E", 4.0),
            link(5, "E", "F", 1.0),
            link(6, "F", "A", 1.0),
            link(7, "A", "P", 1.0),
            link(8, "P", "D", 1.0),
            link(9, "E", "Q", 1.0),
            link(10, "Q", "B", 1.0),
            link(11, "B", "D", 1.0),
            link(12, "D", "F", 1.0),
            link(13, "F", "R", 1.0),
            link(14, "R", "A", 1.0),
        ],
    );
    let spec: [(u32, &str, &str, &[u32], &[u32]); 4] = [
        // demand 1's primary detours through ring link 4 (D-E)
        (1, "A", "B", &[7, 8, 4, 9, 10], &[1]),
        (2, "B", "D", &[11], &[2, 3]),
        (3, "D", "F", &[12], &[4, 5]),
        (4, "F", "A", &[13, 14], &[6]),
    ];
    let mut pairs = BTreeMap::new();
    for (id, a, b, primary, prot) in spec {
        let d = Demand::new(DemandId(id), n(a), n(b), 1, &t).unwrap();
        let pair = PathPair::new(&d, path(&t, primary), path(&t, prot), &t).unwrap();
        pairs.insert(DemandId(id), pair);
    }
    let group = CodingGroup::from_members(
        GroupId(1),
        pairs.keys().copied().collect(),
        Mode::Relaxed,
        &pairs,
    );
    (t, group, pairs)
}

pub fn relaxed_conflict_expected_removal() -> LinkId {
    LinkId(4)
}

pub fn relaxed_conflict_longest() -> LinkId {
    LinkId(1)
}

/// Relaxed-mode square ring where every removal is unsafe (each demand's
/// primary rides part of the other demand's ring arc) but the two demands'
/// protections meet only at nodes A and C with no mutual link data: a
/// separation point resolves the cycle with zero saving.
pub fn separation_ring() -> (Topology, CodingGroup, BTreeMap<DemandId, PathPair>) {
    let t = topo(
        &["A", "B", "C", "D", "P", "Q"],
        vec![
            link(1, "A", "B", 1.0),
            link(2, "B", "C", 1.0),
            link(3, "C", "D", 1.0),
            link(4, "D", "A", 1.0),
            link(5, "A", "P", 1.0),
            link(6, "P", "D", 1.0),
            link(7, "A", "Q", 1.0),
            link(8, "Q", "B", 1.0),
        ],
    );
    let spec: [(u32, &str, &str, &[u32], &[u32]); 2] = [
        // primary crosses ring link 3 (C-D); protection is the A-B-C arc
        (1, "A", "C", &[5, 6, 3], &[1, 2]),
        // primary crosses ring link 2 (B-C); protection is the A-D-C arc
        (2, "A", "C", &[7, 8, 2], &[4, 3]),
    ];
    let mut pairs = BTreeMap::new();
    for (id, a, b, primary, prot) in spec {
        let d = Demand::new(DemandId(id), n(a), n(b), 1, &t).unwrap();
        let pair = PathPair::new(&d, path(&t, primary), path(&t, prot), &t).unwrap();
        pairs.insert(DemandId(id), pair);
    }
    let group = CodingGroup::from_members(
        GroupId(1),
        pairs.keys().copied().collect(),
        Mode::Relaxed,
        &pairs,
    );
    (t, group, pairs)
}

/// A seven-demand protection tree exercising every entity kind of the trail
/// construction: real ends on the truck trail, direct-attached ends, a
/// branch point with an omitted inner demand (`with_inner`), and a
/// second-level branch.
///
/// The truck trail is A-B-C-D-E-F (link 1, A-B, is the longest); the branch
/// at D runs D-G-H-I with a sub-branch H-K.
pub fn branch_tree(
    with_inner: bool,
) -> (
    Topology,
    CodingGroup,
    BTreeMap<DemandId, PathPair>,
    BTreeMap<DemandId, Demand>,
) {
    let mut links = vec![
        // trail spine
        link(1, "A", "B", 10.0),
        link(2, "B", "C", 2.0),
        link(3, "C", "D", 2.0),
        link(4, "D", "E", 2.0),
        link(5, "E", "F", 2.0),
        // direct attachments
        link(6, "B", "p", 1.0),
        link(7, "B", "q", 1.0),
        link(8, "C", "r", 1.0),
        link(9, "C", "s", 1.0),
        // branch subtree
        link(10, "D", "G", 2.0),
        link(11, "G", "H", 2.0),
        link(12, "H", "I", 2.0),
        link(13, "H", "K", 1.0),
        // primaries (chords, pairwise disjoint, off the tree)
        link(14, "A", "F", 50.0),
        link(15, "p", "m", 1.0),
        link(16, "m", "B", 1.0),
        link(17, "I", "r", 50.0),
        link(18, "E", "q", 50.0),
        link(19, "E", "K", 50.0),
        link(20, "s", "K", 50.0),
    ];
    if with_inner {
        links.push(link(21, "G", "I", 50.0));
    }
    let t = Topology::new(
        [
            "A", "B", "C", "D", "E", "F", "p", "q", "r", "s", "G", "H", "I", "K", "m",
        ]
        .map(NodeId::from),
        links,
    )
    .unwrap();
    let mut spec: Vec<(u32, &str, &str, Vec<u32>, Vec<u32>)> = vec![
        (1, "A", "F", vec![14], vec![1, 2, 3, 4, 5]),
        (2, "p", "B", vec![15, 16], vec![6]),
        (3, "I", "r", vec![17], vec![12, 11, 10, 3, 8]),
        (4, "E", "q", vec![18], vec![4, 3, 2, 7]),
        (5, "E", "K", vec![19], vec![4, 10, 11, 13]),
        (6, "s", "K", vec![20], vec![9, 3, 10, 11, 13]),
    ];
    if with_inner {
        spec.push((7, "G", "I", vec![21], vec![11, 12]));
    }
    let mut pairs = BTreeMap::new();
    let mut demands = BTreeMap::new();
    for (id, a, b, primary, prot) in spec {
        let d = Demand::new(DemandId(id), n(a), n(b), 1, &t).unwrap();
        let pair = PathPair::new(&d, path(&t, &primary), path(&t, &prot), &t).unwrap();
        pairs.insert(DemandId(id), pair);
        demands.insert(DemandId(id), d);
    }
    let group = CodingGroup::from_members(
        GroupId(1),
        pairs.keys().copied().collect(),
        Mode::Strict,
        &pairs,
    );
    (t, group, pairs, demands)
}

/// A seed for which the free choices in the trail construction produce the
/// canonical layout of [`branch_tree`]: truck trail A..F and branch trail
/// D-G-H-I. Found by search, frozen for test stability.
pub fn branch_tree_seed() -> u64 {
    6
}

/// Random 2-edge-connected instance: a ring over all nodes plus chords, and
/// distinct-endpoint unit demands. Fully determined by `seed`.
pub fn random_instance(
    seed: u64,
    nodes: RangeInclusive<usize>,
    demands: RangeInclusive<usize>,
) -> (Topology, Vec<Demand>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_count = rng.gen_range(nodes);
    let names: Vec<NodeId> = (0..node_count)
        .map(|i| NodeId::new(format!("n{i:02}")))
        .collect();
    let mut links = Vec::new();
    let mut used_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut next_id = 1u32;
    for i in 0..node_count {
        let j = (i + 1) % node_count;
        links.push(Link {
            id: LinkId(next_id),
            endpoints: (names[i].clone(), names[j].clone()),
            length: f64::from(rng.gen_range(4u32..=40)) * 0.25,
        });
        used_pairs.insert((i.min(j), i.max(j)));
        next_id += 1;
    }
    let chords = node_count / 2;
    let mut attempts = 0;
    let mut added = 0;
    while added < chords && attempts < 50 {
        attempts += 1;
        let a = rng.gen_range(0..node_count);
        let b = rng.gen_range(0..node_count);
        if a == b || !used_pairs.insert((a.min(b), a.max(b))) {
            continue;
        }
        links.push(Link {
            id: LinkId(next_id),
            endpoints: (names[a].clone(), names[b].clone()),
            length: f64::from(rng.gen_range(4u32..=40)) * 0.25,
        });
        next_id += 1;
        added += 1;
    }
    let t = Topology::new(names.iter().cloned(), links).unwrap();
    let demand_count = rng.gen_range(demands);
    let mut out = Vec::new();
    let mut used_ends: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut id = 1u32;
    while out.len() < demand_count {
        let a = rng.gen_range(0..node_count);
        let b = rng.gen_range(0..node_count);
        if a == b || !used_ends.insert((a.min(b), a.max(b))) {
            continue;
        }
        out.push(Demand::new(DemandId(id), names[a].clone(), names[b].clone(), 1, &t).unwrap());
        id += 1;
    }
    (t, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instance_is_reproducible() {
        let (t1, d1) = random_instance(42, 6..=10, 2..=5);
        let (t2, d2) = random_instance(42, 6..=10, 2..=5);
        assert_eq!(t1, t2);
        assert_eq!(d1, d2);
        let (t3, _) = random_instance(43, 6..=10, 2..=5);
        assert_ne!(t1, t3);
    }

    #[test]
    fn fixtures_construct() {
        let _ = square();
        let _ = path_graph();
        let _ = trap();
        let _ = theta_graph();
        let _ = ring_group();
        let _ = ring_group_equal_lengths();
        let _ = relaxed_conflict_ring();
        let _ = separation_ring();
        let _ = branch_tree(true);
        let _ = branch_tree(false);
        let _ = two_demand_chain();
        let _ = sharing_ladder(true);
        let _ = sharing_ladder(false);
    }

    #[test]
    fn conversion_scenario_routes_are_the_designed_ones() {
        let (t, sol) = conversion_scenario();
        assert_eq!(sol.pairs[&DemandId(1)].primary, path(&t, &[1, 2, 3]));
        assert_eq!(sol.pairs[&DemandId(1)].protection, path(&t, &[9, 5, 10]));
        assert_eq!(sol.pairs[&DemandId(2)].primary, path(&t, &[4]));
        assert_eq!(sol.pairs[&DemandId(2)].protection, path(&t, &[11, 9, 12]));
        assert_eq!(sol.pairs[&DemandId(3)].primary, path(&t, &[6]));
        assert_eq!(
            sol.pairs[&DemandId(3)].protection.link_set(),
            [5, 13, 15, 16].map(LinkId).into_iter().collect()
        );
        assert_eq!(sol.pairs[&DemandId(4)].primary.link_set(), [7, 2, 8].map(LinkId).into_iter().collect());
        assert_eq!(
            sol.pairs[&DemandId(4)].protection.link_set(),
            [5, 14, 15, 17].map(LinkId).into_iter().collect()
        );
    }
}
