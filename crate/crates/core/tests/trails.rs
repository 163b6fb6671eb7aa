//! Trail hierarchy construction over the branch-tree scenario and random
//! pipelines.

use std::collections::BTreeSet;

use cppweave_core::cep::{self, EffNode};
use cppweave_core::fixtures;
use cppweave_core::group::form_groups;
use cppweave_core::model::{DemandId, NodeId};
use cppweave_core::routing::Metric;
use cppweave_core::spp::solve_spp;
use cppweave_core::trail::{
    build_trails, complement, merge_adjacent, EndRef, EntityKind, Side, TrailHierarchy,
};

fn nd(s: &str) -> EffNode {
    EffNode::Node(NodeId::from(s))
}

fn canonical_hierarchy(with_inner: bool) -> (cppweave_core::model::Topology, TrailHierarchy) {
    let (t, group, pairs, demands) = fixtures::branch_tree(with_inner);
    let tree = cep::eliminate(&group, &pairs, &t);
    assert!(tree.removed.is_empty(), "fixture tree is already acyclic");
    let h = build_trails(&group, &tree, &demands, &t, fixtures::branch_tree_seed()).unwrap();
    (t, h)
}

/// Seed search helper; run with
/// `cargo test -p cppweave-core --test trails -- --ignored --nocapture`.
#[test]
#[ignore]
fn find_branch_tree_seed() {
    for with_inner in [false, true] {
        let (t, group, pairs, demands) = fixtures::branch_tree(with_inner);
        let tree = cep::eliminate(&group, &pairs, &t);
        for seed in 0..500u64 {
            let h = build_trails(&group, &tree, &demands, &t, seed).unwrap();
            let truck = h.trucks().next().unwrap();
            let want: Vec<EffNode> = ["A", "B", "C", "D", "E", "F"].iter().map(|s| nd(s)).collect();
            let want_rev: Vec<EffNode> = want.iter().rev().cloned().collect();
            if truck.nodes != want && truck.nodes != want_rev {
                continue;
            }
            let branch_ok = h.trails.iter().any(|tr| {
                tr.level == 1
                    && (tr.nodes
                        == ["D", "G", "H", "I"].iter().map(|s| nd(s)).collect::<Vec<_>>())
            });
            if branch_ok {
                println!("with_inner={with_inner}: seed {seed} works");
                break;
            }
        }
    }
}

#[test]
fn truck_trail_spans_the_spine() {
    for with_inner in [false, true] {
        let (_t, h) = canonical_hierarchy(with_inner);
        let truck = h.trucks().next().unwrap();
        assert_eq!(truck.level, 0);
        let spine: Vec<EffNode> = ["A", "B", "C", "D", "E", "F"].iter().map(|s| nd(s)).collect();
        let spine_rev: Vec<EffNode> = spine.iter().rev().cloned().collect();
        assert!(
            truck.nodes == spine || truck.nodes == spine_rev,
            "with_inner={with_inner}: unexpected truck {:?}",
            truck.nodes
        );
    }
}

#[test]
fn every_end_is_placed_exactly_once() {
    for with_inner in [false, true] {
        let (_t, h) = canonical_hierarchy(with_inner);
        let expected = if with_inner { 7 } else { 6 };
        assert_eq!(h.placement.len(), 2 * expected);
        // each (demand, side) key is unique by map construction; check that
        // shown entities carry each placed end exactly once across trails
        let mut shown: Vec<(DemandId, Side)> = Vec::new();
        for trail in &h.trails {
            for e in &trail.entities {
                if e.kind == EntityKind::BranchPoint {
                    continue;
                }
                for r in &e.represents {
                    assert!(!r.complemented);
                    shown.push((r.demand, r.side));
                }
            }
        }
        shown.sort();
        let unique: BTreeSet<_> = shown.iter().copied().collect();
        assert_eq!(shown.len(), unique.len(), "an end is shown twice");
        assert_eq!(unique.len(), h.placement.len());
    }
}

#[test]
fn trail_links_partition_the_tree() {
    for with_inner in [false, true] {
        let (t, group, pairs, demands) = fixtures::branch_tree(with_inner);
        let tree = cep::eliminate(&group, &pairs, &t);
        let h = build_trails(&group, &tree, &demands, &t, fixtures::branch_tree_seed()).unwrap();
        let mut seen = BTreeSet::new();
        for trail in &h.trails {
            for &l in &trail.links {
                assert!(seen.insert(l), "link {l} on two trails");
            }
            for e in &trail.entities {
                for &l in &e.attachment {
                    assert!(seen.insert(l), "attachment link {l} claimed twice");
                }
            }
        }
        assert_eq!(seen, tree.tree_links);
    }
}

#[test]
fn branch_point_at_d_shows_the_expected_expression() {
    for with_inner in [false, true] {
        let (_t, h) = canonical_hierarchy(with_inner);
        let truck = h.trucks().next().unwrap();
        let branch = truck
            .entities
            .iter()
            .find(|e| e.kind == EntityKind::BranchPoint && e.node == nd("D"))
            .expect("branch point at D");
        let shown: BTreeSet<(DemandId, Side, bool)> = branch
            .represents
            .iter()
            .map(|r| (r.demand, r.side, r.complemented))
            .collect();
        // demand 7 lives entirely inside the branch and is omitted when
        // present
        let want: BTreeSet<(DemandId, Side, bool)> = [
            (DemandId(3), Side::S, false),
            (DemandId(5), Side::T, false),
            (DemandId(6), Side::T, false),
        ]
        .into_iter()
        .collect();
        assert_eq!(shown, want, "with_inner={with_inner}");
        if with_inner {
            assert!(branch.spans.contains(&(DemandId(7), Side::S)));
            assert!(branch.spans.contains(&(DemandId(7), Side::T)));
        }
    }
}

#[test]
fn branch_trail_origin_carries_the_complement() {
    for with_inner in [false, true] {
        let (_t, h) = canonical_hierarchy(with_inner);
        let branch_trail = h
            .trails
            .iter()
            .find(|tr| tr.level == 1 && tr.nodes.first() == Some(&nd("D")))
            .expect("branch trail from D");
        let origin = branch_trail.origin_complement.as_ref().unwrap();
        let want: Vec<EndRef> = complement(&[
            EndRef {
                demand: DemandId(3),
                side: Side::S,
                complemented: false,
            },
            EndRef {
                demand: DemandId(5),
                side: Side::T,
                complemented: false,
            },
            EndRef {
                demand: DemandId(6),
                side: Side::T,
                complemented: false,
            },
        ]);
        assert_eq!(origin, &want);
        // the parent entity's shown refs complement back
        let (parent_id, entity_idx) = branch_trail.parent.unwrap();
        let parent_entity = &h.trail(parent_id).entities[entity_idx];
        assert_eq!(complement(origin), {
            let mut v = parent_entity.represents.clone();
            v.sort();
            v
        });
    }
}

#[test]
fn inner_demand_appears_only_on_the_branch_trail() {
    let (_t, h) = canonical_hierarchy(true);
    let branch_id = *h.placement.get(&(DemandId(7), Side::S)).unwrap();
    let branch = h.trail(branch_id);
    assert_eq!(branch.level, 1);
    assert_eq!(branch.nodes.first(), Some(&nd("D")));
    // both ends of demand 7 live in the same level-1 trail; the truck trail
    // never mentions it
    assert_eq!(h.placement.get(&(DemandId(7), Side::T)), Some(&branch_id));
    let truck = h.trucks().next().unwrap();
    for e in &truck.entities {
        for r in &e.represents {
            assert_ne!(r.demand, DemandId(7), "demand 7 leaked onto the truck");
        }
    }
}

#[test]
fn adjacent_direct_attached_pairs_fuse() {
    let (_t, h) = canonical_hierarchy(false);
    let truck = h.trucks().next().unwrap();
    let merged = merge_adjacent(truck);
    assert!(merged.entities.len() < truck.entities.len());
    // ends at B: real T2 plus direct-attached S2 and T4; the two
    // hypotheticals fuse into one merged entity
    let fused = merged
        .entities
        .iter()
        .find(|e| e.node == nd("B") && e.represents.len() == 2)
        .expect("fused pair at B");
    let pair: BTreeSet<(DemandId, Side)> =
        fused.represents.iter().map(|r| (r.demand, r.side)).collect();
    assert_eq!(
        pair,
        [(DemandId(2), Side::S), (DemandId(4), Side::T)]
            .into_iter()
            .collect()
    );
    assert_eq!(merge_adjacent(&merged), merged);
}

#[test]
fn same_seed_reproduces_different_seeds_vary() {
    let (t, group, pairs, demands) = fixtures::branch_tree(true);
    let tree = cep::eliminate(&group, &pairs, &t);
    let a = build_trails(&group, &tree, &demands, &t, 12345).unwrap();
    let b = build_trails(&group, &tree, &demands, &t, 12345).unwrap();
    assert_eq!(a, b);
    let mut saw_difference = false;
    for seed in 0..40u64 {
        let c = build_trails(&group, &tree, &demands, &t, seed).unwrap();
        if c != a {
            saw_difference = true;
            break;
        }
    }
    assert!(saw_difference, "seed never influenced the construction");
}

#[test]
fn random_pipeline_places_every_end_once() {
    for seed in 500..506u64 {
        let (t, demands) = fixtures::random_instance(seed, 6..=9, 2..=5);
        let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
        let design = form_groups(&sol, &t, cppweave_core::group::Mode::Strict);
        for gd in &design.groups {
            let h = build_trails(&gd.group, &gd.tree, &sol.demands, &t, seed).unwrap();
            assert_eq!(h.placement.len(), 2 * gd.tree.routes.len(), "seed {seed}");
            let mut seen = BTreeSet::new();
            for trail in &h.trails {
                for &l in &trail.links {
                    assert!(seen.insert(l));
                }
                for e in &trail.entities {
                    for &l in &e.attachment {
                        assert!(seen.insert(l));
                    }
                }
            }
            assert_eq!(seen, gd.tree.tree_links);
        }
    }
}
