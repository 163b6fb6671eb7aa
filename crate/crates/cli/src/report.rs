//! Metrics aggregation, the human-readable report, and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use cppweave_core::group::{CppDesign, Mode};
use cppweave_core::model::{DemandId, Topology};
use cppweave_core::spp::{scap, SppSolution};
use cppweave_core::trail::{EntityKind, TrailHierarchy};
use cppweave_core::verify::{Verdict, VerificationOutcome};

/// Per-group census line of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub id: u32,
    pub members: Vec<DemandId>,
    /// Demands demoted to dedicated 1+1 protection.
    pub apsed: Vec<DemandId>,
    pub removed_links: usize,
    pub separations: usize,
    pub tree_links: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub pass: bool,
    pub failures_checked: usize,
    pub lost_verdicts: usize,
}

/// Everything the pipeline reports, re-derivable from the stage artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: Mode,
    pub seed: u64,
    /// Hash of the serialized routing solution, for regression comparison.
    pub source_hash: String,
    pub working_weighted: f64,
    pub spare_weighted: f64,
    pub protection_weighted: f64,
    pub cep_saving: f64,
    pub extra_capacity: f64,
    /// Spare share of total capacity before conversion, percent.
    pub scap_before: f64,
    /// Protection share of total capacity after conversion, percent.
    pub scap_after: f64,
    pub groups: Vec<GroupSummary>,
    pub verification: Option<VerificationSummary>,
}

pub fn build_report(
    design: &CppDesign,
    topo: &Topology,
    seed: u64,
    outcome: Option<&VerificationOutcome>,
) -> MetricsReport {
    let s = scap(&design.spp, topo);
    let protection = design.protection_weighted(topo);
    let scap_after = if protection + s.working_weighted > 0.0 {
        100.0 * protection / (protection + s.working_weighted)
    } else {
        0.0
    };
    let groups = design
        .groups
        .iter()
        .map(|gd| GroupSummary {
            id: gd.group.id.0,
            members: gd.group.members.iter().copied().collect(),
            apsed: gd.tree.apsed.iter().copied().collect(),
            removed_links: gd.tree.removed.len(),
            separations: gd.tree.separations.len(),
            tree_links: gd.tree.tree_links.len(),
        })
        .collect();
    let verification = outcome.map(|o| VerificationSummary {
        pass: o.pass,
        failures_checked: o.reports.len(),
        lost_verdicts: o
            .reports
            .iter()
            .flat_map(|r| r.verdicts.values())
            .filter(|v| matches!(v, Verdict::Lost { .. }))
            .count(),
    });
    MetricsReport {
        mode: design.mode,
        seed,
        source_hash: design.source_hash.clone(),
        working_weighted: s.working_weighted,
        spare_weighted: s.spare_weighted,
        protection_weighted: protection,
        cep_saving: design.cep_saving(),
        extra_capacity: design.extra_capacity(topo),
        scap_before: s.percent,
        scap_after,
        groups,
        verification,
    }
}

/// Plain-text rendering of the report.
pub fn render_text(r: &MetricsReport) -> String {
    let mut out = String::new();
    let mode = match r.mode {
        Mode::Strict => "strict",
        Mode::Relaxed => "relaxed",
    };
    let _ = writeln!(out, "mode                 {mode}");
    let _ = writeln!(out, "seed                 {}", r.seed);
    let _ = writeln!(out, "source hash          {}", r.source_hash);
    let _ = writeln!(out, "working capacity     {:.3}", r.working_weighted);
    let _ = writeln!(out, "spare capacity       {:.3}", r.spare_weighted);
    let _ = writeln!(out, "protection capacity  {:.3}", r.protection_weighted);
    let _ = writeln!(out, "cycle saving         {:.3}", r.cep_saving);
    let _ = writeln!(out, "extra capacity       {:.3}", r.extra_capacity);
    let _ = writeln!(out, "spare share before   {:.2}%", r.scap_before);
    let _ = writeln!(out, "spare share after    {:.2}%", r.scap_after);
    let _ = writeln!(out, "groups               {}", r.groups.len());
    for g in &r.groups {
        let members: Vec<String> = g.members.iter().map(|d| d.to_string()).collect();
        let _ = write!(out, "  group {:<3} members [{}]", g.id, members.join(" "));
        if !g.apsed.is_empty() {
            let apsed: Vec<String> = g.apsed.iter().map(|d| d.to_string()).collect();
            let _ = write!(out, " dedicated [{}]", apsed.join(" "));
        }
        let _ = writeln!(
            out,
            " tree-links {} removed {} separations {}",
            g.tree_links, g.removed_links, g.separations
        );
    }
    match &r.verification {
        Some(v) => {
            let verdict = if v.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "verification         {verdict} ({} failures simulated, {} lost)",
                v.failures_checked, v.lost_verdicts
            );
        }
        None => {
            let _ = writeln!(out, "verification         not run");
        }
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Topology DOT graph: primary paths solid and bold, protection paths
/// dashed, unused links gray.
pub fn topology_dot(topo: &Topology, sol: &SppSolution) -> String {
    let mut out = String::from("graph design {\n  layout=neato;\n  node [shape=circle];\n");
    for node in topo.nodes() {
        let _ = writeln!(out, "  {};", quote(node.as_str()));
    }
    for link in topo.links() {
        let on_primary = sol.pairs.values().any(|p| p.primary.contains(link.id));
        let on_protection = sol.pairs.values().any(|p| p.protection.contains(link.id));
        let style = match (on_primary, on_protection) {
            (true, true) => "style=\"bold,dashed\"",
            (true, false) => "style=bold",
            (false, true) => "style=dashed",
            (false, false) => "style=solid, color=gray",
        };
        let _ = writeln!(
            out,
            "  {} -- {} [label=\"{} ({})\", {}];",
            quote(link.endpoints.0.as_str()),
            quote(link.endpoints.1.as_str()),
            link.id,
            link.length,
            style
        );
    }
    out.push_str("}\n");
    out
}

/// Trail-hierarchy DOT graph: one cluster per trail, trail nodes chained in
/// order, entity labels under their node, branch trails tied to their parent
/// entity with a dashed edge.
pub fn trails_dot(h: &TrailHierarchy) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph trails_g{} {{", h.group_id.0);
    out.push_str("  rankdir=LR;\n  node [shape=box];\n");
    for trail in &h.trails {
        let _ = writeln!(out, "  subgraph cluster_t{} {{", trail.id.0);
        let _ = writeln!(out, "    label=\"trail {} level {}\";", trail.id, trail.level);
        for (pos, node) in trail.nodes.iter().enumerate() {
            let exprs: Vec<String> = trail
                .entities
                .iter()
                .filter(|e| e.position == pos)
                .map(|e| {
                    let refs: Vec<String> =
                        e.represents.iter().map(|r| r.to_string()).collect();
                    let tag = match e.kind {
                        EntityKind::RealOnTrail => "",
                        EntityKind::DirectAttached => "+",
                        EntityKind::BranchPoint => "*",
                    };
                    format!("{tag}{}", refs.join("(+)"))
                })
                .collect();
            let label = if exprs.is_empty() {
                node.to_string()
            } else {
                format!("{node}\\n{}", exprs.join("\\n"))
            };
            let _ = writeln!(out, "    t{}_{} [label={}];", trail.id.0, pos, quote(&label));
        }
        for pos in 1..trail.nodes.len() {
            let _ = writeln!(
                out,
                "    t{}_{} -> t{}_{} [label=\"{}\"];",
                trail.id.0,
                pos - 1,
                trail.id.0,
                pos,
                trail.links[pos - 1]
            );
        }
        out.push_str("  }\n");
    }
    for trail in &h.trails {
        if let Some((parent, entity_idx)) = trail.parent {
            let pos = h.trail(parent).entities[entity_idx].position;
            let _ = writeln!(
                out,
                "  t{}_{} -> t{}_0 [style=dashed];",
                parent.0, pos, trail.id.0
            );
        }
    }
    out.push_str("}\n");
    out
}

/// Minimal structural check that a DOT document is well formed: balanced
/// braces, quotes closed, and a graph header.
pub fn dot_is_well_formed(doc: &str) -> bool {
    let trimmed = doc.trim_start();
    if !(trimmed.starts_with("graph") || trimmed.starts_with("digraph")) {
        return false;
    }
    let mut depth = 0i32;
    let mut in_quote = false;
    let mut escaped = false;
    for c in doc.chars() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_quote => escaped = true,
            '"' => in_quote = !in_quote,
            '{' if !in_quote => depth += 1,
            '}' if !in_quote => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0 && !in_quote
}

/// Per-failure detail rendering, for inspection of a verification artifact.
pub fn render_failures(outcome: &VerificationOutcome) -> String {
    let mut out = String::new();
    for report in &outcome.reports {
        let _ = writeln!(out, "failure of link {}:", report.failed);
        if !report.muted.is_empty() {
            let muted: Vec<String> = report.muted.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "  muted: {}", muted.join(" "));
        }
        for (d, verdict) in &report.verdicts {
            match verdict {
                Verdict::Unaffected => {}
                Verdict::RecoveredDedicated => {
                    let _ = writeln!(out, "  demand {d}: recovered (dedicated pair)");
                }
                Verdict::Recovered { witnesses } => {
                    for w in witnesses {
                        let _ = writeln!(
                            out,
                            "  demand {d}: {} decoded at {} from {} inputs",
                            w.recovered,
                            w.node,
                            w.used.len()
                        );
                    }
                }
                Verdict::Lost { reason } => {
                    let _ = writeln!(out, "  demand {d}: LOST ({reason})");
                }
            }
        }
    }
    out
}
