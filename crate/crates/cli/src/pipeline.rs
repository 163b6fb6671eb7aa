//! Staged pipeline driver: routing, conversion, trail construction,
//! verification, reporting, and artifact serialization.
//!
//! Every stage writes its artifact into the output directory as it
//! completes, so partial results survive a later failure.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use cppweave_core::format::{self, Format};
use cppweave_core::group::{form_groups, CppDesign, Mode};
use cppweave_core::model::{Demand, DemandId, Topology};
use cppweave_core::routing::Metric;
use cppweave_core::spp::{solve_spp, SppError};
use cppweave_core::trail::{build_trails, Side, TrailHierarchy, TrailId};
use cppweave_core::verify::{verify_all, VerificationOutcome};

use crate::report::{self, MetricsReport};

/// Pipeline stage to run up to (each stage implies its predecessors).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Stage {
    Solve,
    Convert,
    Verify,
    Report,
    ExportDot,
    All,
}

impl Stage {
    fn includes(self, other: Stage) -> bool {
        if self == Stage::All {
            return true;
        }
        // export-dot needs only the converted design, not verification
        if self == Stage::ExportDot {
            return matches!(other, Stage::Solve | Stage::Convert | Stage::ExportDot);
        }
        other <= self
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub topology: PathBuf,
    pub demands: PathBuf,
    pub mode: Mode,
    pub seed: u64,
    pub out: PathBuf,
    pub stage: Stage,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input error: {0}")]
    Input(String),
    #[error("routing infeasible: {0}")]
    Routing(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    /// Process exit code for this failure class. Verification failures are
    /// not errors (the run completes and reports them); the caller maps a
    /// failed report to exit code 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) => 4,
            PipelineError::Routing(_) => 3,
            PipelineError::Internal(_) => 1,
        }
    }
}

/// `CPPWEAVE_SEED`, when set, overrides the `--seed` flag.
pub fn effective_seed(flag: u64) -> Result<u64, PipelineError> {
    match std::env::var("CPPWEAVE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| PipelineError::Input(format!("CPPWEAVE_SEED is not an integer: {v:?}"))),
        Err(_) => Ok(flag),
    }
}

/// Flat serialization of a trail hierarchy (the in-memory placement map is
/// keyed by tuples, which JSON objects cannot express).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailArtifact {
    pub group: u32,
    pub hierarchy: TrailHierarchySer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailHierarchySer {
    pub trails: Vec<cppweave_core::trail::Trail>,
    pub placement: Vec<PlacementEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementEntry {
    pub demand: DemandId,
    pub side: Side,
    pub trail: TrailId,
}

fn trail_artifact(h: &TrailHierarchy) -> TrailArtifact {
    TrailArtifact {
        group: h.group_id.0,
        hierarchy: TrailHierarchySer {
            trails: h.trails.clone(),
            placement: h
                .placement
                .iter()
                .map(|(&(demand, side), &trail)| PlacementEntry {
                    demand,
                    side,
                    trail,
                })
                .collect(),
        },
    }
}

/// Everything the pipeline produced; `verified` is `None` when the
/// verification stage was not requested.
#[derive(Debug)]
pub struct PipelineOutput {
    pub report: Option<MetricsReport>,
    pub verified: Option<bool>,
}

fn read_input(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path)
        .map_err(|e| PipelineError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_artifact(out: &Path, name: &str, body: &str) -> Result<(), PipelineError> {
    fs::create_dir_all(out)
        .map_err(|e| PipelineError::Internal(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, body)
        .map_err(|e| PipelineError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), PipelineError> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| PipelineError::Internal(format!("serializing {name}: {e}")))?;
    write_artifact(out, name, &format!("{body}\n"))
}

pub fn load_inputs(cfg: &RunConfig) -> Result<(Topology, Vec<Demand>), PipelineError> {
    let topo_text = read_input(&cfg.topology)?;
    let topo = format::load_topology(&topo_text, Format::from_path(&cfg.topology))
        .map_err(|e| PipelineError::Input(format!("{}: {e}", cfg.topology.display())))?;
    let demand_text = read_input(&cfg.demands)?;
    let demands = format::load_demands(&demand_text, Format::from_path(&cfg.demands), &topo)
        .map_err(|e| PipelineError::Input(format!("{}: {e}", cfg.demands.display())))?;
    if demands.is_empty() {
        return Err(PipelineError::Input("no demands given".into()));
    }
    Ok((topo, demands))
}

/// Runs the pipeline up to the configured stage, writing each stage's
/// artifact into the output directory.
pub fn run(cfg: &RunConfig) -> Result<PipelineOutput, PipelineError> {
    let (topo, demands) = load_inputs(cfg)?;

    // routing + spare assignment
    let sol = solve_spp(&topo, &demands, Metric::Length).map_err(|e| match e {
        SppError::Routing(d, cause) => {
            PipelineError::Routing(format!("demand {d}: {cause}"))
        }
    })?;
    write_json(&cfg.out, "spp.json", &sol)?;
    if !cfg.stage.includes(Stage::Convert) {
        return Ok(PipelineOutput {
            report: None,
            verified: None,
        });
    }

    // coding groups + cycle elimination + trails
    let design: CppDesign = form_groups(&sol, &topo, cfg.mode);
    write_json(&cfg.out, "design.json", &design)?;
    let mut hierarchies = Vec::new();
    for gd in &design.groups {
        let h = build_trails(&gd.group, &gd.tree, &design.spp.demands, &topo, cfg.seed)
            .map_err(|e| PipelineError::Internal(e.to_string()))?;
        hierarchies.push(h);
    }
    let trail_art: Vec<TrailArtifact> = hierarchies.iter().map(trail_artifact).collect();
    write_json(&cfg.out, "trails.json", &trail_art)?;

    let mut outcome: Option<VerificationOutcome> = None;
    if cfg.stage.includes(Stage::Verify) {
        let o = verify_all(&design, &topo).map_err(|e| PipelineError::Internal(e.to_string()))?;
        write_json(&cfg.out, "verification.json", &o)?;
        write_artifact(&cfg.out, "verification.txt", &report::render_failures(&o))?;
        outcome = Some(o);
    }

    let mut metrics: Option<MetricsReport> = None;
    if cfg.stage.includes(Stage::Report) {
        let r = report::build_report(&design, &topo, cfg.seed, outcome.as_ref());
        write_json(&cfg.out, "report.json", &r)?;
        write_artifact(&cfg.out, "report.txt", &report::render_text(&r))?;
        metrics = Some(r);
    }

    if cfg.stage.includes(Stage::ExportDot) {
        write_artifact(&cfg.out, "topology.dot", &report::topology_dot(&topo, &sol))?;
        for h in &hierarchies {
            let name = format!("trails-g{}.dot", h.group_id.0);
            write_artifact(&cfg.out, &name, &report::trails_dot(h))?;
        }
    }

    Ok(PipelineOutput {
        report: metrics,
        verified: outcome.map(|o| o.pass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cppweave_core::fixtures;

    fn write_fixture(dir: &Path) -> (PathBuf, PathBuf) {
        let (t, demands) = fixtures::random_instance(3, 6..=8, 3..=4);
        let tp = dir.join("net.txt");
        let dp = dir.join("demands.txt");
        fs::write(&tp, format::topology_to_text(&t)).unwrap();
        fs::write(&dp, format::demands_to_text(&demands)).unwrap();
        (tp, dp)
    }

    fn cfg(dir: &Path, stage: Stage) -> RunConfig {
        let (topology, demands) = write_fixture(dir);
        RunConfig {
            topology,
            demands,
            mode: Mode::Strict,
            seed: 11,
            out: dir.join("out"),
            stage,
        }
    }

    #[test]
    fn full_run_writes_all_artifacts_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&cfg(dir.path(), Stage::All)).unwrap();
        assert_eq!(out.verified, Some(true));
        for name in [
            "spp.json",
            "design.json",
            "trails.json",
            "verification.json",
            "report.json",
            "report.txt",
            "topology.dot",
        ] {
            assert!(dir.path().join("out").join(name).exists(), "{name} missing");
        }
    }

    #[test]
    fn solve_stage_stops_after_routing() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&cfg(dir.path(), Stage::Solve)).unwrap();
        assert!(out.verified.is_none());
        assert!(dir.path().join("out/spp.json").exists());
        assert!(!dir.path().join("out/design.json").exists());
    }

    #[test]
    fn export_dot_skips_verification() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&cfg(dir.path(), Stage::ExportDot)).unwrap();
        assert!(out.verified.is_none());
        assert!(dir.path().join("out/topology.dot").exists());
        assert!(!dir.path().join("out/verification.json").exists());
    }

    #[test]
    fn missing_input_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(dir.path(), Stage::All);
        c.topology = dir.path().join("nope.txt");
        let err = run(&c).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn bridge_topology_is_a_routing_error() {
        let dir = tempfile::tempdir().unwrap();
        let tp = dir.path().join("net.txt");
        let dp = dir.path().join("demands.txt");
        fs::write(&tp, "node A\nnode B\nlink 1 A B 1\n").unwrap();
        fs::write(&dp, "demand 1 A B\n").unwrap();
        let c = RunConfig {
            topology: tp,
            demands: dp,
            mode: Mode::Strict,
            seed: 0,
            out: dir.path().join("out"),
            stage: Stage::All,
        };
        let err = run(&c).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(dir.path(), Stage::All);
        run(&c).unwrap();
        let first: Vec<(String, Vec<u8>)> = read_dir_sorted(&c.out);
        c.out = dir.path().join("out2");
        run(&c).unwrap();
        let second = read_dir_sorted(&c.out);
        let names = |v: &[(String, Vec<u8>)]| {
            v.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()
        };
        assert_eq!(names(&first), names(&second));
        for ((n, a), (_, b)) in first.iter().zip(&second) {
            assert_eq!(a, b, "artifact {n} differs between identical runs");
        }
    }

    fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        out.sort();
        out
    }
}
