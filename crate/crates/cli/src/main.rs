use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cppweave::pipeline::{self, RunConfig, Stage};
use cppweave_core::group::Mode;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum StageArg {
    /// Route demands and assign shared spare capacity.
    Solve,
    /// Also form coding groups, eliminate cycles, and build trails.
    Convert,
    /// Also simulate every single-link failure and check recovery.
    Verify,
    /// Also write the metrics report.
    Report,
    /// Solve, convert, and export DOT drawings (no verification).
    ExportDot,
    /// Run every stage.
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ModeArg {
    /// Primaries disjoint from groupmates' primaries and protections.
    Strict,
    /// Primary-primary disjointness only; affected demands are muted.
    Relaxed,
}

/// Converts a shared-path-protection design into coded path protection and
/// verifies single-link-failure recovery.
#[derive(Parser, Debug)]
#[command(name = "cppweave", version)]
struct Cli {
    /// Pipeline stage to run up to.
    #[arg(value_enum)]
    stage: StageArg,
    /// Topology file (text or .json).
    #[arg(long)]
    topology: PathBuf,
    /// Demand file (text or .json).
    #[arg(long)]
    demands: PathBuf,
    /// Disjointness rule set for coding groups.
    #[arg(long, value_enum, default_value = "strict")]
    mode: ModeArg,
    /// Seed for the randomized trail-extension choices
    /// (overridden by CPPWEAVE_SEED).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for stage artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match pipeline::effective_seed(cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cppweave: {e}");
            return ExitCode::from(4);
        }
    };
    let cfg = RunConfig {
        topology: cli.topology,
        demands: cli.demands,
        mode: match cli.mode {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Relaxed => Mode::Relaxed,
        },
        seed,
        out: cli.out,
        stage: match cli.stage {
            StageArg::Solve => Stage::Solve,
            StageArg::Convert => Stage::Convert,
            StageArg::Verify => Stage::Verify,
            StageArg::Report => Stage::Report,
            StageArg::ExportDot => Stage::ExportDot,
            StageArg::All => Stage::All,
        },
    };
    match pipeline::run(&cfg) {
        Ok(out) => {
            if let Some(r) = &out.report {
                print!("{}", cppweave::report::render_text(r));
            }
            match out.verified {
                Some(true) => {
                    println!("verification: PASS");
                    ExitCode::SUCCESS
                }
                Some(false) => {
                    println!("verification: FAIL");
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("cppweave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
