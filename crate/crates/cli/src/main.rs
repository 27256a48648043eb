//! `sotifkit`: generate the synthetic overtake dataset, run the baseline
//! detector, and score predictions.
//!
//! Exit codes: 0 success, 2 usage / config / invalid input, 3 runtime
//! failure, 4 nothing to evaluate.

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::{Classify, Failure};

#[derive(Debug, Parser)]
#[command(name = "sotifkit", version, about = "Synthetic highway-overtake LiDAR dataset and KITTI-style detection evaluation")]
struct Cli {
    /// Worker threads for per-frame work [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the scenario and write a KITTI dataset tree
    Generate(GenerateArgs),
    /// Check a dataset tree against the KITTI layout
    Validate(ValidateArgs),
    /// Run the baseline detector on every frame of a dataset
    Detect(DetectArgs),
    /// Score a prediction directory against a dataset's labels
    Evaluate(EvaluateArgs),
    /// Print AP and recall tables for one or more report files
    Report(ReportArgs),
    /// Export the precision/recall curves of a report as CSV and SVG
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Scenario / LiDAR / weather config (TOML) [default: bundled]
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the config's scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; must be absent or empty
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Dataset root
    dataset: PathBuf,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Dataset root
    dataset: PathBuf,
    /// Detector config (TOML) [default: built-in]
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for the NNNNNN.txt prediction files
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InterpArg {
    Ap11,
    Ap40,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IouModeArg {
    #[value(name = "3d")]
    ThreeD,
    Bev,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Dataset root holding the ground truth
    dataset: PathBuf,
    /// Directory of NNNNNN.txt prediction files (16 fields, with score)
    predictions: PathBuf,
    /// Evaluation config (TOML) [default: AP at 0.70, recall at 0.30 and 0.50]
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// IoU threshold for AP; repeat for several [default: 0.70]
    #[arg(long, value_name = "T")]
    iou: Vec<f64>,
    /// Interpolation scheme(s) to report
    #[arg(long, value_enum)]
    interp: Option<InterpArg>,
    /// Box overlap measure
    #[arg(long = "iou-mode", value_enum)]
    iou_mode: Option<IouModeArg>,
    /// Row label in the tables [default: predictions directory name]
    #[arg(long)]
    method: Option<String>,
    /// Directory for report.json, text tables and PR curves
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// report.json files written by `evaluate`
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Also write the tables to this file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// report.json written by `evaluate`
    report: PathBuf,
    /// Output directory for CSV and SVG files
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::new(failure::Code::Usage, anyhow::anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .runtime()?;
    }
    match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Validate(args) => commands::validate(args),
        Command::Detect(args) => commands::detect(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Report(args) => commands::report(args),
        Command::Plot(args) => commands::plot(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}
