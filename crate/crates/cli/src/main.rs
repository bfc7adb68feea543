//! `bwalk`: fidelity curves, sweeps, single transfers and oracle checks for
//! quantum-walk state transfer on complete bipartite graphs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bwalk", version, about = "Quantum-walk state transfer on complete bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form fidelity on a 0.05 grid plus integer steps, with
    /// simulated values when n1·n2 ≤ 10⁴.
    FidelityCurve(CurveArgs),
    /// Maximum fidelity over n2 (max), active-switch grid (grid) or line (line).
    Sweep(SweepArgs),
    /// Two-marked-vertex transfer at the recommended step count.
    Transfer(TransferArgs),
    /// Loop-to-loop transfer on the lackadaisical walk with a switched mark.
    ActiveSwitch(SwitchArgs),
    /// Oracle checks: reduced models and closed forms against the walk.
    Verify(VerifyArgs),
}

#[derive(Args, Clone, Copy)]
pub struct Sizes {
    #[arg(long, default_value_t = 100)]
    pub n1: usize,
    /// Defaults to n1.
    #[arg(long)]
    pub n2: Option<usize>,
}

impl Sizes {
    pub fn pair(&self) -> (usize, usize) {
        (self.n1, self.n2.unwrap_or(self.n1))
    }
}

#[derive(Args, Clone)]
pub struct Destination {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScenarioArg {
    Diff,
    Same,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum FlavorArg {
    Gg,
    Gi,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum PlacementArg {
    Diff,
    Same,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum SweepMode {
    Max,
    Grid,
    Line,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckName {
    All,
    Invariance,
    Eigen,
    ClosedForm,
    Stationary,
}

#[derive(Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[arg(long, value_enum, default_value = "diff")]
    pub scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "gg")]
    pub flavor: FlavorArg,
    /// Largest step on the curve; defaults to 5√(n1 + n2).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Use the product form that trails the walk by two steps (diff, gg only).
    #[arg(long)]
    pub printed_form: bool,
    #[command(flatten)]
    pub dest: Destination,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "max")]
    pub mode: SweepMode,
    #[arg(long, default_value_t = 100)]
    pub n1: usize,
    /// Inclusive n2 range A:B (max and line modes).
    #[arg(long, value_parser = parse_range)]
    pub n2_range: Option<(usize, usize)>,
    /// Inclusive range A:B used for both n1 and n2 (grid mode).
    #[arg(long, value_parser = parse_range)]
    pub grid: Option<(usize, usize)>,
    /// Grid mode runs both placements unless one is given.
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    #[command(flatten)]
    pub dest: Destination,
}

#[derive(Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[arg(long, value_enum, default_value = "diff")]
    pub scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "gg")]
    pub flavor: FlavorArg,
    /// Run exactly this many steps instead of the recommended count.
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub dest: Destination,
}

#[derive(Args)]
pub struct SwitchArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[arg(long, value_enum, default_value = "diff")]
    pub placement: PlacementArg,
    /// Sender vertex as `v1:I` or `v2:I`; overrides the placement.
    #[arg(long, value_parser = parse_vertex)]
    pub sender: Option<bwalk::graph_space::Vertex>,
    /// Receiver vertex as `v1:I` or `v2:I`; overrides the placement.
    #[arg(long, value_parser = parse_vertex)]
    pub receiver: Option<bwalk::graph_space::Vertex>,
    #[command(flatten)]
    pub dest: Destination,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub check: CheckName,
    /// Check a single size pair instead of all n1, n2 in 2..=12.
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Seed for the random loop weights.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Flip the sign of one reduced-matrix entry; verification must fail.
    #[arg(long)]
    pub inject_fault: bool,
    #[command(flatten)]
    pub dest: Destination,
}

fn parse_range(text: &str) -> Result<(usize, usize), String> {
    let (a, b) = text.split_once(':').ok_or_else(|| format!("expected A:B, got {text:?}"))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_vertex(text: &str) -> Result<bwalk::graph_space::Vertex, String> {
    use bwalk::graph_space::Vertex;
    let (part, index) = text.split_once(':').ok_or_else(|| format!("expected v1:I or v2:I, got {text:?}"))?;
    let index = index.parse::<usize>().map_err(|e| format!("{index:?}: {e}"))?;
    match part.to_ascii_lowercase().as_str() {
        "v1" => Ok(Vertex::v1(index)),
        "v2" => Ok(Vertex::v2(index)),
        _ => Err(format!("unknown partition {part:?}")),
    }
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification,
}

impl From<bwalk::Error> for Failure {
    fn from(e: bwalk::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FidelityCurve(args) => commands::fidelity_curve(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Transfer(args) => commands::transfer(&args),
        Command::ActiveSwitch(args) => commands::active_switch(&args),
        Command::Verify(args) => verify::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
