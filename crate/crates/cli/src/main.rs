use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "ksubmax", version, about = "Randomized k-submodular maximization: generation, exact certification and lemma checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate seeded instances into a directory and validate each one.
    Generate(GenerateArgs),
    /// Check instance files for k-submodularity.
    Validate(ValidateArgs),
    /// Exact expected value against the brute-force optimum.
    Certify(CertifyArgs),
    /// One randomized run on an instance file.
    Run(RunArgs),
    /// Residual suites for the per-step inequalities.
    Lemmas(LemmasArgs),
    /// Residuals of the eps feasibility conditions.
    Epsilon(EpsilonArgs),
    /// Approximation ratios as functions of k.
    RatioTable(RatioTableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleName {
    Monotone,
    K3,
    General,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EpsMode {
    Default,
    Bisect,
    Value(f64),
}

fn parse_eps(s: &str) -> Result<EpsMode, String> {
    match s {
        "default" => Ok(EpsMode::Default),
        "bisect" => Ok(EpsMode::Bisect),
        v => v
            .parse::<f64>()
            .map(EpsMode::Value)
            .map_err(|_| format!("expected default, bisect or a number, got {v:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderMode {
    Given,
    Shuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Nonmonotone,
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BodyArg {
    Blocks,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Characterization,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Master seed; instance i uses a seed derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "nonmonotone")]
    kind: KindArg,
}

#[derive(Debug, Args)]
struct RuleArgs {
    /// Defaults to k3 when k = 3 and general otherwise.
    #[arg(long, value_enum)]
    rule: Vec<RuleName>,
    #[arg(long, value_parser = parse_eps, default_value = "default")]
    eps: EpsMode,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    suite: SuiteArgs,
    #[arg(long, value_enum, default_value = "blocks")]
    body: BodyArg,
    /// Directory for the instance files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "characterization")]
    method: MethodArg,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Instance files; a generated suite is used when none are given.
    files: Vec<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "nonmonotone")]
    kind: KindArg,
    #[command(flatten)]
    rules: RuleArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct RunArgs {
    file: PathBuf,
    #[command(flatten)]
    rules: RuleArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "given")]
    order: OrderMode,
    /// Include the per-step trace (JSON only).
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct LemmasArgs {
    /// Scenarios per suite.
    #[arg(long, default_value_t = 100_000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EpsilonArgs {
    /// Single k; otherwise the range k-min..=k-max.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k_min: usize,
    #[arg(long, default_value_t = 64)]
    k_max: usize,
    #[arg(long, value_parser = parse_eps, default_value = "default")]
    eps: EpsMode,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct RatioTableArgs {
    /// Instances whose exact ratios fill the measured column.
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k_min: usize,
    #[arg(long, default_value_t = 64)]
    k_max: usize,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Violation) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_guard() { 3 } else { 2 })
        }
    }
}
