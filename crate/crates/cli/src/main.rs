use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use lwshrink::Variant;
use lwshrink_cli::commands::{cmd_estimate, cmd_oracle, cmd_study, OracleLaw, SigmaSource, StudyOverrides};
use lwshrink_cli::config::StudyKind;
use lwshrink_cli::{CliError, CliResult};

/// Ledoit-Wolf covariance shrinkage with unknown mean.
#[derive(Debug, Parser)]
#[command(name = "lwshrink", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shrink the covariance of a CSV of samples (one sample per row).
    Estimate {
        /// Headerless numeric CSV, n rows by p columns.
        input: PathBuf,
        /// Estimator variant: u, r, m or s.
        #[arg(long, default_value = "u", value_parser = parse_variant)]
        variant: Variant,
        /// Where to write the p×p estimate as CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a (p, n) grid study from a config file or run manifest.
    Grid(StudyArgs),
    /// Run a fixed-concentration convergence study from a config file or run manifest.
    Convergence(StudyArgs),
    /// Print the population scalars mu, alpha2, beta2, delta2 (and theta2).
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// Configuration file, or a manifest written by an earlier run.
    config: PathBuf,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all logical cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Loss table path; the manifest and difference table are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("law").required(true).args(["gaussian", "student"])))]
#[command(group(ArgGroup::new("population").required(true).args(["identity", "sigma"])))]
struct OracleArgs {
    /// Gaussian samples.
    #[arg(long)]
    gaussian: bool,
    /// Multivariate t samples with NU degrees of freedom.
    #[arg(long, value_name = "NU")]
    student: Option<f64>,
    /// Identity covariance of dimension p.
    #[arg(long, requires = "p")]
    identity: bool,
    /// Covariance from a p×p CSV file.
    #[arg(long, value_name = "FILE")]
    sigma: Option<PathBuf>,
    /// Dimension (required with --identity).
    #[arg(short = 'p')]
    p: Option<usize>,
    /// Number of samples.
    #[arg(short = 'n')]
    n: usize,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: lwshrink::Error| e.to_string())
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Estimate { input, variant, out } => cmd_estimate(&input, variant, &out),
        Command::Grid(args) => study(StudyKind::Grid, args),
        Command::Convergence(args) => study(StudyKind::Convergence, args),
        Command::Oracle(args) => {
            let law = match args.student {
                Some(nu) => OracleLaw::Student(nu),
                None => OracleLaw::Gaussian,
            };
            let sigma = match args.sigma {
                Some(path) => SigmaSource::File(path),
                None => SigmaSource::Identity(args.p.ok_or_else(|| CliError::input("--identity needs -p"))?),
            };
            cmd_oracle(law, &sigma, args.n)
        }
    }
}

fn study(kind: StudyKind, args: StudyArgs) -> CliResult<String> {
    let overrides = StudyOverrides {
        seed: args.seed,
        threads: args.threads,
        out: args.out,
    };
    let outputs = cmd_study(kind, &args.config, &overrides)?;
    let mut text = format!("losses={}\n", outputs.losses.display());
    if let Some(diff) = outputs.differences {
        text.push_str(&format!("differences={}\n", diff.display()));
    }
    text.push_str(&format!("manifest={}\n", outputs.manifest.display()));
    Ok(text)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
