//! `kbl`: batch runner for the kbl-core experiments.
//!
//! Every subcommand writes CSV (and sometimes JSON) files into `--out`.
//! Exit status: 0 pass, 1 invariant failure, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd;
mod out;

#[derive(Debug, Parser)]
#[command(name = "kbl", version, about = "Kakeya-Brascamp-Lieb experiment runner")]
pub struct Cli {
    /// JSON configuration for the chosen subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "kbl-out")]
    pub out: PathBuf,
    /// Seed for every random stream. Required by stochastic subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample budget override.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Exponents kappa, kappa~ and fitted scaling slopes of BL data.
    Exponents,
    /// Kakeya-BL reports on families of affine subspaces.
    Kakeya,
    /// Fremlin tensor norms against brute force and lower bounds.
    Fremlin,
    /// John ellipsoids, visibility and the convex volume inequalities.
    GeometryChecks,
    /// Zero-set meshes, Bezout, Crofton, bisection and p0 checks.
    PolysurfChecks,
    /// Both directions of the multilinear duality.
    Duality,
    /// Randomised invariant suites of every module.
    Proptest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::Kakeya => "kakeya",
            Command::Fremlin => "fremlin",
            Command::GeometryChecks => "geometry-checks",
            Command::PolysurfChecks => "polysurf-checks",
            Command::Duality => "duality",
            Command::Proptest => "proptest",
        }
    }

    fn stochastic(self) -> bool {
        !matches!(self, Command::Exponents)
    }
}

/// Outcome of a subcommand that ran to completion.
pub enum Outcome {
    Pass,
    Fail(Vec<String>),
}

/// Errors that stop a subcommand before it can judge anything.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl From<kbl_core::Error> for ConfigError {
    fn from(e: kbl_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub type CmdResult = Result<Outcome, ConfigError>;

fn run(cli: &Cli) -> CmdResult {
    if cli.command.stochastic() && cli.seed.is_none() {
        return Err(ConfigError(format!("`{}` is stochastic: --seed is required", cli.command.name())));
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| ConfigError(e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| ConfigError(format!("{}: {e}", cli.out.display())))?;
    match cli.command {
        Command::Exponents => cmd::exponents::run(cli),
        Command::Kakeya => cmd::kakeya::run(cli),
        Command::Fremlin => cmd::fremlin::run(cli),
        Command::GeometryChecks => cmd::geometry::run(cli),
        Command::PolysurfChecks => cmd::polysurf::run(cli),
        Command::Duality => cmd::duality::run(cli),
        Command::Proptest => cmd::proptest::run(cli),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => {
            println!("{}: pass", cli.command.name());
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(why)) => {
            for w in &why {
                eprintln!("{}: FAIL {w}", cli.command.name());
            }
            ExitCode::from(1)
        }
        Err(ConfigError(msg)) => {
            eprintln!("{}: error: {msg}", cli.command.name());
            ExitCode::from(2)
        }
    }
}
