//! The `bellconc` command line.
//!
//! Every command writes its data files plus a `<command>.manifest.json` into
//! the output directory (`--out`, overridden by `BELLCONC_OUT`). Data files
//! depend only on flags, config and seed; timestamps live in the manifest.

mod commands;
pub mod config;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};

pub use config::Config;

pub const OUT_ENV: &str = "BELLCONC_OUT";

#[derive(Debug, Parser)]
#[command(name = "bellconc", version, about = "Bell functionals, Haar-random states and concentration tail bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed (a `seed` key in a config file takes precedence only when
    /// this flag is absent).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sampling experiments (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory; the BELLCONC_OUT environment variable wins over it.
    #[arg(long, global = true, default_value = "bellconc-out")]
    pub out: PathBuf,
    /// Numerical tolerance for checks and eigen-solvers.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FunctionalSource {
    /// Built-in functional: chsh, pent1, pent2, pent3 or i3322.
    #[arg(long, conflicts_with = "file")]
    pub catalog: Option<String>,
    /// Functional JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical bounds of a functional by strategy enumeration.
    ClassicalBound {
        #[command(flatten)]
        source: FunctionalSource,
    },
    /// Rewrite an inequality with coefficients in [0, 1] and bound 1.
    Positivize {
        #[command(flatten)]
        source: FunctionalSource,
        /// Positivize the lower inequality T ≥ Δᵢ instead.
        #[arg(long)]
        lower: bool,
    },
    /// Estimate P(V_opt > c) from below over Haar-random states.
    Tail {
        /// key = value or JSON config.
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the tail bound on log P(V_opt > c).
    Bound(BoundArgs),
    /// Concentration of Q over Haar states against Lévy's bound.
    Concentration(ConcentrationArgs),
    /// Build an ε-net of the cube and check its covering property.
    NetDemo(NetArgs),
    /// Catalog verification and invariant smoke checks.
    Verify {
        /// Corrupt one catalog coefficient first (the check must then fail).
        #[arg(long, hide = true)]
        corrupt_fixture: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long = "parties", short = 'N', default_value_t = 2)]
    pub parties: u32,
    #[arg(long = "settings", short = 'm', default_value_t = 2)]
    pub settings: u32,
    #[arg(long = "outcomes", short = 'v', default_value_t = 2)]
    pub outcomes: u32,
    #[arg(long = "dim", short = 'd', default_value_t = 2)]
    pub dim: u32,
    /// Coefficient cap b.
    #[arg(long, short = 'b', default_value_t = 1.0)]
    pub cap: f64,
    /// Threshold c.
    #[arg(long, short = 'c', default_value_t = 2.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// theorem, appendix, derived or all; default theorem and derived.
    #[arg(long)]
    pub variant: Vec<String>,
    /// Sweep N over `start:end[:step]`.
    #[arg(long)]
    pub sweep_parties: Option<String>,
    /// Sweep d over a comma list.
    #[arg(long)]
    pub sweep_dim: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ConcentrationArgs {
    /// Party counts, `2,3,4` or `2:8`.
    #[arg(long, default_value = "2:6")]
    pub parties: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub settings: usize,
    #[arg(long, default_value_t = 2)]
    pub outcomes: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    #[arg(long, short = 'n', default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Number of sampled points of X = [−1,1]^n.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 10_000)]
    pub probes: usize,
}

/// Record written next to every data file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Collects output files for one command run.
pub struct Output {
    dir: PathBuf,
    command: String,
    started: f64,
    files: Vec<String>,
}

impl Output {
    fn new(dir: PathBuf, command: &str) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            command: command.to_string(),
            started: now(),
            files: Vec::new(),
        })
    }

    pub fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    fn finish(self, config: serde_json::Value, seed: u64) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.clone(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started: self.started,
            finished: now(),
            outputs: self.files,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

/// `--out`, unless `BELLCONC_OUT` is set.
pub fn output_dir(flag: &Path) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| flag.to_path_buf())
}

/// Formats a double with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Runs a parsed command; the return value is the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let global = cli.global;
    let dir = output_dir(&global.out);
    let name = match &cli.command {
        Command::ClassicalBound { .. } => "classical-bound",
        Command::Positivize { .. } => "positivize",
        Command::Tail { .. } => "tail",
        Command::Bound(_) => "bound",
        Command::Concentration(_) => "concentration",
        Command::NetDemo(_) => "net-demo",
        Command::Verify { .. } => "verify",
    };
    let mut out = Output::new(dir, name)?;
    let (config, seed, code) = match cli.command {
        Command::ClassicalBound { source } => commands::classical_bound(&source, &mut out)?,
        Command::Positivize { source, lower } => commands::positivize(&source, lower, &mut out)?,
        Command::Tail { config } => commands::tail(&config, &global, &mut out)?,
        Command::Bound(args) => commands::bound(&args, &mut out)?,
        Command::Concentration(args) => commands::concentration(&args, &global, &mut out)?,
        Command::NetDemo(args) => commands::net_demo(&args, &global, &mut out)?,
        Command::Verify { corrupt_fixture } => commands::verify(corrupt_fixture, &global, &mut out)?,
    };
    out.finish(config, seed)?;
    Ok(code)
}

/// Entry point for the binary: parses `std::env::args`, reports errors on
/// stderr and returns the exit code.
pub fn main_from_env() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub(crate) fn parse_range(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse range `{spec}`"));
    if spec.contains(':') {
        let parts: Vec<u64> = spec
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (*a, *b, 1),
            [a, b, s] if *s > 0 => (*a, *b, *s),
            _ => return Err(bad()),
        };
        Ok((start..=end).step_by(step as usize).collect())
    } else {
        spec.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect()
    }
}
