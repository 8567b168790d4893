//! Batch runner for the `specnorm` experiments. Each subcommand validates its
//! configuration, computes, writes a CSV and reports whether its acceptance
//! bands were met.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod input;

pub use commands::Outcome;
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "specnorm", version, about = "Spectral norm and refined Sobolev inequality experiments")]
pub struct Cli {
    /// TOML file with [theta], [verify_abstract], [scaling], [stability] and [norms] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// CSV destination (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "SPECNORM_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the abstract refined inequality on a seeded random ensemble.
    VerifyAbstract,
    /// Norm scaling of the oscillating family on a manifold with ends.
    Scaling,
    /// Stability of the modified Besov norm under spectral cutoffs.
    Stability,
    /// Dump the norms of the vectors in an operator file.
    Norms {
        /// Operator file: header N, weight row, N matrix rows, vector rows.
        input: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io(p.display().to_string(), e))?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let theta = cfg.theta.build()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    // Everything is validated before the output file is touched.
    match cli.command {
        Command::VerifyAbstract => {
            let spec = cfg.verify_abstract.build(theta)?;
            let out = open_output(cli.out.as_ref())?;
            pool.install(|| commands::verify_abstract(&spec, out))
        }
        Command::Scaling => {
            let plan = cfg.scaling.plan()?;
            let out = open_output(cli.out.as_ref())?;
            pool.install(|| commands::scaling(&plan, &theta, out))
        }
        Command::Stability => {
            let plan = cfg.stability.plan()?;
            let out = open_output(cli.out.as_ref())?;
            pool.install(|| commands::stability(&plan, &theta, out))
        }
        Command::Norms { input, p, s, sigma } => {
            let mut params = cfg.norms.clone();
            params.p = p.unwrap_or(params.p);
            params.s = s.unwrap_or(params.s);
            params.sigma = sigma.unwrap_or(params.sigma);
            params.validate()?;
            let name = input.display().to_string();
            let text = std::fs::read_to_string(&input).map_err(|e| CliError::Io(name.clone(), e))?;
            let file = input::OperatorFile::parse(&name, &text)?;
            let out = open_output(cli.out.as_ref())?;
            commands::norms_dump(&file, &params, &theta, out)
        }
    }
}

/// Parses `args`, runs, reports to stderr and returns the exit status:
/// 0 when every band is met, 1 when a band fails, 2 on errors.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(outcome) => {
            for (line, ok) in &outcome.checks {
                eprintln!("{} {line}", if *ok { "ok  " } else { "FAIL" });
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
