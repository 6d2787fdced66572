//! `critload`: critical loads, lemma certifications and cavitation scans.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod outcome;
mod output;

use outcome::{Failure, Outcome};

#[derive(Parser, Debug)]
#[command(name = "critload", version, about = "Critical loads and cavitation checks for polyconvex stored energies")]
struct Cli {
    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Seed of the single random generator used by sampling commands.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    seed: u64,

    /// Write the CSV here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KappaArg {
    Lower,
    Numeric,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    Zhang,
    Lesperanza,
    Lesperanza2,
    Excess,
    Trace,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Largest load satisfying the sufficient condition, with a criterion table.
    CriticalLoad {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        material: PathBuf,
        #[arg(long, value_enum, default_value_t = KappaArg::Lower)]
        kappa: KappaArg,
        /// `lo,hi`
        #[arg(long, default_value = "0.5,3")]
        bracket: String,
        /// Loads in the criterion table.
        #[arg(long, default_value_t = 26)]
        points: usize,
    },
    /// Brute-force certification of one of the pointwise lemmas.
    Verify {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Material for lesperanza/lesperanza2; defaults to a built-in one.
        #[arg(long)]
        material: Option<PathBuf>,
    },
    /// Table of the constant κ(q) against its bracket and affine fit.
    Kappa {
        /// `start,stop,step` inside (2, 3).
        #[arg(long, default_value = "2.05,2.95,0.05")]
        q_grid: String,
    },
    /// Radial trial-family scan and empirical cavitation load.
    Cavitation {
        #[arg(long)]
        material: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "1,20")]
        bracket: String,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Cavity radii per scan.
        #[arg(long, default_value_t = 64)]
        a_points: usize,
    },
    /// Random probe of the three-dimensional quasiconvexity conjecture.
    Conjecture {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Where to write the worst trial if it is a counterexample candidate.
        #[arg(long, default_value = "conjecture_counterexample.toml")]
        artifact: PathBuf,
    },
    /// Energy, inequality chain and null-Lagrangian checks on field files.
    FieldCheck {
        #[arg(long)]
        material: PathBuf,
        /// Field files or directories of `*.toml` field files.
        #[arg(required = true)]
        fields: Vec<PathBuf>,
        /// Replace each field's `lambda` by this multiple of the critical load.
        #[arg(long)]
        lambda_factor: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let mut out = output::Sink::new(cli.output.as_deref())?;
    let seed = cli.seed;
    match cli.command {
        Command::CriticalLoad { dim, material, kappa, bracket, points } => {
            commands::critical_load::run(&mut out, dim, &material, kappa, &bracket, points)
        }
        Command::Verify { lemma, q, lambda, samples, material } => {
            commands::verify::run(&mut out, lemma, q, lambda, samples, material.as_deref(), seed)
        }
        Command::Kappa { q_grid } => commands::kappa::run(&mut out, &q_grid),
        Command::Cavitation { material, dim, bracket, points, a_points } => {
            commands::cavitation::run(&mut out, &material, dim, &bracket, points, a_points)
        }
        Command::Conjecture { trials, lambda, artifact } => commands::conjecture::run(&mut out, trials, lambda, seed, &artifact),
        Command::FieldCheck { material, fields, lambda_factor } => {
            commands::field_check::run(&mut out, &material, &fields, lambda_factor)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(outcome) => outcome.exit_code(),
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}
