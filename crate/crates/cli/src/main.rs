mod report;
mod sweep;
mod target;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gausskit::{Allocation, CostModel, EstimateOptions, IdealKind, OrderStrategy, Rounding, SimOptions};

use crate::target::TargetArgs;

/// Misuse of flags; exits with status 2 like clap's own usage errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "gausskit", version, about = "Gaussian and phase state-preparation circuits")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a circuit and write it in the text format.
    Generate {
        #[command(flatten)]
        target: TargetArgs,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a circuit file or a target and report error and cost.
    Simulate(report::SimulateArgs),
    /// Grid sweep over up to two parameters, written as CSV.
    Sweep(sweep::SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum IdealArg {
    Finite,
    Infinite,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderArg {
    Optimal,
    Random,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AllocArg {
    Uniform,
    #[value(name = "2to1")]
    TwoToOne,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RoundingArg {
    Real,
    Ceil,
}

/// Options shared by `simulate` and `sweep`.
#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "finite")]
    pub ideal: IdealArg,
    #[arg(long, value_enum, default_value = "optimal")]
    pub order: OrderArg,
    #[arg(long, value_enum, default_value = "2to1")]
    pub alloc: AllocArg,
    #[arg(long, value_enum, default_value = "real")]
    pub cost_rounding: RoundingArg,
}

impl RunArgs {
    pub fn estimate_options(&self, noise_seed: Option<u64>, sim: SimOptions) -> EstimateOptions<f64> {
        EstimateOptions {
            allocation: self.allocation(),
            cost: self.cost(),
            order: match self.order {
                OrderArg::Optimal => OrderStrategy::Optimal,
                OrderArg::Identity => OrderStrategy::Identity,
                OrderArg::Random => OrderStrategy::Random(self.seed),
            },
            noise_seed,
            ideal: match self.ideal {
                IdealArg::Finite => IdealKind::Finite,
                IdealArg::Infinite => IdealKind::InfiniteTail,
            },
            prune: noise_seed.is_some(),
            sim,
        }
    }

    pub fn allocation(&self) -> Allocation {
        match self.alloc {
            AllocArg::Uniform => Allocation::Uniform,
            AllocArg::TwoToOne => Allocation::TwoToOne,
        }
    }

    pub fn cost(&self) -> CostModel<f64> {
        CostModel::default().with_rounding(match self.cost_rounding {
            RoundingArg::Real => Rounding::Real,
            RoundingArg::Ceil => Rounding::Ceil,
        })
    }
}

pub fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let sim = SimOptions::from_env()?;
    match cli.command {
        Command::Generate { target, out } => {
            let circuit = target.circuit()?;
            sim.check::<f64>(circuit.data_qubits())?;
            write_output(out.as_ref(), &gausskit::text::export(&circuit))
        }
        Command::Simulate(args) => report::simulate(&args, sim),
        Command::Sweep(args) => sweep::sweep(&args, sim),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<gausskit::Error>() {
        Some(gausskit::Error::Parse { .. }) => 3,
        Some(gausskit::Error::Capacity { .. }) => 4,
        Some(gausskit::Error::Domain(_) | gausskit::Error::UnsupportedDegree(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
