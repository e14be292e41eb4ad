//! `qfi-bound`: lower bounds on the quantum Fisher information from
//! fidelities and collective spin moments.

mod commands;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfi_core::bound::OptimizerSettings;
use qfi_core::spin::RepresentationKind;
use qfi_core::QfiError;

use output::Format;

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;
pub const EXIT_CAPACITY: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "qfi-bound", version, about = "Lower bounds on the quantum Fisher information from measured expectation values")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,
    /// Write results here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "QFI_BOUND_THREADS", default_value_t = 0, global = true)]
    jobs: usize,
    /// Grid points of the scan over mu.
    #[arg(long, global = true)]
    mu_grid_points: Option<usize>,
    /// Golden-section iterations per refined grid cell.
    #[arg(long, global = true)]
    mu_refine_iters: Option<usize>,
    /// Iteration cap of the multiplier ascent.
    #[arg(long, global = true)]
    r_max_iters: Option<usize>,
    /// Relative convergence tolerance of the multiplier ascent.
    #[arg(long, global = true)]
    r_tolerance: Option<f64>,
    /// Skip the dense-grid recheck of the final inner supremum.
    #[arg(long, global = true)]
    no_verify: bool,
}

impl Common {
    fn settings(&self) -> OptimizerSettings {
        let mut s = OptimizerSettings::default();
        if let Some(v) = self.mu_grid_points {
            s.mu_grid_points = v;
        }
        if let Some(v) = self.mu_refine_iters {
            s.mu_refine_iters = v;
        }
        if let Some(v) = self.r_max_iters {
            s.r_max_iters = v;
        }
        if let Some(v) = self.r_tolerance {
            s.r_tolerance = v;
        }
        s.verify = !self.no_verify;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rep {
    Full,
    Symmetric,
}

impl From<Rep> for RepresentationKind {
    fn from(r: Rep) -> Self {
        match r {
            Rep::Full => RepresentationKind::Full,
            Rep::Symmetric => RepresentationKind::Symmetric,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound from a GHZ fidelity (generator J_z).
    Ghz(commands::GhzArgs),
    /// Bound from a half-excited Dicke fidelity (generator J_y).
    DickeFidelity(commands::DickeArgs),
    /// Bounds over a grid of (<J_z>, <J_x^2>) values (generator J_y).
    SqueezingMap(commands::MapArgs),
    /// Ground states of +-J_x^2 - mu J_z and their QFI.
    Boundary(commands::BoundaryArgs),
    /// Bounds for every record of an experiment file.
    Experiment(commands::ExperimentArgs),
    /// Large-N scaling runs for squeezing or Dicke moments.
    Scaling(commands::ScalingArgs),
    /// Soundness check against the exact QFI of random states.
    Validate(commands::ValidateArgs),
}

fn exit_code(e: &QfiError) -> u8 {
    match e {
        QfiError::Infeasible(_) => EXIT_INFEASIBLE,
        QfiError::Capacity { .. } => EXIT_CAPACITY,
        QfiError::MuSearchUnstable { .. } => EXIT_VALIDATION,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.common.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.common.jobs).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    let settings = cli.common.settings();
    if let Err(e) = settings.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    let ctx = commands::Context {
        settings,
        seed: cli.common.seed,
    };
    let outcome = match &cli.command {
        Command::Ghz(a) => commands::ghz(&ctx, a),
        Command::DickeFidelity(a) => commands::dicke_fidelity(&ctx, a),
        Command::SqueezingMap(a) => commands::squeezing_map(&ctx, a),
        Command::Boundary(a) => commands::boundary(&ctx, a),
        Command::Experiment(a) => commands::experiment(&ctx, a),
        Command::Scaling(a) => commands::scaling(&ctx, a),
        Command::Validate(a) => commands::validate(&ctx, a),
    };
    let (table, failed) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.common.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            table.write(cli.common.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(cli.common.format, &mut lock).and_then(|_| lock.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_INVALID);
    }
    if failed {
        eprintln!("validation failed");
        return ExitCode::from(EXIT_VALIDATION);
    }
    ExitCode::SUCCESS
}
