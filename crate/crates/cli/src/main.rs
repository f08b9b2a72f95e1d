mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{config_hash, unix_now, OutputDir, RunManifest};
use run::{Context, RunError, Status};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "qrobust", version, about = "Robust time-optimal quantum control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the Pauli basis.
    Basis(Common),
    /// Evaluate penalty matrices, metric costs and path lengths.
    Metrics(Common),
    /// Propagate a schedule over sampled noise scenarios.
    Simulate(Common),
    /// Solve the robust (or noise-free) time-optimal control problem.
    Optimize(Common),
    /// Check the pruning, averaging and trotter error bounds.
    Bounds(Common),
    /// Noise-free optimum for the Hadamard gate with and without channel errors.
    Figure2(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for scenario evaluation.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Self::Basis(c) => ("basis", c),
            Self::Metrics(c) => ("metrics", c),
            Self::Simulate(c) => ("simulate", c),
            Self::Optimize(c) => ("optimize", c),
            Self::Bounds(c) => ("bounds", c),
            Self::Figure2(c) => ("figure2", c),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    let started = unix_now();
    let loaded = match config::load(&common.config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if common.workers == Some(0) {
        eprintln!("config error: --workers must be >= 1");
        return ExitCode::from(EXIT_CONFIG);
    }
    let mut out = match OutputDir::create(&common.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("cannot create {}: {e}", common.out.display());
            return ExitCode::FAILURE;
        }
    };
    let seed = common.seed.or(loaded.config.seed);
    let mut ctx = Context {
        config: &loaded.config,
        dir: &loaded.dir,
        seed,
        out: &mut out,
    };
    let dispatch = |ctx: &mut Context| match name {
        "basis" => run::basis(ctx),
        "metrics" => run::metrics(ctx),
        "simulate" => run::simulate(ctx),
        "optimize" => run::optimize_cmd(ctx),
        "bounds" => run::bounds_cmd(ctx),
        _ => run::figure2(ctx),
    };
    let result = match common.workers {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&mut ctx)),
            Err(e) => {
                eprintln!("cannot start {k} workers: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => dispatch(&mut ctx),
    };
    let code: u8 = match &result {
        Ok(Status::Success) => 0,
        Ok(Status::Infeasible(why)) => {
            eprintln!("infeasible: {why}");
            EXIT_INFEASIBLE
        }
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        config_sha256: config_hash(&loaded.text),
        seed,
        workers: common.workers,
        started_unix: started,
        finished_unix: unix_now(),
        exit_code: i32::from(code),
        outputs: out.files().to_vec(),
    };
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("cannot write manifest: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::from(code)
}
