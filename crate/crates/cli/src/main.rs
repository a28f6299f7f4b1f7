//! `warpspec`: run scenario files through the solvers and write CSV/JSON.
//!
//! Exit status: 0 on success, 1 on a solver failure or a failed comparison
//! verdict, 2 on bad input (unparsable config, unknown scenario, invalid
//! parameters, violated curvature bounds).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use warpspec::kernel::Boundary;
use warpspec::{Error, Execution};

#[derive(Debug, Parser)]
#[command(name = "warpspec", version, about = "Heat kernels and eigenvalues on model spaces")]
struct Cli {
    /// Warping step used for every scenario, replacing grid.h.
    #[arg(long, global = true, value_name = "H")]
    h_override: Option<f64>,
    /// Relative eigenvalue tolerance used for every scenario, replacing tolerances.eig.
    #[arg(long, global = true, value_name = "TOL")]
    tol_override: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the warping function of a scenario's test manifold.
    Warp { config: PathBuf, scenario: String },
    /// k-th radial Dirichlet eigenpair of the test ball.
    Eig {
        config: PathBuf,
        scenario: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Overrides the scenario's p.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Heat kernel of the test ball centred at the pole, on the scenario's t_grid.
    Kernel {
        config: PathBuf,
        scenario: String,
        #[arg(long, value_enum, default_value_t = Method::Expansion)]
        method: Method,
        #[arg(long, default_value_t = Boundary::Dirichlet)]
        boundary: Boundary,
    },
    /// Check the comparison inequalities.
    Compare {
        config: PathBuf,
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        scenario: Option<String>,
        #[arg(long)]
        all: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Expansion,
    Cn,
}

/// Everything a command needs besides its own arguments.
struct Context {
    h_override: Option<f64>,
    tol_override: Option<f64>,
    exec: Execution,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    /// Some comparison verdict failed.
    Failed,
}

fn workers() -> Result<Option<usize>, Error> {
    match std::env::var("WARPSPEC_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(Error::Config(format!("WARPSPEC_WORKERS must be a positive integer, got '{v}'"))),
        },
    }
}

fn execution() -> Result<Execution, Error> {
    let Some(w) = workers()? else {
        return Ok(Execution::Parallel);
    };
    if w == 1 {
        return Ok(Execution::Sequential);
    }
    // fails only if a pool exists already, which then keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    Ok(Execution::Parallel)
}

fn run(cli: Cli) -> Result<Status, Error> {
    for (flag, value) in [("--h-override", cli.h_override), ("--tol-override", cli.tol_override)] {
        if value.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Config(format!("{flag} must be positive")));
        }
    }
    let ctx = Context {
        h_override: cli.h_override,
        tol_override: cli.tol_override,
        exec: execution()?,
    };
    match cli.command {
        Command::Warp { config, scenario } => commands::warp(&ctx, &config, &scenario),
        Command::Eig { config, scenario, k, p } => commands::eig(&ctx, &config, &scenario, k, p),
        Command::Kernel {
            config,
            scenario,
            method,
            boundary,
        } => commands::kernel(&ctx, &config, &scenario, method, boundary),
        Command::Compare { config, scenario, all } => commands::compare(&ctx, &config, scenario.as_deref(), all),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("warpspec: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
