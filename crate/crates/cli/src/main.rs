use std::path::PathBuf;

use clap::Parser;

use deadoil_cli::{run_command, Command, Flags, DEFAULT_DIRECTION, DEFAULT_SEED};

/// Optimal control of the dead oil isotherm system.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Problem configuration file.
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finite-difference step sizes for gradcheck.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3, 1e-4])]
    eps: Vec<f64>,
    /// Gradcheck direction: a profile expression or `random(scale)`.
    #[arg(long, default_value = DEFAULT_DIRECTION)]
    direction: String,
    /// Seed for random gradcheck directions.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Exit with code 3 when the gradcheck error or optimality residual exceeds this.
    #[arg(long)]
    assert_tol: Option<f64>,
}

fn main() {
    let args = Args::parse();
    let flags = Flags {
        out: args.out,
        eps: args.eps,
        direction: args.direction,
        seed: args.seed,
        assert_tol: args.assert_tol,
    };
    std::process::exit(run_command(args.command, &args.config, &flags));
}
