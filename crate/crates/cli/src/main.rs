mod build;
mod commands;
mod config;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, Failure};

#[derive(Parser)]
#[command(name = "viscosity", version, about = "Viscosity-solution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for automatic. Affects speed only.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve the stationary problem.
    Solve,
    /// Certify a function as a sub-, super- or solution.
    Certify,
    /// Evolve a parabolic or curvature flow.
    Flow,
    /// Doubling-of-variables diagnostics.
    Doubling,
    /// Sup- or inf-convolution diagnostics.
    Supconv,
    /// Error table under grid refinement against a closed form.
    Convergence,
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = config::parse(&text)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", cli.out.display())))?;
    let ctx = Ctx {
        cfg: &cfg,
        out: &cli.out,
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
    };
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::Certify => commands::certify_cmd(&ctx),
        Command::Flow => commands::flow(&ctx),
        Command::Doubling => commands::doubling(&ctx),
        Command::Supconv => commands::supconv(&ctx),
        Command::Convergence => commands::convergence(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code() as u8)
        }
    }
}
