use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, warn};

use dgcomplex::app::{cmd_convergence, cmd_mesh_gen, cmd_properties, cmd_run, parse_config, AppConfig};

#[derive(Parser)]
#[command(name = "dgcomplex", version, about = "Constraint-preserving DG solvers on periodic 2D meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file with key=value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the `out` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for assembly.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and validate a mesh.
    MeshGen,
    /// Run one test case.
    Run,
    /// Run a convergence study over the `ladder` sizes.
    Convergence,
    /// Check the operator identities on the configured mesh.
    Properties,
}

fn load(path: &Option<PathBuf>) -> Result<AppConfig, String> {
    let path = path.as_ref().ok_or("--config is required")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (cfg, warnings) = parse_config(&text).map_err(|e| e.to_string())?;
    for w in warnings {
        warn!("{w}");
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            error!("cannot set thread count: {e}");
            return ExitCode::FAILURE;
        }
    }
    let cfg = match load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.as_deref();
    let result = match cli.command {
        Command::MeshGen => cmd_mesh_gen(&cfg, out).map(|r| {
            println!(
                "cells {} sides {} vertices {} euler {} h_min {:.6e} valid {}",
                r.n_cells, r.n_sides, r.n_vertices, r.euler_characteristic, r.h_min, r.passed()
            );
            r.passed()
        }),
        Command::Run => cmd_run(&cfg, out).map(|r| {
            let drift = r.drift.iter().cloned().fold(0.0, f64::max);
            println!("steps {} dt {:.6e} max drift {:.3e}", r.steps, r.dt, drift);
            for (name, e) in &r.errors {
                println!("error {name} {e:.6e}");
            }
            true
        }),
        Command::Convergence => cmd_convergence(&cfg, out).map(|t| {
            print!("{}", t.to_csv());
            true
        }),
        Command::Properties => cmd_properties(&cfg, out).map(|checks| {
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {} k={} residual {:.3e} tol {:.0e}", c.name, c.degree, c.residual, c.tolerance);
            }
            checks.iter().all(|c| c.passed)
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
