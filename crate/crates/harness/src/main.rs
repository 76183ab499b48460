use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dnd_sde_harness::plan::{format_dyadic, ExperimentPlan};
use dnd_sde_harness::{execute_plan, parse_plan, render_plan, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "dnd-sde", version, about = "Runs SDE integrator experiments and writes CSV tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a plan and write errors.csv (and series.csv for traces).
    Run {
        plan: PathBuf,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the built-in problems and their parameters.
    ListModels,
    /// Parse and check a plan, then print it with all defaults filled in.
    Validate { plan: PathBuf },
}

fn load(path: &Path) -> Result<ExperimentPlan, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        what: path.to_owned(),
        source,
    })?;
    Ok(parse_plan(&text)?)
}

const MODELS: &str = "\
rotation41         dX = bX dt + sigma X dW1 + eps J X dW2 on R^2      b = -4, sigma = 8, eps = 8, x0 = 1, 2
ginzburg_landau46  dX = (aX - bX^3) dt + sigma X dW on R             a = 1, b = 1, sigma = 2, x0 = 1
nonlinear_rot47    dX = a sqrt(2+cos X1) X dW1 + b sqrt(2+sin X2) J X dW2 on R^2    a = 6, b = 3, x0 = 4, 2
shifted48          nonlinear_rot47 (a = 6, b = 3) with constant shifts in both diffusions   x0 = 4, 2
bilinear           dX = B X dt + sum_k S_k X dWk; keys dim, drift, diffusion (matrices separated by |)
";

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListModels => {
            print!("{MODELS}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { plan } => load(&plan).map(|p| {
            print!("{}", render_plan(&p));
            ExitCode::SUCCESS
        }),
        Command::Run {
            plan,
            samples,
            seed,
            out,
            workers,
        } => load(&plan).and_then(|p| {
            let opts = RunOptions {
                samples,
                seed,
                out,
                workers,
            };
            let report = execute_plan(&p, &opts)?;
            for path in &report.written {
                println!("wrote {}", path.display());
            }
            if let Some(r) = &report.reference {
                let (v, ci) = r.terminal();
                println!("reference ({}): E phi(X_T) = {v:.10e} +/- {ci:.3e}", r.method.name());
            }
            for row in &report.errors.rows {
                if row.failed_paths > 0 {
                    eprintln!(
                        "warning: {} at {}: {} of {} paths failed",
                        row.scheme,
                        format_dyadic(row.delta),
                        row.failed_paths,
                        row.samples
                    );
                }
            }
            if report.all_failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: every path failed for {}", report.all_failed.join(", "));
                Ok(ExitCode::from(2))
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
