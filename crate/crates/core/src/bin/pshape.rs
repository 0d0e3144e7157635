use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pshape::driver::{parse_config, run_optimize, ExitStatus};
use pshape::verify::run_suite;

#[derive(Parser)]
#[command(name = "pshape", version, about = "p-Laplace steepest-descent shape optimization for 2D flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimization loop described by a config file.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Uniform refinements of the base mesh (overrides `levels`).
        #[arg(long)]
        levels: Option<usize>,
        /// Maximum optimization steps (overrides `max_steps`).
        #[arg(long)]
        max_steps: Option<usize>,
        /// Accepted for interface symmetry; the optimization is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification suite: saddle, derivatives, detexp, flow, gmres or all.
    Check {
        #[arg(long)]
        suite: String,
        /// Seed of the random test data.
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Optimize { config, out, levels, max_steps, seed } => {
            let mut cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(l) = levels {
                cfg.levels = l;
            }
            if let Some(m) = max_steps {
                cfg.max_steps = m;
            }
            if let Some(s) = seed {
                log::debug!("seed {s} ignored by the deterministic optimizer");
            }
            match run_optimize(&cfg) {
                Ok(log) => {
                    let status = log.exit.unwrap_or(ExitStatus::MaxSteps);
                    println!(
                        "{}: {} accepted steps, {} rejected trials, J0 = {:.10e}, J = {:.10e}",
                        status.name(),
                        log.steps.len(),
                        log.rejected.len(),
                        log.j0.unwrap_or(f64::NAN),
                        log.final_j().unwrap_or(f64::NAN)
                    );
                    println!("outputs in {}", cfg.output_dir.display());
                    match status {
                        ExitStatus::Converged => ExitCode::SUCCESS,
                        ExitStatus::Stalled | ExitStatus::MaxSteps => ExitCode::from(2),
                    }
                }
                Err(failure) => {
                    eprintln!("error: {failure}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Check { suite, seed } => match run_suite(&suite, seed) {
            Ok(reports) => {
                let mut ok = true;
                for r in &reports {
                    for c in &r.checks {
                        let cmp = if c.lower { ">=" } else { "<=" };
                        let mark = if c.passed() { "ok  " } else { "FAIL" };
                        println!("{mark} {:<12} {:<45} {:.3e} {cmp} {:.1e}", r.name, c.name, c.value, c.bound);
                    }
                    let verdict = if r.passed() { "PASS" } else { "FAIL" };
                    println!("{verdict} {} ({:.2} s, limit {:.0} s)", r.name, r.seconds, r.time_limit);
                    ok &= r.passed();
                }
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
