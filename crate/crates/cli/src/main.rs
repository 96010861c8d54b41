#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod compare;
mod config;
mod sweep;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use config::{ConfigError, Plan};

/// Dispersion sweeps and kinetic cross-checks for quantum plasmas.
#[derive(Parser)]
#[command(name = "disperse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every requested branch on the k grid and write one CSV per branch.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.path.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Check exact-branch roots against the kinetic oracle.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_FAILED_POINTS: u8 = 2;

fn thread_pool() -> Result<rayon::ThreadPool, ConfigError> {
    let threads = match std::env::var("DISPERSE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| ConfigError(format!("DISPERSE_THREADS: expected a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError(format!("DISPERSE_THREADS: {e}")))
}

fn load_plan(path: &Path, output_dir: Option<&Path>) -> Result<Plan, ConfigError> {
    config::resolve(config::load(path)?, output_dir)
}

fn run(plan: &Plan, quiet: bool) -> anyhow::Result<u8> {
    let sweeps = sweep::solve_all(plan);
    let written = sweep::write_outputs(plan, &sweeps)?;
    let mut ok = true;
    for s in &sweeps {
        let n = s.points.len();
        let c = s.converged();
        ok &= c == n;
        if let Some(e) = &s.error {
            eprintln!("{}: {e}", s.branch);
        }
        if !quiet {
            println!("{:<22} {c}/{n} converged", s.branch.name());
        }
    }
    if !quiet {
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(if ok { 0 } else { EXIT_FAILED_POINTS })
}

fn compare(plan: &Plan, quiet: bool) -> anyhow::Result<u8> {
    let Some(oracle) = plan.oracle else {
        return Err(ConfigError("oracle.enabled: compare requires oracle (set enabled = true)".into()).into());
    };
    if !plan.branches.iter().any(|b| b.is_exact()) {
        return Err(ConfigError("branches: compare requires at least one exact branch".into()).into());
    }
    let rows = compare::compare_rows(plan, &oracle);

    std::fs::create_dir_all(&plan.output_dir)
        .with_context(|| format!("creating {}", plan.output_dir.display()))?;
    let path = plan.output_dir.join("compare.csv");
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    compare::write_compare_csv(&mut out, plan, &rows)?;
    out.flush()?;

    if !quiet {
        compare::write_compare_csv(&mut std::io::stdout().lock(), plan, &rows)?;
    }
    for row in &rows {
        if let Err(e) = &row.oracle {
            eprintln!("{} k = {:e}: oracle failed: {e}", row.branch, row.solver.k);
        }
    }
    let passed = rows.iter().filter(|r| r.passed()).count();
    if !quiet {
        println!("{passed}/{} points within {}% with matching damping sign", rows.len(), compare::OMEGA_TOLERANCE * 100.0);
        println!("wrote {}", path.display());
    }
    Ok(if passed == rows.len() { 0 } else { EXIT_FAILED_POINTS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config_path, output_dir, quiet, is_compare) = match &cli.command {
        Command::Run { config, output_dir, quiet } => (config, output_dir, *quiet, false),
        Command::Compare { config, output_dir, quiet } => (config, output_dir, *quiet, true),
    };
    let setup = thread_pool().and_then(|pool| Ok((pool, load_plan(config_path, output_dir.as_deref())?)));
    let (pool, plan) = match setup {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = pool.install(|| if is_compare { compare(&plan, quiet) } else { run(&plan, quiet) });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ConfigError>() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_FAILED_POINTS)
            }
        }
    }
}
