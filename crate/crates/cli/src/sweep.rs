use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use disperse_core::solver::{solve_best_effort, solve_dominant, sweep};
use disperse_core::{BranchId, DisperseError, DispersionResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Plan, SolveMode};

pub const CSV_HEADER: &str = "k,omega,eta,v_phase,r,epsilon,residual,iterations,converged,branch";

/// One branch sweep. `error` holds the first failure that sent points to
/// the best-effort fallback.
#[derive(Debug, Clone)]
pub struct BranchSweep {
    pub branch: BranchId,
    pub points: Vec<DispersionResult>,
    pub error: Option<String>,
}

impl BranchSweep {
    pub fn converged(&self) -> usize {
        self.points.iter().filter(|p| p.converged).count()
    }

    pub fn all_converged(&self) -> bool {
        self.converged() == self.points.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchStats {
    pub csv: String,
    pub points: usize,
    pub converged: usize,
    pub unconverged: usize,
    pub max_residual: f64,
    pub mean_iterations: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn best_effort(plan: &Plan, branch: BranchId, k: f64) -> DispersionResult {
    solve_best_effort(k, branch, &plan.scales, &plan.solver).expect("grid and branch were validated")
}

pub fn solve_branch(plan: &Plan, branch: BranchId) -> BranchSweep {
    let mut error = None;
    let points = match plan.mode {
        SolveMode::Continuation => match sweep(&plan.k_grid, branch, &plan.scales, &plan.solver) {
            Ok(points) => points,
            Err(e) => {
                error = Some(e.to_string());
                plan.k_grid.iter().map(|&k| best_effort(plan, branch, k)).collect()
            }
        },
        SolveMode::Dominant => plan
            .k_grid
            .iter()
            .map(|&k| {
                solve_dominant(k, branch, &plan.scales, &plan.solver).unwrap_or_else(|e: DisperseError| {
                    error.get_or_insert_with(|| e.to_string());
                    best_effort(plan, branch, k)
                })
            })
            .collect(),
    };
    BranchSweep { branch, points, error }
}

/// Sweeps of every requested branch, concurrently.
pub fn solve_all(plan: &Plan) -> Vec<BranchSweep> {
    plan.branches.par_iter().map(|&b| solve_branch(plan, b)).collect()
}

pub fn fmt_num(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits - 1, x)
}

pub fn write_csv<W: Write>(out: &mut W, plan: &Plan, sweep: &BranchSweep) -> std::io::Result<()> {
    let d = plan.precision;
    let (ku, wu, vu) = (plan.k_unit(), plan.omega_unit(), plan.velocity_unit());
    writeln!(out, "{CSV_HEADER}")?;
    for p in &sweep.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_num(p.k / ku, d),
            fmt_num(p.omega() / wu, d),
            fmt_num(p.eta() / wu, d),
            fmt_num(p.v_phase() / vu, d),
            fmt_num(p.r(), d),
            fmt_num(p.epsilon(), d),
            fmt_num(p.residual_norm, d),
            p.iterations,
            p.converged,
            p.branch.name(),
        )?;
    }
    Ok(())
}

pub fn stats(sweep: &BranchSweep) -> BranchStats {
    let n = sweep.points.len();
    let converged = sweep.converged();
    BranchStats {
        csv: format!("{}.csv", sweep.branch.name()),
        points: n,
        converged,
        unconverged: n - converged,
        max_residual: sweep.points.iter().map(|p| p.residual_norm).fold(0.0, f64::max),
        mean_iterations: sweep.points.iter().map(|p| p.iterations as f64).sum::<f64>() / n.max(1) as f64,
        error: sweep.error.clone(),
    }
}

/// Resolved config with a `[summary]` table appended; loadable as a config.
pub fn summary_toml(plan: &Plan, sweeps: &[BranchSweep]) -> Result<String> {
    let mut table = toml::Table::try_from(&plan.config).context("serializing resolved config")?;
    let mut summary = toml::Table::new();
    summary.insert("all_converged".into(), sweeps.iter().all(|s| s.all_converged()).into());
    for s in sweeps {
        summary.insert(s.branch.name().into(), toml::Value::try_from(stats(s))?);
    }
    table.insert("summary".into(), summary.into());
    Ok(toml::to_string(&table)?)
}

pub fn write_outputs(plan: &Plan, sweeps: &[BranchSweep]) -> Result<Vec<PathBuf>> {
    let dir = &plan.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for s in sweeps {
        let path = dir.join(format!("{}.csv", s.branch.name()));
        let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        write_csv(&mut out, plan, s)?;
        out.flush()?;
        written.push(path);
    }
    let path = dir.join("summary.toml");
    std::fs::write(&path, summary_toml(plan, sweeps)?).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}
