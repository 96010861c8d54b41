use std::f64::consts::PI;
use std::io::Write;

use disperse_core::oracle::{evolve_mode, fit_omega_eta};
use disperse_core::{BranchId, DispersionResult, OracleConfig, OracleFit, OracleRun};
use rayon::prelude::*;

use crate::config::Plan;
use crate::sweep::{fmt_num, solve_branch};

pub const COMPARE_HEADER: &str =
    "k,omega_solver,eta_solver,omega_oracle,eta_oracle,rel_err_omega,abs_err_eta,eta_resolution,sign_agree,branch";

pub const OMEGA_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub branch: BranchId,
    pub solver: DispersionResult,
    pub oracle: Result<OracleFit, String>,
    pub eta_resolution: f64,
    pub sign_agree: bool,
}

impl CompareRow {
    pub fn rel_err_omega(&self) -> f64 {
        match &self.oracle {
            Ok(fit) => (fit.omega - self.solver.omega()).abs() / self.solver.omega().abs(),
            Err(_) => f64::NAN,
        }
    }

    pub fn abs_err_eta(&self) -> f64 {
        match &self.oracle {
            Ok(fit) => (fit.eta - self.solver.eta()).abs(),
            Err(_) => f64::NAN,
        }
    }

    pub fn passed(&self) -> bool {
        self.solver.converged && self.rel_err_omega() < OMEGA_TOLERANCE && self.sign_agree
    }
}

/// Smallest |η| the oracle can tell from zero: the RK4 amplitude loss per
/// unit time plus the fit misfit spread over the fitted window.
pub fn eta_resolution(fit: &OracleFit, run: &OracleRun, oracle: &OracleConfig) -> f64 {
    let rk4 = fit.omega.abs() * (2.0 * PI * oracle.dt).powi(5) / 144.0;
    let window = 0.8 * run.times.last().copied().unwrap_or(0.0);
    2.0 * rk4 + fit.fit_residual / window
}

/// Both below the oracle's resolution, or both resolved with equal signs.
fn signs_agree(solver_eta: f64, oracle_eta: f64, resolution: f64) -> bool {
    match (solver_eta.abs() < resolution, oracle_eta.abs() < resolution) {
        (true, true) => true,
        (false, false) => solver_eta.signum() == oracle_eta.signum(),
        _ => false,
    }
}

fn oracle_at(plan: &Plan, oracle: &OracleConfig, k: f64) -> Result<(OracleFit, f64), String> {
    let run = evolve_mode(k, &plan.scales, oracle).map_err(|e| e.to_string())?;
    let fit = fit_omega_eta(&run).map_err(|e| e.to_string())?;
    Ok((fit, eta_resolution(&fit, &run, oracle)))
}

/// Solver roots on the full grid, oracle fits at every `subsample`-th k.
pub fn compare_rows(plan: &Plan, oracle: &OracleConfig) -> Vec<CompareRow> {
    let exact: Vec<BranchId> = plan.branches.iter().copied().filter(|b| b.is_exact()).collect();
    let solved: Vec<_> = exact.par_iter().map(|&b| solve_branch(plan, b)).collect();
    let jobs: Vec<(BranchId, DispersionResult)> = solved
        .iter()
        .flat_map(|s| s.points.iter().step_by(plan.subsample).map(move |p| (s.branch, *p)))
        .collect();
    jobs.into_par_iter()
        .map(|(branch, solver)| {
            let (oracle, eta_resolution, sign_agree) = match oracle_at(plan, oracle, solver.k) {
                Ok((fit, res)) => {
                    let agree = solver.converged && signs_agree(solver.eta(), fit.eta, res);
                    (Ok(fit), res, agree)
                }
                Err(e) => (Err(e), f64::NAN, false),
            };
            CompareRow { branch, solver, oracle, eta_resolution, sign_agree }
        })
        .collect()
}

pub fn write_compare_csv<W: Write>(out: &mut W, plan: &Plan, rows: &[CompareRow]) -> std::io::Result<()> {
    let d = plan.precision;
    let (ku, wu) = (plan.k_unit(), plan.omega_unit());
    writeln!(out, "{COMPARE_HEADER}")?;
    for row in rows {
        let (wo, eo) = match &row.oracle {
            Ok(fit) => (fit.omega, fit.eta),
            Err(_) => (f64::NAN, f64::NAN),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_num(row.solver.k / ku, d),
            fmt_num(row.solver.omega() / wu, d),
            fmt_num(row.solver.eta() / wu, d),
            fmt_num(wo / wu, d),
            fmt_num(eo / wu, d),
            fmt_num(row.rel_err_omega(), d),
            fmt_num(row.abs_err_eta() / wu, d),
            fmt_num(row.eta_resolution / wu, d),
            row.sign_agree,
            row.branch.name(),
        )?;
    }
    Ok(())
}
