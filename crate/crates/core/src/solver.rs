//! Damped Newton root finding for the exact dispersion residuals and
//! continuation sweeps across k.

use crate::dispersion::{
    closed_form_omega, degenerate_dispersion_function, omega_c1_corrected,
    omega_degenerate_bohm_gross, omega_quantum_langmuir, omega_weak_biquadratic,
    omega_weak_simple, omega_zero_sound, residual_quadrature, residual_weak, BranchId,
    ComplexRate,
};
use crate::error::{DisperseError, Result};
use crate::quantum_stats::DerivedScales;
use num_complex::Complex64;

const MAX_HALVINGS: u32 = 20;
const MAX_CONDITION: f64 = 1e12;
const RESONANCE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Tolerance on the Euclidean norm of the (real, imaginary) residual.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step of the Jacobian.
    pub fd_step: f64,
    /// Seed each k of a sweep from the previous root.
    pub continuation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_iter: 100,
            fd_step: 1e-7,
            continuation: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(DisperseError::InvalidArgument {
                field,
                reason: reason.into(),
            })
        };
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return bad("abs_tol", "must be positive");
        }
        if self.max_iter < 1 {
            return bad("max_iter", "must be at least 1");
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1e-3) {
            return bad("fd_step", "must lie in (0, 1e-3)");
        }
        Ok(())
    }
}

/// One root (or closed-form value) at a single wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionResult {
    pub k: f64,
    pub branch: BranchId,
    pub rate: ComplexRate,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// η < 0.
    pub damped: bool,
    /// r² + ε² ≥ 1 with r = v_ch/v_Φ.
    pub region_flag: bool,
    /// v_ch used for r.
    pub v_ref: f64,
}

impl DispersionResult {
    fn new(
        k: f64,
        branch: BranchId,
        rate: ComplexRate,
        residual_norm: f64,
        converged: bool,
        iterations: usize,
        v_ref: f64,
    ) -> Self {
        let r = rate.r(k, v_ref);
        let eps = rate.epsilon();
        Self {
            k,
            branch,
            rate,
            residual_norm,
            converged,
            iterations,
            damped: rate.eta < 0.0,
            region_flag: r * r + eps * eps >= 1.0,
            v_ref,
        }
    }

    pub fn omega(&self) -> f64 {
        self.rate.omega
    }
    pub fn eta(&self) -> f64 {
        self.rate.eta
    }
    pub fn v_phase(&self) -> f64 {
        self.rate.v_phi(self.k)
    }
    pub fn r(&self) -> f64 {
        self.rate.r(self.k, self.v_ref)
    }
    pub fn epsilon(&self) -> f64 {
        self.rate.epsilon()
    }
}

/// The real 2-vector system handed to Newton.
struct System<'a> {
    branch: BranchId,
    k: f64,
    scales: &'a DerivedScales,
    /// Frequency unit of (ω, η) for the scaled coordinates.
    unit: f64,
}

impl<'a> System<'a> {
    fn new(branch: BranchId, k: f64, scales: &'a DerivedScales) -> Self {
        Self {
            branch,
            k,
            scales,
            unit: scales.frequency_unit(k),
        }
    }

    fn uses_r_epsilon(&self) -> bool {
        self.branch == BranchId::ExactDegenerate
    }

    fn to_rate(&self, x: [f64; 2]) -> ComplexRate {
        if self.uses_r_epsilon() {
            ComplexRate::from_r_epsilon(x[0], x[1], self.k, self.scales.v_ch)
        } else {
            ComplexRate::new(x[1] * self.unit, x[0] * self.unit)
        }
    }

    fn unknowns_of(&self, rate: ComplexRate) -> [f64; 2] {
        if self.uses_r_epsilon() {
            [rate.r(self.k, self.scales.v_ch), rate.epsilon()]
        } else {
            [rate.omega / self.unit, rate.eta / self.unit]
        }
    }

    fn admissible(&self, x: [f64; 2]) -> bool {
        if !x[0].is_finite() || !x[1].is_finite() || !(x[0] > 0.0) {
            return false;
        }
        if self.scales.is_fully_degenerate() {
            let rate = self.to_rate(x);
            let r = rate.r(self.k, self.scales.v_ch);
            let eps = rate.epsilon();
            if (r - 1.0).abs() < RESONANCE_GUARD && eps.abs() < RESONANCE_GUARD {
                return false;
            }
        }
        true
    }

    fn complex_residual(&self, x: [f64; 2]) -> Result<Complex64> {
        match self.branch {
            BranchId::ExactDegenerate => {
                degenerate_dispersion_function(x[0], x[1], self.k, self.scales)
            }
            BranchId::ExactWeak => residual_weak(self.k, self.to_rate(x).s(), self.scales),
            _ => residual_quadrature(self.k, self.to_rate(x).s(), self.scales),
        }
    }

    fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let z = self.complex_residual(x)?;
        if z.re.is_finite() && z.im.is_finite() {
            Ok([z.re, z.im])
        } else {
            Err(DisperseError::SingularInput(format!(
                "non-finite residual at k = {:e}",
                self.k
            )))
        }
    }
}

fn norm(f: [f64; 2]) -> f64 {
    f[0].hypot(f[1])
}

/// σ_max/σ_min of a 2×2 matrix.
fn condition_number(j: [[f64; 2]; 2]) -> f64 {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let mean = 0.5 * (a + d);
    let spread = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (hi, lo) = (mean + spread, (mean - spread).max(0.0));
    let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
    // σ_min from det/σ_max is more accurate than the small eigenvalue.
    let smax = hi.sqrt();
    let smin = if smax > 0.0 { det / smax } else { lo.sqrt() };
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

struct NewtonOutcome {
    x: [f64; 2],
    norm: f64,
    iterations: usize,
    converged: bool,
    failure: Option<DisperseError>,
}

fn newton(sys: &System, x0: [f64; 2], config: &SolverConfig) -> NewtonOutcome {
    let mut x = x0;
    let outcome = |x, norm, iterations, failure: Option<DisperseError>| NewtonOutcome {
        x,
        norm,
        iterations,
        converged: failure.is_none(),
        failure,
    };
    if !sys.admissible(x) {
        return outcome(
            x,
            f64::INFINITY,
            0,
            Some(DisperseError::SingularInput("seed outside the admissible region".into())),
        );
    }
    let mut f = match sys.eval(x) {
        Ok(f) => f,
        Err(e) => return outcome(x, f64::INFINITY, 0, Some(e)),
    };
    let mut fnorm = norm(f);
    let mut iterations = 0;
    loop {
        if fnorm < config.abs_tol {
            return outcome(x, fnorm, iterations, None);
        }
        if iterations >= config.max_iter {
            let e = DisperseError::NoConvergence {
                iterations,
                residual: fnorm,
            };
            return outcome(x, fnorm, iterations, Some(e));
        }
        iterations += 1;

        let scale = x[0].abs().max(x[1].abs());
        let mut jac = [[0.0; 2]; 2];
        for i in 0..2 {
            let mut h = config.fd_step * x[i].abs().max(scale);
            let mut xp = x;
            xp[i] += h;
            if !sys.admissible(xp) {
                h = -h;
                xp[i] = x[i] + h;
            }
            let fp = match sys.eval(xp) {
                Ok(fp) => fp,
                Err(e) => return outcome(x, fnorm, iterations, Some(e)),
            };
            jac[0][i] = (fp[0] - f[0]) / h;
            jac[1][i] = (fp[1] - f[1]) / h;
        }
        let condition = condition_number(jac);
        if !(condition <= MAX_CONDITION) {
            return outcome(
                x,
                fnorm,
                iterations,
                Some(DisperseError::SingularJacobian { condition }),
            );
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let step = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(jac[0][0] * f[1] - jac[1][0] * f[0]) / det,
        ];

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if sys.admissible(trial) {
                if let Ok(ft) = sys.eval(trial) {
                    if norm(ft) < fnorm {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xn, fnew)) => {
                x = xn;
                f = fnew;
                fnorm = norm(f);
            }
            None => {
                let e = DisperseError::NoConvergence {
                    iterations,
                    residual: fnorm,
                };
                return outcome(x, fnorm, iterations, Some(e));
            }
        }
    }
}

/// Below this |η/ω| the damping rate is re-derived from the real axis.
const WEAK_DAMPING: f64 = 1e-6;

/// Landau damping can be far below the residual tolerance (e^{-100}·ω is
/// typical at small k). The residual is analytic in s, so from a point
/// (ω, 0) one Newton step needs only ∂Re D/∂ω: with s = η + iω,
/// ∂Im D/∂η = −∂Re D/∂ω, and ∂Im D/∂ω is itself of the order of the damping. Im D on the real axis
/// is evaluated to full relative precision, so the sign of η survives.
fn polish_weak_damping(sys: &System, out: &mut NewtonOutcome, config: &SolverConfig) {
    if sys.uses_r_epsilon() || sys.scales.is_fully_degenerate() {
        return;
    }
    let [omega, eta] = out.x;
    if !out.converged || eta.abs() >= WEAK_DAMPING * omega {
        return;
    }
    let h = config.fd_step * omega;
    let (Ok(f0), Ok(fp), Ok(fm)) = (
        sys.eval([omega, 0.0]),
        sys.eval([omega + h, 0.0]),
        sys.eval([omega - h, 0.0]),
    ) else {
        return;
    };
    let slope = (fp[0] - fm[0]) / (2.0 * h);
    if slope == 0.0 || !slope.is_finite() {
        return;
    }
    let x = [omega - f0[0] / slope, f0[1] / slope];
    if let Ok(f) = sys.eval(x) {
        let n = norm(f);
        if n < config.abs_tol {
            out.x = x;
            out.norm = n;
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(DisperseError::InvalidArgument {
            field: "k",
            reason: format!("wavenumber must be positive and finite, got {k}"),
        })
    }
}

/// Formula value of a closed-form branch, back-substituted into the exact
/// residual of its regime.
fn closed_form_result(k: f64, branch: BranchId, scales: &DerivedScales) -> DispersionResult {
    let omega = closed_form_omega(branch, k, scales).unwrap_or(f64::NAN);
    let rate = ComplexRate::new(0.0, omega);
    let residual = if scales.is_fully_degenerate() {
        degenerate_dispersion_function(rate.r(k, scales.v_ch), 0.0, k, scales)
    } else {
        residual_weak(k, rate.s(), scales)
    };
    let residual_norm = residual.map(|z| z.norm()).unwrap_or(f64::INFINITY);
    let converged = omega.is_finite() && omega > 0.0 && residual_norm.is_finite();
    DispersionResult::new(k, branch, rate, residual_norm, converged, 0, scales.v_ch)
}

/// Seeds tried at a wavenumber with no previous root, best first.
pub fn seed_candidates(k: f64, scales: &DerivedScales) -> Vec<ComplexRate> {
    let undamped = |omega: f64| ComplexRate::new(0.0, omega);
    if scales.is_fully_degenerate() {
        let langmuir = omega_quantum_langmuir(k, scales);
        let bohm_gross = omega_degenerate_bohm_gross(k, scales);
        // Rank the three degenerate estimates by how well they satisfy the
        // real equation; the zero-sound form takes over at large k·v_F/Ω_p.
        let mut ranked: Vec<(f64, f64)> = [bohm_gross, omega_c1_corrected(k, scales), omega_zero_sound(k, scales)]
            .into_iter()
            .filter(|w| w.is_finite() && *w > 0.0)
            .map(|w| {
                let score = degenerate_dispersion_function(k * scales.v_ch / w, 0.0, k, scales)
                    .map(|z| z.norm())
                    .unwrap_or(f64::INFINITY);
                (score, w)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first = ranked.first().map(|p| p.1).unwrap_or(bohm_gross);
        let mut seeds: Vec<ComplexRate> = ranked.into_iter().map(|p| undamped(p.1)).collect();
        seeds.push(undamped(langmuir));
        seeds.push(undamped(1.2 * first));
        seeds
    } else {
        let biquadratic = omega_weak_biquadratic(k, scales);
        vec![
            undamped(biquadratic),
            undamped(omega_quantum_langmuir(k, scales)),
            undamped(omega_weak_simple(k, scales)),
            undamped(1.2 * biquadratic),
        ]
    }
}

fn check_branch(branch: BranchId, scales: &DerivedScales) -> Result<()> {
    branch.check_compatible(scales)
}

fn solve_from(
    k: f64,
    branch: BranchId,
    scales: &DerivedScales,
    seed: ComplexRate,
    config: &SolverConfig,
) -> (DispersionResult, Option<DisperseError>) {
    let sys = System::new(branch, k, scales);
    let mut out = newton(&sys, sys.unknowns_of(seed), config);
    polish_weak_damping(&sys, &mut out, config);
    let rate = sys.to_rate(out.x);
    let result = DispersionResult::new(
        k,
        branch,
        rate,
        out.norm,
        out.converged,
        out.iterations,
        scales.v_ch,
    );
    (result, out.failure)
}

/// Root of `branch` at a single k starting from `seed`. Closed-form branches
/// ignore the seed and return the formula value.
pub fn solve_at_k(
    k: f64,
    branch: BranchId,
    scales: &DerivedScales,
    seed: ComplexRate,
    config: &SolverConfig,
) -> Result<DispersionResult> {
    check_k(k)?;
    config.validate()?;
    check_branch(branch, scales)?;
    if !branch.is_exact() {
        return Ok(closed_form_result(k, branch, scales));
    }
    if !(seed.omega > 0.0) || !seed.eta.is_finite() {
        return Err(DisperseError::InvalidArgument {
            field: "seed",
            reason: format!("seed needs omega > 0, got {}", seed.omega),
        });
    }
    match solve_from(k, branch, scales, seed, config) {
        (result, None) => Ok(result),
        (_, Some(e)) => Err(e),
    }
}

/// Try each seed in turn; the first converged root wins, otherwise the
/// attempt with the smallest residual is returned unconverged.
fn solve_with_seeds(
    k: f64,
    branch: BranchId,
    scales: &DerivedScales,
    seeds: &[ComplexRate],
    config: &SolverConfig,
) -> DispersionResult {
    let mut best: Option<DispersionResult> = None;
    for &seed in seeds {
        let (result, failure) = solve_from(k, branch, scales, seed, config);
        if failure.is_none() {
            return result;
        }
        if best.is_none_or(|b| result.residual_norm < b.residual_norm) {
            best = Some(result);
        }
    }
    best.unwrap_or_else(|| {
        DispersionResult::new(
            k,
            branch,
            ComplexRate::new(f64::NAN, f64::NAN),
            f64::INFINITY,
            false,
            0,
            scales.v_ch,
        )
    })
}

/// Root at k from every closed-form seed; among the converged ones the
/// least damped (largest η) is returned, which dominates at late times.
pub fn solve_dominant(
    k: f64,
    branch: BranchId,
    scales: &DerivedScales,
    config: &SolverConfig,
) -> Result<DispersionResult> {
    check_k(k)?;
    config.validate()?;
    check_branch(branch, scales)?;
    if !branch.is_exact() {
        return Ok(closed_form_result(k, branch, scales));
    }
    let mut best: Option<DispersionResult> = None;
    let mut last_err = None;
    for seed in seed_candidates(k, scales) {
        match solve_from(k, branch, scales, seed, config) {
            (r, None) => {
                if best.is_none_or(|b| r.rate.eta > b.rate.eta) {
                    best = Some(r);
                }
            }
            (_, Some(e)) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(DisperseError::SeedFailure { k }))
}

/// Root at k from the closed-form seeds that never gives up: the first
/// converged root, or the smallest-residual last iterate with
/// `converged = false`.
pub fn solve_best_effort(
    k: f64,
    branch: BranchId,
    scales: &DerivedScales,
    config: &SolverConfig,
) -> Result<DispersionResult> {
    check_k(k)?;
    config.validate()?;
    check_branch(branch, scales)?;
    if !branch.is_exact() {
        return Ok(closed_form_result(k, branch, scales));
    }
    Ok(solve_with_seeds(k, branch, scales, &seed_candidates(k, scales), config))
}

/// Roots of `branch` on an increasing k grid. Unconverged points are kept
/// with `converged = false`; only a first point that fails from every seed
/// aborts the sweep.
pub fn sweep(
    k_grid: &[f64],
    branch: BranchId,
    scales: &DerivedScales,
    config: &SolverConfig,
) -> Result<Vec<DispersionResult>> {
    config.validate()?;
    for (i, &k) in k_grid.iter().enumerate() {
        check_k(k)?;
        if i > 0 && k <= k_grid[i - 1] {
            return Err(DisperseError::InvalidArgument {
                field: "k_grid",
                reason: "must be strictly increasing".into(),
            });
        }
    }
    if k_grid.is_empty() {
        return Ok(Vec::new());
    }
    check_branch(branch, scales)?;
    if !branch.is_exact() {
        return Ok(k_grid
            .iter()
            .map(|&k| closed_form_result(k, branch, scales))
            .collect());
    }

    let mut out = Vec::with_capacity(k_grid.len());
    let mut previous: Option<ComplexRate> = None;
    for (i, &k) in k_grid.iter().enumerate() {
        let mut seeds = Vec::new();
        if config.continuation {
            if let Some(p) = previous {
                seeds.push(p);
                seeds.push(ComplexRate::new(p.eta, 1.2 * p.omega));
            }
        }
        seeds.extend(seed_candidates(k, scales));
        let result = solve_with_seeds(k, branch, scales, &seeds, config);
        if i == 0 && !result.converged {
            return Err(DisperseError::SeedFailure { k });
        }
        if result.converged {
            previous = Some(result.rate);
        }
        out.push(result);
    }
    Ok(out)
}
