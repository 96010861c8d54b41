//! Dispersion residuals and closed-form branches.
//!
//! Three independent evaluations of the same dispersion function
//!
//!   D(k, s) = 1 − (C₁/k²)(1/n0) ∫ f_z'(w) dw / (w − i s/k),   C₁ = Ω_p² + ħ²k⁴/4m²
//!
//! are provided: the closed arctangent form for the fully degenerate Fermi
//! sphere, the erfc series for α < 1, and direct adaptive quadrature with the
//! pole subtracted analytically. All residuals are dimensionless.

use crate::error::{DisperseError, Result};
use crate::quadrature;
use crate::quantum_stats::{
    reduced_fz_derivative_complex, reflected_scaled_erfc_minus_one, scaled_erfc_minus_one,
    DerivedScales, Regime,
    Statistics, SERIES_TOL,
};
use num_complex::Complex64;
use std::f64::consts::PI;

const SQRT_PI: f64 = 1.772_453_850_905_516;
const MAX_SERIES_TERMS: usize = 10_000;
/// Absolute error allowed in [`residual_quadrature`]; the velocity
/// integral's tolerance is this divided by its prefactor.
pub const QUADRATURE_ABS_TOL: f64 = 1e-12;

/// Laplace variable s = η + iω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRate {
    /// Real part of s, 1/s. Negative means the wave decays.
    pub eta: f64,
    /// Imaginary part of s, rad/s.
    pub omega: f64,
}

impl ComplexRate {
    pub fn new(eta: f64, omega: f64) -> Self {
        Self { eta, omega }
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.eta, self.omega)
    }

    /// Phase velocity ω/k.
    pub fn v_phi(&self, k: f64) -> f64 {
        self.omega / k
    }

    /// r = v_ref/v_Φ.
    pub fn r(&self, k: f64, v_ref: f64) -> f64 {
        v_ref / self.v_phi(k)
    }

    /// ε = η/ω.
    pub fn epsilon(&self) -> f64 {
        self.eta / self.omega
    }

    /// Rebuild s from the degenerate coordinates (r, ε).
    pub fn from_r_epsilon(r: f64, epsilon: f64, k: f64, v_f: f64) -> Self {
        let omega = k * v_f / r;
        Self {
            eta: epsilon * omega,
            omega,
        }
    }
}

/// Solution branches: exact residual roots and closed-form approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchId {
    ExactDegenerate,
    ExactWeak,
    ExactQuadrature,
    QuantumLangmuir,
    C1Corrected,
    DegenerateBohmGross,
    ZeroSound,
    WeakBiquadratic,
    WeakSimple,
}

impl BranchId {
    pub const ALL: [BranchId; 9] = [
        BranchId::ExactDegenerate,
        BranchId::ExactWeak,
        BranchId::ExactQuadrature,
        BranchId::QuantumLangmuir,
        BranchId::C1Corrected,
        BranchId::DegenerateBohmGross,
        BranchId::ZeroSound,
        BranchId::WeakBiquadratic,
        BranchId::WeakSimple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BranchId::ExactDegenerate => "exact_degenerate",
            BranchId::ExactWeak => "exact_weak",
            BranchId::ExactQuadrature => "exact_quadrature",
            BranchId::QuantumLangmuir => "quantum_langmuir",
            BranchId::C1Corrected => "c1_corrected",
            BranchId::DegenerateBohmGross => "degenerate_bohm_gross",
            BranchId::ZeroSound => "zero_sound",
            BranchId::WeakBiquadratic => "weak_biquadratic",
            BranchId::WeakSimple => "weak_simple",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Branches found by iterating on an exact residual.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            BranchId::ExactDegenerate | BranchId::ExactWeak | BranchId::ExactQuadrature
        )
    }

    pub fn requires_full_degeneracy(self) -> bool {
        matches!(
            self,
            BranchId::ExactDegenerate
                | BranchId::QuantumLangmuir
                | BranchId::C1Corrected
                | BranchId::DegenerateBohmGross
                | BranchId::ZeroSound
        )
    }

    pub fn requires_weak_degeneracy(self) -> bool {
        matches!(
            self,
            BranchId::ExactWeak | BranchId::WeakBiquadratic | BranchId::WeakSimple
        )
    }

    pub fn check_compatible(self, scales: &DerivedScales) -> Result<()> {
        let degenerate = scales.is_fully_degenerate();
        if self.requires_full_degeneracy() && !degenerate {
            return Err(DisperseError::IncompatibleBranch {
                branch: self.name(),
                reason: "requires a fully degenerate Fermi gas".into(),
            });
        }
        if self.requires_weak_degeneracy() && degenerate {
            return Err(DisperseError::IncompatibleBranch {
                branch: self.name(),
                reason: "requires fugacity alpha < 1".into(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for BranchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Real/imaginary residual pair of the degenerate system in (r, ε).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualValue {
    /// 1 − right-hand side of the real equation.
    pub real_part: f64,
    /// Right-hand side of the imaginary equation (must vanish at a root).
    pub imag_part: f64,
    /// Whether the step U(r² + ε² − 1) is active.
    pub region_flag: bool,
}

/// C₁ = Ω_p² + (ħ²/4m²) k⁴, (rad/s)².
pub fn coefficient_c1(k: f64, scales: &DerivedScales) -> f64 {
    scales.omega_p * scales.omega_p + scales.lambda_quantum * k.powi(4)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(DisperseError::InvalidArgument {
            field: "k",
            reason: format!("wavenumber must be positive and finite, got {k}"),
        })
    }
}

/// r (arctan ρ/ρ − 1) split into real and imaginary parts, ρ = r/(ε + i),
/// without the residue term.
fn degenerate_bracket(r: f64, epsilon: f64) -> (f64, f64) {
    let rho = Complex64::new(r, 0.0) / Complex64::new(epsilon, 1.0);
    if rho.norm() < 0.25 {
        // arctan ρ/ρ − 1 = Σ_{n≥1} (−1)^n ρ^{2n}/(2n+1); avoids the r³
        // cancellation between the logarithm and −r for small r.
        let rho2 = rho * rho;
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..40 {
            power *= -rho2;
            let term = power / (2 * n + 1) as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        let b = sum * r;
        (b.re, b.im)
    } else {
        // Half-angle arctangent continuous in r across 1 + ε² − r² = 0;
        // it coincides with the [−π/2, π/2] principal value wherever that
        // denominator is positive.
        let half_angle = 0.5 * (2.0 * r * epsilon).atan2(1.0 + epsilon * epsilon - r * r);
        let log = 0.25
            * (((1.0 - r).powi(2) + epsilon * epsilon) / ((1.0 + r).powi(2) + epsilon * epsilon))
                .ln();
        (
            epsilon * half_angle - log - r,
            half_angle + epsilon * log,
        )
    }
}

struct DegenerateTerms {
    /// 3 C₁ v_Φ / (k² v_F³)
    prefactor: f64,
    bracket_re: f64,
    bracket_im: f64,
    region_flag: bool,
}

fn degenerate_terms(r: f64, epsilon: f64, k: f64, scales: &DerivedScales) -> Result<DegenerateTerms> {
    check_wavenumber(k)?;
    if !(r > 0.0) || !r.is_finite() || !epsilon.is_finite() {
        return Err(DisperseError::InvalidArgument {
            field: "r",
            reason: format!("need finite r > 0 and finite epsilon, got r = {r}, epsilon = {epsilon}"),
        });
    }
    if r == 1.0 && epsilon == 0.0 {
        return Err(DisperseError::SingularInput(
            "r = 1, epsilon = 0: logarithmic resonance at v_phi = v_F".into(),
        ));
    }
    // −0.0 would select the lower side of the arctangent cut.
    let epsilon = if epsilon == 0.0 { 0.0 } else { epsilon };
    let region_flag = r * r + epsilon * epsilon >= 1.0;
    let step = if region_flag { 1.0 } else { 0.0 };
    let (mut bracket_re, mut bracket_im) = degenerate_bracket(r, epsilon);
    bracket_re += PI * epsilon * step;
    bracket_im += PI * step;
    let v_f = scales.v_ch;
    let prefactor = 3.0 * coefficient_c1(k, scales) / (k * k * v_f * v_f * r);
    Ok(DegenerateTerms {
        prefactor,
        bracket_re,
        bracket_im,
        region_flag,
    })
}

/// Real and imaginary equations of the fully degenerate dispersion relation
/// in the variables r = v_F/v_Φ and ε = η/ω:
///
///   1 = (3C₁/v_F³)(v_Φ/k²)[(ε/2)·A − (1/4)·L − r + πε U]
///   0 = (1/2)·A + (ε/4)·L + π U
///
/// with A = arctan(2rε/(1+ε²−r²)), L = ln(((1−r)²+ε²)/((1+r)²+ε²)) and
/// U = U(r² + ε² − 1).
pub fn residual_degenerate(r: f64, epsilon: f64, k: f64, scales: &DerivedScales) -> Result<ResidualValue> {
    let t = degenerate_terms(r, epsilon, k, scales)?;
    Ok(ResidualValue {
        real_part: 1.0 - t.prefactor * t.bracket_re,
        imag_part: t.bracket_im,
        region_flag: t.region_flag,
    })
}

/// The same degenerate relation as a single complex value D(k, s).
pub fn degenerate_dispersion_function(r: f64, epsilon: f64, k: f64, scales: &DerivedScales) -> Result<Complex64> {
    let t = degenerate_terms(r, epsilon, k, scales)?;
    Ok(1.0 - t.prefactor * Complex64::new(t.bracket_re, t.bracket_im))
}

fn weak_alpha(scales: &DerivedScales) -> Result<f64> {
    match scales.regime {
        Regime::Weak { alpha } if alpha < 1.0 => Ok(alpha),
        _ => Err(DisperseError::IncompatibleBranch {
            branch: BranchId::ExactWeak.name(),
            reason: "the erfc series needs fugacity alpha < 1".into(),
        }),
    }
}

/// Landau pole contribution 2√π θ/(α⁻¹e^{−θ²} ± 1), kept finite for large |θ|.
fn weak_pole_term(theta: Complex64, alpha: f64, statistics: Statistics) -> Complex64 {
    let sign = statistics.occupation_sign();
    let theta2 = theta * theta;
    let occupation = if theta2.re <= 0.0 {
        let x = alpha * theta2.exp();
        x / (1.0 + sign * x)
    } else {
        1.0 / ((-theta2).exp() / alpha + sign)
    };
    2.0 * SQRT_PI * theta * occupation
}

/// The bracketed sum of the weakly degenerate dispersion relation,
///   Σ_j (∓1)^{j−1} (α^j/√j) [√π √j θ e^{jθ²} erfc(√j θ) − 1] + pole term,
/// and the number of series terms used.
fn weak_bracket(theta: Complex64, alpha: f64, statistics: Statistics) -> Result<(Complex64, usize)> {
    // Re θ > 0: plain real-axis integral. Re θ ≤ 0: real-axis integral
    // (reflected erfc) plus the pole contribution picked up by the Landau
    // contour.
    let continued = theta.re <= 0.0;
    let alternating = statistics == Statistics::Fermi;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = 1.0;
    let mut bound = 0.0f64;
    let mut terms = 0;
    for j in 1..=MAX_SERIES_TERMS {
        terms = j;
        power *= alpha;
        let root_j = (j as f64).sqrt();
        let z = theta * root_j;
        let g_minus_one = if continued {
            reflected_scaled_erfc_minus_one(z)
        } else {
            scaled_erfc_minus_one(z)
        };
        bound = bound.max(g_minus_one.norm());
        let sign = if alternating && j % 2 == 0 { -1.0 } else { 1.0 };
        sum += g_minus_one * (sign * power / root_j);
        let next = (j + 1) as f64;
        let next_term = power * alpha / next.sqrt() * bound.max(1.0);
        let tail = if alternating {
            next_term
        } else {
            next_term / (1.0 - alpha)
        };
        if tail < SERIES_TOL * sum.norm() || tail == 0.0 {
            let pole = if continued {
                weak_pole_term(theta, alpha, statistics)
            } else {
                Complex64::new(0.0, 0.0)
            };
            return Ok((sum + pole, terms));
        }
    }
    Err(DisperseError::NonConvergent(format!(
        "erfc series tail above {SERIES_TOL:e} after {terms} terms (alpha = {alpha})"
    )))
}

/// Weakly degenerate residual, LHS/RHS − 1 of
///
///   (C₁/k²) √(2πK_BT/m) [Σ_j … + 2√πθ/(α⁻¹e^{−θ²} ± 1)] = (2/3) v_ch³,
///
/// θ = √(m/2K_BT) s/k.
pub fn residual_weak(k: f64, s: Complex64, scales: &DerivedScales) -> Result<Complex64> {
    check_wavenumber(k)?;
    let alpha = weak_alpha(scales)?;
    let species = &scales.species;
    let vt = species.gaussian_velocity();
    let theta = s / (k * vt);
    let (bracket, _) = weak_bracket(theta, alpha, species.statistics())?;
    let lhs_scale = coefficient_c1(k, scales) / (k * k) * SQRT_PI * vt;
    let rhs = 2.0 / 3.0 * scales.v_ch.powi(3);
    Ok(bracket * (lhs_scale / rhs) - 1.0)
}

/// Number of series terms [`residual_weak`] needs at (k, s).
pub fn residual_weak_terms(k: f64, s: Complex64, scales: &DerivedScales) -> Result<usize> {
    check_wavenumber(k)?;
    let alpha = weak_alpha(scales)?;
    let theta = s / (k * scales.species.gaussian_velocity());
    weak_bracket(theta, alpha, scales.species.statistics()).map(|(_, n)| n)
}

/// ∫_{lo}^{hi} du/(u − a); on the real axis the upper-side limit
/// (principal value + iπ inside the interval) is returned.
fn pole_integral(a: Complex64, lo: f64, hi: f64) -> Complex64 {
    if a.im != 0.0 {
        (hi - a).ln() - (lo - a).ln()
    } else {
        let x = a.re;
        let log = ((hi - x) / (x - lo)).abs().ln();
        let inside = x > lo && x < hi;
        Complex64::new(log, if inside { PI } else { 0.0 })
    }
}

/// Dimensionless ∫ h(u) du/(u − a) over [lo, hi] with h(Re a) subtracted.
fn subtracted_integral<H>(h: H, a: Complex64, lo: f64, hi: f64, abs_tol: f64) -> Result<Complex64>
where
    H: Fn(f64) -> f64,
{
    let x0 = a.re;
    let inside = x0 > lo && x0 < hi;
    let h0 = if inside { h(x0) } else { 0.0 };
    let mut breaks = vec![0.0];
    if inside {
        breaks.push(x0);
    }
    let smooth = quadrature::integrate(
        |u| {
            let num = h(u) - h0;
            if num == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                num / (u - a)
            }
        },
        lo,
        hi,
        &breaks,
        abs_tol,
    )?;
    Ok(smooth.value + h0 * pole_integral(a, lo, hi))
}

/// D(k, s), the left-hand side of the dispersion relation, by direct
/// quadrature of the velocity integral. The pole at w = is/k is subtracted
/// analytically; in the fully degenerate case the step-weighted residue
/// π(s/k)U(r²+ε²−1) is added, and for α < 1 the Landau residue is added
/// whenever Re s < 0.
pub fn residual_quadrature(k: f64, s: Complex64, scales: &DerivedScales) -> Result<Complex64> {
    check_wavenumber(k)?;
    let species = &scales.species;
    let c1 = coefficient_c1(k, scales);
    let weight = species.phase_space_weight();
    let pole = Complex64::i() * s / k;
    match scales.regime {
        Regime::FullyDegenerate => {
            let v_f = scales.v_ch;
            let a = pole / v_f;
            if a.im == 0.0 && a.re.abs() == 1.0 {
                return Err(DisperseError::SingularInput(
                    "pole at the Fermi edge (r = 1, epsilon = 0)".into(),
                ));
            }
            // ∫ −2πA w dw/(w − a v_F) over |w| < v_F = −2πA v_F ∫_{−1}^{1} u du/(u − a)
            let scale = c1 / (k * k * species.density()) * 2.0 * PI * weight * v_f;
            let integral = subtracted_integral(|u| u, a, -1.0, 1.0, QUADRATURE_ABS_TOL / scale)?;
            let mut total = -2.0 * PI * weight * v_f * integral;
            let (eta, omega) = (s.re, s.im);
            if k * k * v_f * v_f + eta * eta - omega * omega >= 0.0 {
                total += 4.0 * PI * PI * weight * s / k;
            }
            Ok(1.0 - c1 / (k * k * species.density()) * total)
        }
        Regime::Weak { alpha } => {
            let vt = species.gaussian_velocity();
            let a = pole / vt;
            let statistics = species.statistics();
            let sign = statistics.occupation_sign();
            let h = |u: f64| {
                let e = alpha * (-u * u).exp();
                u * e / (1.0 + sign * e)
            };
            let half_width = 7.0f64.max(a.re.abs() + 2.0);
            let scale = c1 / (k * k * species.density()) * 2.0 * PI * weight * vt;
            let integral = subtracted_integral(h, a, -half_width, half_width, QUADRATURE_ABS_TOL / scale)?;
            let mut total = -2.0 * PI * weight * vt * integral;
            if a.im < 0.0 {
                total += 2.0 * PI * Complex64::i() * reduced_fz_derivative_complex(pole, species, alpha);
            }
            Ok(1.0 - c1 / (k * k * species.density()) * total)
        }
    }
}

/// D(k, s) from the erfc series. Equal to −[`residual_weak`] when α solves
/// the density relation exactly.
pub fn weak_dispersion_function(k: f64, s: Complex64, scales: &DerivedScales) -> Result<Complex64> {
    residual_weak(k, s, scales).map(|r| -r)
}

/// ω = √C₁.
pub fn omega_quantum_langmuir(k: f64, scales: &DerivedScales) -> f64 {
    coefficient_c1(k, scales).sqrt()
}

/// Positive root of ω⁴ − C₁ω² − (3/5)C₁k²v_F² = 0.
pub fn omega_c1_corrected(k: f64, scales: &DerivedScales) -> f64 {
    let c1 = coefficient_c1(k, scales);
    let kv2 = k * k * scales.v_ch * scales.v_ch;
    (0.5 * c1 + (0.25 * c1 * c1 + 0.6 * c1 * kv2).sqrt()).sqrt()
}

fn three_term_omega(k: f64, velocity_sq: f64, scales: &DerivedScales) -> f64 {
    (scales.omega_p * scales.omega_p + k * k * velocity_sq + scales.lambda_quantum * k.powi(4)).sqrt()
}

/// ω² = Ω_p² + (3/5)k²v_F² + ħ²k⁴/4m².
pub fn omega_degenerate_bohm_gross(k: f64, scales: &DerivedScales) -> f64 {
    three_term_omega(k, 0.6 * scales.v_ch * scales.v_ch, scales)
}

/// Zero-sound branch just above the Fermi velocity.
///
/// With ε = 0 and r → 1⁻ the real equation reads
///   1 = (3C₁/(k²v_F²)) (1/r) [½ ln((1+r)/(1−r)) − r].
/// Setting 1/r ≈ 1 and ln(1+r) ≈ ln 2 gives ln(2/(1−r)) = (2/3)k²v_F²/C₁ + 2,
/// i.e. 1 − r = 2 exp(−(2/3)k²v_F²/C₁ − 2), and v_Φ = v_F/r ≈ v_F(1 + (1 − r)).
pub fn omega_zero_sound(k: f64, scales: &DerivedScales) -> f64 {
    let c1 = coefficient_c1(k, scales);
    let kv = k * scales.v_ch;
    let exponent = -2.0 / 3.0 * kv * kv / c1 - 2.0;
    kv * (1.0 + 2.0 * exponent.exp())
}

/// Positive root of ω⁴ − C₁ω² − k²(v_th^±)²C₁ = 0.
pub fn omega_weak_biquadratic(k: f64, scales: &DerivedScales) -> f64 {
    let c1 = coefficient_c1(k, scales);
    let kv2 = k * k * scales.v_th_sq;
    (0.5 * c1 + 0.5 * (c1 * c1 + 4.0 * kv2 * c1).sqrt()).sqrt()
}

/// ω² = Ω_p² + k²(v_th^±)² + ħ²k⁴/4m².
pub fn omega_weak_simple(k: f64, scales: &DerivedScales) -> f64 {
    three_term_omega(k, scales.v_th_sq, scales)
}

/// Closed-form ω of a non-exact branch.
pub fn closed_form_omega(branch: BranchId, k: f64, scales: &DerivedScales) -> Option<f64> {
    match branch {
        BranchId::QuantumLangmuir => Some(omega_quantum_langmuir(k, scales)),
        BranchId::C1Corrected => Some(omega_c1_corrected(k, scales)),
        BranchId::DegenerateBohmGross => Some(omega_degenerate_bohm_gross(k, scales)),
        BranchId::ZeroSound => Some(omega_zero_sound(k, scales)),
        BranchId::WeakBiquadratic => Some(omega_weak_biquadratic(k, scales)),
        BranchId::WeakSimple => Some(omega_weak_simple(k, scales)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_stats::{BohmTerm, SpeciesParams};
    use proptest::prelude::*;

    fn degenerate() -> DerivedScales {
        DerivedScales::new(&SpeciesParams::electron_gas(1e28, 0.0).unwrap()).unwrap()
    }

    fn weak(temperature: f64) -> DerivedScales {
        DerivedScales::new(&SpeciesParams::electron_gas(1e28, temperature).unwrap()).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn branch_names_round_trip() {
        for b in BranchId::ALL {
            assert_eq!(BranchId::from_name(b.name()), Some(b));
        }
        assert_eq!(BranchId::from_name("bohm_gross"), None);
    }

    #[test]
    fn branch_regime_checks() {
        let d = degenerate();
        let w = weak(5e4);
        assert!(BranchId::ZeroSound.check_compatible(&d).is_ok());
        assert!(BranchId::ZeroSound.check_compatible(&w).is_err());
        assert!(BranchId::WeakSimple.check_compatible(&d).is_err());
        assert!(BranchId::ExactQuadrature.check_compatible(&d).is_ok());
        assert!(BranchId::ExactQuadrature.check_compatible(&w).is_ok());
    }

    #[test]
    fn rate_coordinates_round_trip() {
        let rate = ComplexRate::from_r_epsilon(0.4, -0.03, 2e9, 1.2e6);
        assert!((rate.r(2e9, 1.2e6) - 0.4).abs() < 1e-15);
        assert!((rate.epsilon() + 0.03).abs() < 1e-15);
    }

    #[test]
    fn resonance_is_singular() {
        let d = degenerate();
        assert!(matches!(
            residual_degenerate(1.0, 0.0, 1e9, &d),
            Err(DisperseError::SingularInput(_))
        ));
        assert!(matches!(
            residual_degenerate(1.0, -0.0, 1e9, &d),
            Err(DisperseError::SingularInput(_))
        ));
        assert!(residual_degenerate(1.0, 1e-3, 1e9, &d).is_ok());
    }

    #[test]
    fn undamped_inside_sphere_has_zero_imaginary_part() {
        let d = degenerate();
        for r in [0.01, 0.1, 0.3, 0.6, 0.99] {
            let v = residual_degenerate(r, 0.0, 1e9, &d).unwrap();
            assert_eq!(v.imag_part, 0.0, "r = {r}");
            assert!(!v.region_flag);
        }
        let v = residual_degenerate(1.2, 0.0, 1e9, &d).unwrap();
        assert!(v.region_flag);
        assert!(v.imag_part.abs() > 1.0);
    }

    #[test]
    fn small_r_langmuir_root() {
        let d = degenerate();
        let k = 1e8;
        let omega = omega_quantum_langmuir(k, &d);
        let r = k * d.v_ch / omega;
        assert!(r < 0.05, "{r}");
        let v = residual_degenerate(r, 0.0, k, &d).unwrap();
        assert!(v.real_part.abs() < 1e-3, "{}", v.real_part);
        assert!((v.real_part + 0.6 * r * r).abs() < 0.1 * r * r);
    }

    #[test]
    fn series_and_logarithm_forms_meet() {
        // |ρ| = 0.25 is the switch; evaluate the log form just below it.
        for eps in [0.0, 0.05, -0.2] {
            let r = 0.25 * (1.0f64 + eps * eps).sqrt() * (1.0 - 1e-9);
            let (sre, sim) = degenerate_bracket(r, eps);
            let half = 0.5 * (2.0 * r * eps).atan2(1.0 + eps * eps - r * r);
            let log = 0.25 * (((1.0 - r).powi(2) + eps * eps) / ((1.0 + r).powi(2) + eps * eps)).ln();
            let lre = eps * half - log - r;
            let lim = half + eps * log;
            assert!((sre - lre).abs() < 1e-12 * lre.abs().max(1e-3), "{sre} {lre}");
            assert!((sim - lim).abs() < 1e-12, "{sim} {lim}");
        }
    }

    #[test]
    fn degenerate_forms_agree_with_quadrature() {
        let d = degenerate();
        let k = 3e9;
        for (r, eps) in [(0.3, 0.0), (0.7, 0.0), (0.5, -0.2), (1.3, 0.05), (0.9, 0.3), (1.5, -0.1)] {
            let rate = ComplexRate::from_r_epsilon(r, eps, k, d.v_ch);
            let closed = degenerate_dispersion_function(r, eps, k, &d).unwrap();
            let quad = residual_quadrature(k, rate.s(), &d).unwrap();
            let (c, q) = (closed - 1.0, quad - 1.0);
            assert!(rel(c, q) < 1e-9, "r={r} eps={eps}: {closed} vs {quad}");
        }
    }

    #[test]
    fn weak_series_agrees_with_quadrature() {
        let w = weak(5e4);
        let alpha = w.fugacity;
        assert!(alpha < 1.0);
        let k = 0.3 * w.omega_p / w.species.gaussian_velocity();
        for (eta, omega) in [(0.0, 1.1), (-0.02, 1.05), (0.05, 0.8), (-0.3, 0.4), (-0.1, -1.1)] {
            let s = Complex64::new(eta, omega) * w.omega_p;
            let series = weak_dispersion_function(k, s, &w).unwrap();
            let quad = residual_quadrature(k, s, &w).unwrap();
            assert!(rel(series - 1.0, quad - 1.0) < 1e-8, "{eta} {omega}: {series} {quad}");
        }
    }

    #[test]
    fn weak_series_agrees_with_quadrature_for_bosons() {
        use crate::constants::ELECTRON_MASS;
        let sp = SpeciesParams::new(4.0 * ELECTRON_MASS, 0.0, 1, 1e26, 300.0, Statistics::Bose).unwrap();
        let w = DerivedScales::new(&sp).unwrap();
        let k = 1e8;
        let unit = w.frequency_unit(k);
        for (eta, omega) in [(0.0, 1.3), (-0.1, 1.2), (0.2, 0.5)] {
            let s = Complex64::new(eta, omega) * unit;
            let series = weak_dispersion_function(k, s, &w).unwrap();
            let quad = residual_quadrature(k, s, &w).unwrap();
            assert!(rel(series - 1.0, quad - 1.0) < 1e-8, "{series} {quad}");
        }
    }

    #[test]
    fn weak_requires_alpha_below_one() {
        let d = degenerate();
        assert!(matches!(
            residual_weak(1e9, Complex64::new(0.0, 1e16), &d),
            Err(DisperseError::IncompatibleBranch { .. })
        ));
    }

    #[test]
    fn closed_forms_order() {
        let d = degenerate();
        for k in [1e8, 1e9, 5e9, 2e10] {
            let l = omega_quantum_langmuir(k, &d);
            let c = omega_c1_corrected(k, &d);
            let b = omega_degenerate_bohm_gross(k, &d);
            assert!(c > l && b > l, "{k}");
            assert!(omega_zero_sound(k, &d) >= k * d.v_ch);
        }
        let w = weak(5e4);
        let k = 1e9;
        assert!(omega_weak_biquadratic(k, &w) > omega_quantum_langmuir(k, &w));
    }

    #[test]
    fn bohm_gross_forms_coincide_bitwise() {
        let d = degenerate();
        let matched = d.with_thermal_velocity_sq(0.6 * d.v_ch * d.v_ch);
        for k in [1e7, 3.3e8, 1e9, 7.7e9, 4e10] {
            assert_eq!(
                omega_degenerate_bohm_gross(k, &d).to_bits(),
                omega_weak_simple(k, &matched).to_bits()
            );
        }
    }

    #[test]
    fn neutral_gas_limits() {
        let sp = SpeciesParams::electron_gas(1e28, 0.0).unwrap().with_charge(0.0);
        let off = DerivedScales::with_bohm(&sp, BohmTerm::Off).unwrap();
        assert_eq!(omega_quantum_langmuir(1e9, &off), 0.0);
        assert_eq!(omega_zero_sound(1e9, &off), 1e9 * off.v_ch);
        let on = DerivedScales::new(&sp).unwrap();
        let ratio = |k: f64| omega_zero_sound(k, &on) / (k * on.v_ch);
        let (hi, lo) = (ratio(1.2e10), ratio(8e9));
        assert!(hi > lo && lo > 1.0 && hi < 1.2, "{hi} {lo}");
        assert_eq!(ratio(1e9), 1.0);
    }

    proptest! {
        #[test]
        fn weak_residual_conjugate_symmetry(eta in -0.5f64..0.5, omega in 0.05f64..3.0, kx in 0.05f64..0.6) {
            let w = weak(5e4);
            let k = kx * w.omega_p / w.species.gaussian_velocity();
            let s = Complex64::new(eta, omega) * w.omega_p;
            let a = residual_weak(k, s, &w).unwrap();
            let b = residual_weak(k, s.conj(), &w).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn bracket_parity_in_epsilon(r in 0.05f64..3.0, eps in 1e-6f64..1.0) {
            // Without the step terms the real part is even in ε and the
            // imaginary part odd.
            prop_assume!((r - 1.0).abs() > 1e-9);
            let (re_p, im_p) = degenerate_bracket(r, eps);
            let (re_m, im_m) = degenerate_bracket(r, -eps);
            prop_assert!((re_p - re_m).abs() <= 1e-14 * re_p.abs().max(1.0));
            prop_assert!((im_p + im_m).abs() <= 1e-14 * im_p.abs().max(1.0));
        }

        #[test]
        fn closed_forms_increase_with_k(k in 1e7f64..5e10, factor in 1.001f64..3.0) {
            let d = degenerate();
            let w = weak(5e4);
            for f in [omega_quantum_langmuir, omega_c1_corrected, omega_degenerate_bohm_gross, omega_zero_sound] {
                prop_assert!(f(k * factor, &d) > f(k, &d));
            }
            for f in [omega_weak_biquadratic, omega_weak_simple] {
                prop_assert!(f(k * factor, &w) > f(k, &w));
            }
        }
    }
}
