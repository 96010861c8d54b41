//! Species description, derived physical scales and quantum statistics.

mod erfc;
mod zeta;

pub use erfc::{faddeeva_upper, scaled_erfc, scaled_erfc_minus_one};
pub(crate) use erfc::reflected_scaled_erfc_minus_one;
pub use zeta::{riemann_zeta, zeta_pm, zeta_pm_series, SeriesSum, SERIES_TOL};

use crate::constants::{BOLTZMANN, EPSILON_0, HBAR, PLANCK};
use crate::error::{DisperseError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Fermi,
    Bose,
}

impl Statistics {
    /// +1 for fermions, −1 for bosons: the sign in the occupation
    /// 1/(α⁻¹e^x ± 1).
    pub fn occupation_sign(self) -> f64 {
        match self {
            Statistics::Fermi => 1.0,
            Statistics::Bose => -1.0,
        }
    }
}

/// Physical description of a single-species gas, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesParams {
    mass: f64,
    charge: f64,
    spin_degeneracy: u32,
    density: f64,
    temperature: f64,
    statistics: Statistics,
    degenerate_limit: bool,
}

impl SpeciesParams {
    pub fn new(
        mass: f64,
        charge: f64,
        spin_degeneracy: u32,
        density: f64,
        temperature: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        let invalid = |field, reason: &str| DisperseError::InvalidSpecies {
            field,
            reason: reason.to_string(),
        };
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(invalid("mass", "must be positive and finite"));
        }
        if !charge.is_finite() {
            return Err(invalid("charge", "must be finite"));
        }
        if spin_degeneracy < 1 {
            return Err(invalid("spin_degeneracy", "must be at least 1"));
        }
        if !(density > 0.0) || !density.is_finite() {
            return Err(invalid("density", "must be positive and finite"));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(invalid("temperature", "must be non-negative and finite"));
        }
        if temperature == 0.0 && statistics == Statistics::Bose {
            return Err(invalid(
                "temperature",
                "T = 0 is only permitted for fermions (bosons would be condensed)",
            ));
        }
        Ok(Self {
            mass,
            charge,
            spin_degeneracy,
            density,
            temperature,
            statistics,
            degenerate_limit: temperature == 0.0,
        })
    }

    /// Electrons (γ = 2) at the given density and temperature.
    pub fn electron_gas(density: f64, temperature: f64) -> Result<Self> {
        Self::new(
            crate::constants::ELECTRON_MASS,
            -crate::constants::ELEMENTARY_CHARGE,
            2,
            density,
            temperature,
            Statistics::Fermi,
        )
    }

    /// Treat a Fermi gas in the T → 0 limit regardless of its temperature.
    pub fn with_degenerate_limit(mut self, on: bool) -> Result<Self> {
        if on && self.statistics != Statistics::Fermi {
            return Err(DisperseError::InvalidSpecies {
                field: "degenerate_limit",
                reason: "the fully degenerate limit applies to fermions only".into(),
            });
        }
        self.degenerate_limit = on || self.temperature == 0.0;
        Ok(self)
    }

    pub fn with_charge(mut self, charge: f64) -> Self {
        self.charge = charge;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn charge(&self) -> f64 {
        self.charge
    }
    pub fn spin_degeneracy(&self) -> u32 {
        self.spin_degeneracy
    }
    pub fn density(&self) -> f64 {
        self.density
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
    pub fn degenerate_limit(&self) -> bool {
        self.degenerate_limit
    }

    /// Phase-space prefactor γ m³/h³.
    pub fn phase_space_weight(&self) -> f64 {
        self.spin_degeneracy as f64 * (self.mass / PLANCK).powi(3)
    }

    /// √(2 K_B T / m), the Gaussian width of the Boltzmann factor in velocity.
    pub fn gaussian_velocity(&self) -> f64 {
        (2.0 * BOLTZMANN * self.temperature / self.mass).sqrt()
    }

    /// Right-hand side of ζ_{3/2}^±(α) = (n0/γ) h³ / (2π m K_B T)^{3/2}.
    pub fn degeneracy_target(&self) -> f64 {
        let thermal = 2.0 * PI * self.mass * BOLTZMANN * self.temperature;
        self.density / self.spin_degeneracy as f64 * PLANCK.powi(3) / thermal.powf(1.5)
    }
}

/// Plasma frequency √(q² n0 / (m ε0)), rad/s; zero for a neutral gas.
pub fn plasma_frequency(species: &SpeciesParams) -> f64 {
    (species.charge * species.charge * species.density / (species.mass * EPSILON_0)).sqrt()
}

/// (3 n0 h³ / (4π γ m³))^{1/3}, m/s; the Fermi velocity for fermions.
pub fn characteristic_velocity(species: &SpeciesParams) -> f64 {
    (3.0 * species.density / (4.0 * PI * species.phase_space_weight())).cbrt()
}

/// Outcome of the fugacity inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fugacity {
    pub alpha: f64,
    /// Boson target sitting exactly on ζ(3/2): α = 1 is a boundary value.
    pub at_critical: bool,
    pub iterations: usize,
}

/// Solve ζ_{3/2}^±(α) = (n0/γ) h³/(2π m K_B T)^{3/2} for α by bisection.
pub fn fugacity_from_density(species: &SpeciesParams) -> Result<Fugacity> {
    if species.temperature <= 0.0 {
        return Err(DisperseError::InvalidSpecies {
            field: "temperature",
            reason: "the fugacity is only defined for T > 0".into(),
        });
    }
    fugacity_for_target(species.degeneracy_target(), species.statistics)
}

/// Bisection on ζ_{3/2}^±(α) = target, α in (0, 1].
pub fn fugacity_for_target(target: f64, statistics: Statistics) -> Result<Fugacity> {
    const REL_TOL: f64 = 1e-12;
    if !(target > 0.0) || !target.is_finite() {
        return Err(DisperseError::InvalidArgument {
            field: "target",
            reason: format!("degeneracy target must be positive, got {target}"),
        });
    }
    let limit = zeta_pm(1.5, 1.0, statistics)?;
    match statistics {
        Statistics::Bose => {
            if (target - limit).abs() <= REL_TOL * target {
                return Ok(Fugacity {
                    alpha: 1.0,
                    at_critical: true,
                    iterations: 0,
                });
            }
            if target > limit {
                return Err(DisperseError::DegeneracyOutOfRange {
                    target,
                    limit,
                    bound: "condensation bound (T below T_c)",
                });
            }
        }
        Statistics::Fermi => {
            if target >= limit {
                return Err(DisperseError::DegeneracyOutOfRange {
                    target,
                    limit,
                    bound: "alpha >= 1 (use the fully degenerate limit)",
                });
            }
        }
    }
    // ζ_{3/2}^± is increasing in α, so the root is unique in (0, 1).
    let f = |a: f64| zeta_pm(1.5, a, statistics).map(|z| z - target);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    let mut iterations = 0;
    for it in 1..=200 {
        iterations = it;
        mid = 0.5 * (lo + hi);
        let value = f(mid)?;
        if value.abs() < REL_TOL * target || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if value > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Fugacity {
        alpha: mid,
        at_critical: false,
        iterations,
    })
}

/// (3 K_B T/m) ζ_{5/2}^±(α)/ζ_{3/2}^±(α), m²/s².
pub fn thermal_velocity_sq(species: &SpeciesParams, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(DisperseError::InvalidArgument {
            field: "alpha",
            reason: format!("must lie in (0, 1], got {alpha}"),
        });
    }
    let z52 = zeta_pm(2.5, alpha, species.statistics)?;
    let z32 = zeta_pm(1.5, alpha, species.statistics)?;
    Ok(3.0 * BOLTZMANN * species.temperature / species.mass * z52 / z32)
}

/// Occupation 1/(α⁻¹ e^x ± 1), written to stay finite for large |x|.
fn occupation(x: f64, alpha: f64, statistics: Statistics) -> f64 {
    let sign = statistics.occupation_sign();
    let e = alpha * (-x).exp();
    e / (1.0 + sign * e)
}

/// df_z/dw for the Fermi–Dirac / Bose–Einstein equilibrium reduced to one
/// velocity component: −2π w γ (m³/h³) / (α⁻¹ e^{m w²/2K_BT} ± 1).
pub fn reduced_fz_derivative(w: f64, species: &SpeciesParams, alpha: f64) -> f64 {
    let vt = species.gaussian_velocity();
    let x = (w / vt).powi(2);
    -2.0 * PI * w * species.phase_space_weight() * occupation(x, alpha, species.statistics)
}

/// Analytic continuation of [`reduced_fz_derivative`] to complex velocity.
pub(crate) fn reduced_fz_derivative_complex(
    w: Complex64,
    species: &SpeciesParams,
    alpha: f64,
) -> Complex64 {
    let vt = species.gaussian_velocity();
    let x = (w / vt).powi(2);
    let sign = species.statistics.occupation_sign();
    let occ = if x.re >= 0.0 {
        let e = alpha * (-x).exp();
        e / (1.0 + sign * e)
    } else {
        1.0 / (x.exp() / alpha + sign)
    };
    -2.0 * PI * w * species.phase_space_weight() * occ
}

/// The reduced equilibrium f_z(w) = π γ (m³/h³) v_t² · {ln(1 + αe^{−w²/v_t²}) or −ln(1 − αe^{−w²/v_t²})}.
pub fn reduced_fz(w: f64, species: &SpeciesParams, alpha: f64) -> f64 {
    let vt = species.gaussian_velocity();
    let x = alpha * (-(w / vt).powi(2)).exp();
    let log = match species.statistics {
        Statistics::Fermi => x.ln_1p(),
        Statistics::Bose => -(-x).ln_1p(),
    };
    PI * species.phase_space_weight() * vt * vt * log
}

/// Fully degenerate df_z/dv_z = −2π γ (m³/h³) v_z U(v_F² − v_z²), U(0) = 1.
pub fn degenerate_fz_derivative(v_z: f64, species: &SpeciesParams) -> f64 {
    let v_f = characteristic_velocity(species);
    if v_z * v_z <= v_f * v_f {
        -2.0 * PI * species.phase_space_weight() * v_z
    } else {
        0.0
    }
}

/// Fully degenerate reduced distribution π γ (m³/h³)(v_F² − v_z²)₊.
pub fn degenerate_fz(v_z: f64, species: &SpeciesParams) -> f64 {
    let v_f = characteristic_velocity(species);
    PI * species.phase_space_weight() * (v_f * v_f - v_z * v_z).max(0.0)
}

/// Whether the Bohm quantum force term ħ²k⁴/4m² is included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BohmTerm {
    #[default]
    On,
    Off,
}

impl BohmTerm {
    pub fn factor(self) -> f64 {
        match self {
            BohmTerm::On => 1.0,
            BohmTerm::Off => 0.0,
        }
    }
}

/// Which equilibrium the dispersion residuals integrate over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// T → 0 Fermi sphere.
    FullyDegenerate,
    /// α < 1: weakly degenerate fermions or bosons above T_c.
    Weak { alpha: f64 },
}

/// Quantities derived once per species and reused by every residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub species: SpeciesParams,
    pub regime: Regime,
    /// Ω_p, rad/s.
    pub omega_p: f64,
    /// v_ch (= v_F for fermions), m/s.
    pub v_ch: f64,
    /// α; 1 is used as bookkeeping for the fully degenerate limit.
    pub fugacity: f64,
    /// (v_th^±)², m²/s²; zero in the fully degenerate limit.
    pub v_th_sq: f64,
    /// Coefficient of k⁴ in C₁: ħ²/(4m²) times the Bohm-term switch, m⁴/s².
    pub lambda_quantum: f64,
    pub bohm: BohmTerm,
}

impl DerivedScales {
    pub fn new(species: &SpeciesParams) -> Result<Self> {
        Self::with_bohm(species, BohmTerm::On)
    }

    pub fn with_bohm(species: &SpeciesParams, bohm: BohmTerm) -> Result<Self> {
        let omega_p = plasma_frequency(species);
        let v_ch = characteristic_velocity(species);
        let lambda_quantum = bohm.factor() * HBAR * HBAR / (4.0 * species.mass * species.mass);
        let (regime, fugacity, v_th_sq) =
            if species.statistics == Statistics::Fermi && species.degenerate_limit {
                (Regime::FullyDegenerate, 1.0, 0.0)
            } else {
                let fug = fugacity_from_density(species)?;
                if fug.at_critical {
                    return Err(DisperseError::DegeneracyOutOfRange {
                        target: species.degeneracy_target(),
                        limit: zeta_pm(1.5, 1.0, Statistics::Bose)?,
                        bound: "condensation bound (T at T_c)",
                    });
                }
                let v2 = thermal_velocity_sq(species, fug.alpha)?;
                (Regime::Weak { alpha: fug.alpha }, fug.alpha, v2)
            };
        Ok(Self {
            species: *species,
            regime,
            omega_p,
            v_ch,
            fugacity,
            v_th_sq,
            lambda_quantum,
            bohm,
        })
    }

    /// Replace (v_th^±)²; used to compare the weak and degenerate closed forms.
    pub fn with_thermal_velocity_sq(mut self, v_th_sq: f64) -> Self {
        self.v_th_sq = v_th_sq;
        self
    }

    pub fn is_fully_degenerate(&self) -> bool {
        matches!(self.regime, Regime::FullyDegenerate)
    }

    /// Frequency unit of the internal dimensionless variables: Ω_p for a
    /// charged gas, k·v_ch for a neutral one.
    pub fn frequency_unit(&self, k: f64) -> f64 {
        if self.omega_p > 0.0 {
            self.omega_p
        } else {
            k.abs() * self.v_ch
        }
    }

    /// max(v_ch, v_th), the velocity that sets grid extents.
    pub fn velocity_unit(&self) -> f64 {
        self.v_ch.max(self.v_th_sq.sqrt())
    }
}
