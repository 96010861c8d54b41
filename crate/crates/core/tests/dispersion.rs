use disperse_core::constants::{ELECTRON_MASS, HBAR};
use disperse_core::dispersion::*;
use disperse_core::quantum_stats::{scaled_erfc_minus_one, zeta_pm};
use disperse_core::{BohmTerm, DerivedScales, SpeciesParams, Statistics};
use num_complex::Complex64;
use proptest::prelude::*;

fn degenerate() -> DerivedScales {
    DerivedScales::new(&SpeciesParams::electron_gas(1e28, 0.0).unwrap()).unwrap()
}

fn weak_fermions() -> DerivedScales {
    DerivedScales::new(&SpeciesParams::electron_gas(1e28, 5e4).unwrap()).unwrap()
}

fn weak_bosons() -> DerivedScales {
    let sp = SpeciesParams::new(2.0 * ELECTRON_MASS, -3.2e-19, 1, 1e28, 3e4, Statistics::Bose).unwrap();
    DerivedScales::new(&sp).unwrap()
}

#[test]
fn c1_limits() {
    let sp = SpeciesParams::electron_gas(1e28, 0.0).unwrap();
    let off = DerivedScales::with_bohm(&sp, BohmTerm::Off).unwrap();
    assert_eq!(coefficient_c1(3.7e9, &off), off.omega_p * off.omega_p);
    let neutral = DerivedScales::new(&sp.with_charge(0.0)).unwrap();
    let k: f64 = 2e10;
    let lambda = HBAR * HBAR / (4.0 * ELECTRON_MASS * ELECTRON_MASS);
    assert!((coefficient_c1(k, &neutral) / (lambda * k.powi(4)) - 1.0).abs() < 1e-15);
}

#[test]
fn c1_by_hand_at_inverse_screening_length() {
    // n0 = 1e28: Ω_p = 5.6415e15 rad/s, v_F = ħ(3π²n0)^{1/3}/m = 7.7160e5 m/s,
    // k = Ω_p/v_F = 7.3113e9 rad/m, ħ²k⁴/4m² = 9.5742e30 (rad/s)².
    let d = degenerate();
    let k = d.omega_p / d.v_ch;
    let c1 = coefficient_c1(k, &d);
    let expected = 5.6415e15f64.powi(2) + 9.5742e30;
    assert!((c1 / expected - 1.0).abs() < 1e-3, "{c1:e} {expected:e}");
}

#[test]
fn undamped_degenerate_quadrature_matches_closed_form() {
    let d = degenerate();
    for (r, kx) in [(0.1, 0.2), (0.5, 1.0), (0.9, 2.5), (0.99, 0.7)] {
        let k = kx * d.omega_p / d.v_ch;
        let rate = ComplexRate::from_r_epsilon(r, 0.0, k, d.v_ch);
        let closed = residual_degenerate(r, 0.0, k, &d).unwrap();
        let quad = residual_quadrature(k, rate.s(), &d).unwrap();
        assert!((quad.re - closed.real_part).abs() < 1e-7 * closed.real_part.abs().max(1.0));
        assert_eq!(quad.im, 0.0);
    }
}

#[test]
fn real_positive_s_gives_real_residual() {
    let d = degenerate();
    let w = weak_fermions();
    for (scales, k) in [(&d, 1e9), (&w, 2e9)] {
        let s = Complex64::new(0.7 * scales.omega_p, 0.0);
        let value = residual_quadrature(k, s, scales).unwrap();
        assert!(value.im.abs() < 1e-12 * value.re.abs().max(1.0), "{value}");
    }
}

#[test]
fn weak_series_reduces_to_one_term_for_small_fugacity() {
    let sp = SpeciesParams::electron_gas(1e18, 1e5).unwrap();
    let w = DerivedScales::new(&sp).unwrap();
    assert!(w.fugacity < 1e-7);
    let vt = sp.gaussian_velocity();
    let k = 0.3 * w.omega_p / vt;
    let s = Complex64::new(0.05, 1.2) * w.omega_p;
    let theta = s / (k * vt);
    let one_term = coefficient_c1(k, &w) / (k * k) * std::f64::consts::PI.sqrt() * vt * w.fugacity
        * scaled_erfc_minus_one(theta)
        / (2.0 / 3.0 * w.v_ch.powi(3))
        - 1.0;
    let full = residual_weak(k, s, &w).unwrap();
    assert!((full - one_term).norm() < 1e-6 * full.norm(), "{full} {one_term}");
}

#[test]
fn bohm_gross_root_nearly_solves_weak_residual() {
    let w = weak_fermions();
    let vt = w.v_th_sq.sqrt();
    let k = 0.05 * w.omega_p / vt;
    let s = Complex64::new(0.0, omega_weak_simple(k, &w));
    let theta = s / (k * w.species.gaussian_velocity());
    assert!(theta.norm() > 10.0);
    assert!(residual_weak(k, s, &w).unwrap().norm() < 5e-2);
}

#[test]
fn zero_sound_back_substitution() {
    let d = DerivedScales::new(&SpeciesParams::electron_gas(1e28, 0.0).unwrap().with_charge(0.0)).unwrap();
    let m = ELECTRON_MASS;
    let k = 2.0 * m * d.v_ch / (HBAR * 3.0);
    let r = k * d.v_ch / omega_zero_sound(k, &d);
    assert!(r < 1.0 && r > 0.99);
    assert!(residual_degenerate(r, 0.0, k, &d).unwrap().real_part.abs() < 1e-2);
}

#[test]
fn density_normalization_of_weak_residual() {
    // The series residual and the quadrature residual only coincide when the
    // fugacity reproduces the density; check that link explicitly.
    let w = weak_fermions();
    let zeta = zeta_pm(1.5, w.fugacity, Statistics::Fermi).unwrap();
    assert!((zeta / w.species.degeneracy_target() - 1.0).abs() < 1e-10);
}

proptest! {
    #[test]
    fn quadrature_conjugate_symmetry(eta in -0.4f64..0.4, omega in 0.1f64..3.0, kx in 0.1f64..2.0, which in 0usize..3) {
        let scales = [degenerate(), weak_fermions(), weak_bosons()][which];
        let k = kx * scales.omega_p / scales.velocity_unit();
        let s = Complex64::new(eta, omega) * scales.omega_p;
        let a = residual_quadrature(k, s, &scales).unwrap();
        let b = residual_quadrature(k, s.conj(), &scales).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn inside_sphere_imaginary_part_is_exactly_zero(r in 1e-4f64..0.9999, kx in 0.01f64..5.0) {
        let d = degenerate();
        let k = kx * d.omega_p / d.v_ch;
        let v = residual_degenerate(r, 0.0, k, &d).unwrap();
        prop_assert!(!v.region_flag);
        prop_assert_eq!(v.imag_part, 0.0);
    }

    #[test]
    fn region_flag_follows_the_unit_circle(r in 0.01f64..3.0, eps in -2.0f64..2.0) {
        prop_assume!((r - 1.0).abs() > 1e-9 || eps != 0.0);
        let v = residual_degenerate(r, eps, 1e9, &degenerate()).unwrap();
        prop_assert_eq!(v.region_flag, r * r + eps * eps >= 1.0);
    }

    #[test]
    fn closed_forms_monotone_on_charged_range(a in 1e-3f64..3.0, b in 1e-3f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let d = degenerate();
        let w = weak_fermions();
        for scales in [&d, &w] {
            let unit = scales.omega_p / scales.v_ch;
            let fs: [fn(f64, &DerivedScales) -> f64; 6] = [
                omega_quantum_langmuir,
                omega_c1_corrected,
                omega_degenerate_bohm_gross,
                omega_zero_sound,
                omega_weak_biquadratic,
                omega_weak_simple,
            ];
            for f in fs {
                prop_assert!(f(hi * unit, scales) >= f(lo * unit, scales));
            }
        }
    }
}
