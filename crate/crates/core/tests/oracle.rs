use disperse_core::dispersion::BranchId;
use disperse_core::oracle::{evolve_mode, fit_omega_eta, OracleConfig};
use disperse_core::solver::{solve_dominant, SolverConfig};
use disperse_core::{BohmTerm, DerivedScales, InitShape, SpeciesParams};

fn warm_electrons(bohm: BohmTerm) -> (SpeciesParams, DerivedScales) {
    let sp = SpeciesParams::electron_gas(1e28, 5e4).unwrap();
    let s = DerivedScales::with_bohm(&sp, bohm).unwrap();
    (sp, s)
}

#[test]
fn velocity_grid_refinement_is_converged() {
    let (_, s) = warm_electrons(BohmTerm::On);
    let k = 0.4 * s.omega_p / s.v_th_sq.sqrt();
    let fine = fit_omega_eta(&evolve_mode(k, &s, &OracleConfig::default()).unwrap()).unwrap();
    let coarse_cfg = OracleConfig { n_v: 2048, ..Default::default() };
    let coarse = fit_omega_eta(&evolve_mode(k, &s, &coarse_cfg).unwrap()).unwrap();
    assert!((coarse.omega / fine.omega - 1.0).abs() < 5e-3);
    assert!((coarse.eta - fine.eta).abs() < 5e-3 * fine.omega);
}

#[test]
fn quantum_term_oracle_tracks_weak_solver() {
    let (_, s) = warm_electrons(BohmTerm::On);
    let k = 0.35 * s.omega_p / s.v_th_sq.sqrt();
    let root = solve_dominant(k, BranchId::ExactWeak, &s, &SolverConfig::default()).unwrap();
    let fit = fit_omega_eta(&evolve_mode(k, &s, &OracleConfig::default()).unwrap()).unwrap();
    assert!((fit.omega / root.omega() - 1.0).abs() < 0.02, "{} {}", fit.omega, root.omega());
}

#[test]
fn initial_shape_does_not_move_the_mode() {
    let (_, s) = warm_electrons(BohmTerm::On);
    let k = 0.4 * s.omega_p / s.v_th_sq.sqrt();
    let a = fit_omega_eta(&evolve_mode(k, &s, &OracleConfig::default()).unwrap()).unwrap();
    let cfg = OracleConfig { init_shape: InitShape::MaxwellianShaped, ..Default::default() };
    let b = fit_omega_eta(&evolve_mode(k, &s, &cfg).unwrap()).unwrap();
    assert!((a.omega / b.omega - 1.0).abs() < 1e-3);
}

#[test]
fn oracle_runs_are_deterministic() {
    let (_, s) = warm_electrons(BohmTerm::Off);
    let k = 0.3 * s.omega_p / s.v_th_sq.sqrt();
    let cfg = OracleConfig { n_v: 1024, t_end: 30.0, ..Default::default() };
    let a = evolve_mode(k, &s, &cfg).unwrap();
    let b = evolve_mode(k, &s, &cfg).unwrap();
    assert_eq!(a.density, b.density);
}
