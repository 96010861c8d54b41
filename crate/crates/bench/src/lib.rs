//! Fixtures shared by the criterion benches.

use disperse_core::{DerivedScales, SpeciesParams, Statistics};

/// Weakly degenerate electron gas at metallic density.
pub fn weak_electrons() -> DerivedScales {
    let species = SpeciesParams::new(
        disperse_core::constants::ELECTRON_MASS,
        -disperse_core::constants::ELEMENTARY_CHARGE,
        2,
        1e28,
        5.0e4,
        Statistics::Fermi,
    )
    .expect("valid species");
    DerivedScales::new(&species).expect("weak regime")
}

/// Fully degenerate electron gas.
pub fn degenerate_electrons() -> DerivedScales {
    let species = SpeciesParams::electron_gas(1e28, 0.0).expect("valid species");
    DerivedScales::new(&species).expect("degenerate regime")
}
