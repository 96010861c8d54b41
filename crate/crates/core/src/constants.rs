//! CODATA 2018 values, SI units.

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_813e-12;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_702e-31;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
