//! Longitudinal waves in charged quantum gases with a Bohm quantum force.
//!
//! The crate evaluates the kinetic dispersion relation of a Fermi–Dirac or
//! Bose–Einstein gas, finds its complex roots s = η + iω as functions of the
//! wavenumber, and cross-checks them against a direct time integration of the
//! linearized kinetic equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dispersion;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod quantum_stats;
pub mod solver;

pub use dispersion::{BranchId, ComplexRate, ResidualValue};
pub use error::{DisperseError, Result};
pub use oracle::{InitShape, OracleConfig, OracleFit, OracleRun};
pub use quantum_stats::{BohmTerm, DerivedScales, Regime, SpeciesParams, Statistics};
pub use solver::{DispersionResult, SolverConfig};
