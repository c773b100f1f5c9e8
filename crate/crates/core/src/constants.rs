//! Physical constants (CODATA 2018) and the electron gyromagnetic ratio
//! used throughout, in SI units.

use std::f64::consts::TAU;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant, J s.
pub const H: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Vacuum permeability, N/A^2.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Electron spin gyromagnetic ratio, rad/s per tesla (28.03 GHz/T).
pub const GAMMA_E: f64 = TAU * 28.03e9;
