//! Magnetic-resonance modeling for NV and P1 defects in diamond.
//!
//! The crate computes resonance-line families of the NV ground-state
//! triplet (optionally hyperfine-coupled to a nearest-neighbor carbon-13),
//! and of the P1 nitrogen defect, over magnetic-field sweeps; renders
//! synthetic ODMR maps; fits the sample orientation from measured
//! resonance points; solves the coupled NV/P1 polarization rate equations;
//! and models cavity reflection for cavity-based detection of magnetic
//! resonance, including the inversion from the measured damping ratio back
//! to a spin polarization.
//!
//! The `diamond-odmr` binary exposes all of it behind a reproducible
//! config-file driven CLI; see the crate README.

// 3x3 tensor algebra reads better with explicit indices; negated
// comparisons keep NaN parameters from slipping through validation.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod cli;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod hamiltonians;
pub mod linalg;
pub mod odmr;
pub mod simplex;
pub mod spectra;

pub use error::{Error, Result};
