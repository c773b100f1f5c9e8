//! Error type shared by the numerical modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unsupported spin quantum number {0} (supported: 1/2 and 1)")]
    UnsupportedSpin(f64),

    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("matrix is not Hermitian: max |H - H'| = {deviation:e} exceeds {limit:e}")]
    NotHermitian { deviation: f64, limit: f64 },

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    EighNoConvergence { sweeps: usize },

    #[error("sweep grid must satisfy b_start < b_stop and n_points >= 2")]
    InvalidGrid,

    #[error(
        "ambiguous branch assignment at sweep step {step}: best overlap {overlap:.3} < 0.5 \
         (grid too coarse)"
    )]
    AmbiguousTracking { step: usize, overlap: f64 },

    #[error("defect axis is {angle_deg:.1} deg from the field direction (limit 20 deg)")]
    AxisMisaligned { angle_deg: f64 },

    #[error("no gap minimum found in [{lo} T, {hi} T]")]
    NoMinimumInRange { lo: f64, hi: f64 },

    #[error("fixed-point iteration did not converge (last iterate P_z,P1={p_z_p1}, P_z,NV={p_z_nv})")]
    NonConvergence { p_z_p1: f64, p_z_nv: f64 },

    #[error("rate ratio is zero: damping ratio carries no polarization information")]
    NotInvertible,

    #[error("reflection data spans {span:e} rad/s but {required:e} rad/s is required")]
    SpanTooNarrow { span: f64, required: f64 },

    #[error("need at least {need} data points, got {got}")]
    TooFewPoints { got: usize, need: usize },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
