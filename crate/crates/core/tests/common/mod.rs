//! Shared helpers for the integration suites.

use std::f64::consts::TAU;
use std::path::PathBuf;

use diamond_odmr::fitting::ResonancePoint;
use diamond_odmr::hamiltonians::{defect_axes, field_in_defect_frame, nv_hamiltonian, FieldConfig};
use diamond_odmr::linalg::eigh;
use diamond_odmr::spectra::DefectParams;

/// Fresh per-test scratch directory under the system temp dir.
pub fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diamond-odmr-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir
}

/// Deterministic xorshift64* stream in [0, 1).
pub struct TestRng(u64);

#[allow(dead_code)] // not every suite draws random numbers
impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).max(1))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u = self.uniform().max(f64::MIN_POSITIVE);
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
    }
}

/// Noiseless points on the NV 0 -> -1 and 0 -> +1 lines of all four axes.
pub fn synthetic_nv_points(
    params: &DefectParams,
    theta_deg: f64,
    phi_deg: f64,
    b_values: &[f64],
) -> Vec<ResonancePoint> {
    let mut points = Vec::new();
    for &b in b_values {
        let cfg = FieldConfig::new(b, theta_deg, phi_deg);
        for axis in defect_axes() {
            let b_defect = field_in_defect_frame(&cfg, &axis).expect("unit axis");
            let levels = eigh(&nv_hamiltonian(&params.nv, &b_defect))
                .expect("hermitian")
                .values;
            points.push(ResonancePoint::new(b, (levels[1] - levels[0]) / TAU));
            points.push(ResonancePoint::new(b, (levels[2] - levels[0]) / TAU));
        }
    }
    points
}
