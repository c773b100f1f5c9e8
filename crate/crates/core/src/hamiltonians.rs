//! Spin Hamiltonians of the diamond defects, in angular frequency units.
//!
//! Three builders are provided, all returning Hermitian matrices with
//! entries in rad/s:
//!
//! * NV ground-state triplet (3x3):
//!   `H = D Sz^2 - gamma_e B.S + (E/2)(S+^2 + S-^2)`
//! * NV plus nearest-neighbor carbon-13 (6x6): the NV term extended by
//!   `S . A_C . I` with an axially symmetric hyperfine tensor expressed
//!   along the vacancy-carbon axis,
//! * P1 nitrogen defect (6x6, electron spin 1/2 times nitrogen spin 1):
//!   `H = gamma_e B.S + gamma_n B.I + Q Iz^2 + S . A_P1 . I`.
//!
//! The builders take the magnetic field already expressed in the defect
//! frame (z along the defect axis); [`field_in_defect_frame`] performs
//! that rotation from the crystal cubic frame. The P1 Zeeman terms are
//! generalized to full vectors so misaligned fields are representable;
//! for a field along z they reduce to the z-only scalar form.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{axis_to_z_rotation, eigh, kron, spin_operators, ComplexMatrix, Rotation3, Vec3};

/// NV ground-state triplet parameters, angular frequencies.
#[derive(Debug, Clone, Copy)]
pub struct NvParams {
    /// Zero-field splitting (rad/s).
    pub d: f64,
    /// Strain-induced splitting (rad/s).
    pub e: f64,
    /// Electron gyromagnetic ratio (rad/s per tesla).
    pub gamma_e: f64,
    /// Azimuth of the strain axes in the defect frame (radians).
    pub strain_azimuth: f64,
}

impl Default for NvParams {
    fn default() -> Self {
        Self {
            d: TAU * 2.88e9,
            e: TAU * 10.0e6,
            gamma_e: TAU * 28.03e9,
            strain_azimuth: 0.0,
        }
    }
}

/// Hyperfine coupling to the nearest-neighbor carbon-13.
#[derive(Debug, Clone, Copy)]
pub struct C13Params {
    /// Longitudinal coupling (rad/s).
    pub a_par: f64,
    /// Transverse coupling (rad/s).
    pub a_perp: f64,
    /// Vacancy-carbon axis, unit vector in the defect frame.
    pub n_c: Vec3,
}

impl Default for C13Params {
    fn default() -> Self {
        Self {
            a_par: TAU * 199.7e6,
            a_perp: TAU * 120.3e6,
            // One of the three carbon bonds of the vacancy: 109.47 degrees
            // from the NV axis, azimuth fixed to zero.
            n_c: Vec3::new(2.0 * std::f64::consts::SQRT_2 / 3.0, 0.0, -1.0 / 3.0),
        }
    }
}

/// P1 defect parameters (electron spin 1/2, nitrogen-14 nuclear spin 1).
#[derive(Debug, Clone, Copy)]
pub struct P1Params {
    /// Electron gyromagnetic ratio (rad/s per tesla).
    pub gamma_e: f64,
    /// Nitrogen-14 nuclear gyromagnetic ratio (rad/s per tesla).
    pub gamma_n: f64,
    /// Nitrogen-14 quadrupole coupling (rad/s).
    pub q: f64,
    /// Longitudinal hyperfine coupling (rad/s).
    pub a_par: f64,
    /// Transverse hyperfine coupling (rad/s).
    pub a_perp: f64,
    /// Jahn-Teller axis, unit vector in the defect frame.
    pub n_p: Vec3,
}

impl Default for P1Params {
    fn default() -> Self {
        Self {
            gamma_e: TAU * 28.03e9,
            gamma_n: TAU * 3.0766e6,
            q: -TAU * 3.97e6,
            a_par: TAU * 114.0e6,
            a_perp: TAU * 81.3e6,
            n_p: Vec3::z_axis(),
        }
    }
}

/// Applied field: magnitude plus orientation angles of the unit vector
/// n = (sin t cos p, sin t sin p, cos t) in the crystal cubic frame.
#[derive(Debug, Clone, Copy)]
pub struct FieldConfig {
    pub b_tesla: f64,
    pub theta_ma_deg: f64,
    pub phi_ma_deg: f64,
}

impl FieldConfig {
    pub fn new(b_tesla: f64, theta_ma_deg: f64, phi_ma_deg: f64) -> Self {
        Self {
            b_tesla,
            theta_ma_deg,
            phi_ma_deg,
        }
    }

    pub fn with_b(&self, b_tesla: f64) -> Self {
        Self { b_tesla, ..*self }
    }

    /// Field direction in the crystal cubic frame.
    pub fn n_ma(&self) -> Vec3 {
        let theta = self.theta_ma_deg.to_radians();
        let phi = self.phi_ma_deg.to_radians();
        Vec3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        )
    }

    /// Field vector in tesla, crystal cubic frame.
    pub fn b_lab(&self) -> Vec3 {
        self.n_ma().scaled(self.b_tesla)
    }
}

/// The four <111> defect orientations in the crystal cubic frame.
pub fn defect_axes() -> [Vec3; 4] {
    [
        Vec3::new(1.0, 1.0, 1.0).normalized(),
        Vec3::new(1.0, -1.0, -1.0).normalized(),
        Vec3::new(-1.0, 1.0, -1.0).normalized(),
        Vec3::new(-1.0, -1.0, 1.0).normalized(),
    ]
}

/// Field vector rotated into the frame whose z axis is the given defect axis.
pub fn field_in_defect_frame(cfg: &FieldConfig, axis: &Vec3) -> Result<Vec3> {
    let r = axis_to_z_rotation(axis)?;
    Ok(r.apply(&cfg.b_lab()))
}

/// Axially symmetric coupling tensor diag(a_perp, a_perp, a_par) expressed
/// along the unit axis `n`: `R' diag R` with `R n = z`.
pub fn axial_coupling_tensor(n: &Vec3, a_perp: f64, a_par: f64) -> Result<[[f64; 3]; 3]> {
    Ok(axial_tensor_from_rotation(
        &axis_to_z_rotation(n)?,
        a_perp,
        a_par,
    ))
}

/// Same tensor for an explicitly supplied rotation.
pub fn axial_tensor_from_rotation(r: &Rotation3, a_perp: f64, a_par: f64) -> [[f64; 3]; 3] {
    let diag = [a_perp, a_perp, a_par];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| r.m[k][i] * diag[k] * r.m[k][j]).sum();
        }
    }
    m
}

/// NV ground-state triplet Hamiltonian, 3x3, rad/s.
pub fn nv_hamiltonian(p: &NvParams, b_defect: &Vec3) -> ComplexMatrix {
    let (sx, sy, sz) = spin_operators(1.0).expect("spin 1 is supported");
    let sz2 = sz.matmul(&sz);

    let mut h = sz2.scale_re(p.d);
    h = h.add(&sx.scale_re(-p.gamma_e * b_defect.x));
    h = h.add(&sy.scale_re(-p.gamma_e * b_defect.y));
    h = h.add(&sz.scale_re(-p.gamma_e * b_defect.z));

    // (E/2)(exp(-2ia) S+^2 + exp(+2ia) S-^2); a = 0 recovers E(Sx^2 - Sy^2).
    let sp = sx.add(&sy.scale(Complex64::new(0.0, 1.0)));
    let sp2 = sp.matmul(&sp);
    let z = Complex64::from_polar(0.5 * p.e, -2.0 * p.strain_azimuth);
    let strain = sp2.scale(z);
    h.add(&strain).add(&strain.adjoint())
}

/// NV triplet coupled to a nearest-neighbor carbon-13, 6x6 in the
/// basis (spin 1) x (spin 1/2), rad/s.
pub fn nv_c13_hamiltonian(p: &NvParams, c: &C13Params, b_defect: &Vec3) -> Result<ComplexMatrix> {
    let (sx, sy, sz) = spin_operators(1.0).expect("spin 1 is supported");
    let (ix, iy, iz) = spin_operators(0.5).expect("spin 1/2 is supported");
    let i2 = ComplexMatrix::identity(2);

    let mut h = kron(&nv_hamiltonian(p, b_defect), &i2);
    let a = axial_coupling_tensor(&c.n_c, c.a_perp, c.a_par)?;
    let s_ops = [&sx, &sy, &sz];
    let i_ops = [&ix, &iy, &iz];
    for (row, s_a) in s_ops.iter().enumerate() {
        for (col, i_b) in i_ops.iter().enumerate() {
            if a[row][col] != 0.0 {
                h = h.add(&kron(s_a, i_b).scale_re(a[row][col]));
            }
        }
    }
    Ok(h)
}

/// P1 Hamiltonian, 6x6 in the basis (electron spin 1/2) x (nuclear spin 1),
/// rad/s. Zeeman terms use the full field vector.
pub fn p1_hamiltonian(p: &P1Params, b_defect: &Vec3) -> Result<ComplexMatrix> {
    let (sx, sy, sz) = spin_operators(0.5).expect("spin 1/2 is supported");
    let (ix, iy, iz) = spin_operators(1.0).expect("spin 1 is supported");
    let i2 = ComplexMatrix::identity(2);
    let i3 = ComplexMatrix::identity(3);

    let s = [kron(&sx, &i3), kron(&sy, &i3), kron(&sz, &i3)];
    let i = [kron(&i2, &ix), kron(&i2, &iy), kron(&i2, &iz)];
    let b = [b_defect.x, b_defect.y, b_defect.z];

    let mut h = ComplexMatrix::zeros(6);
    for k in 0..3 {
        if b[k] != 0.0 {
            h = h.add(&s[k].scale_re(p.gamma_e * b[k]));
            h = h.add(&i[k].scale_re(p.gamma_n * b[k]));
        }
    }
    h = h.add(&i[2].matmul(&i[2]).scale_re(p.q));

    let a = axial_coupling_tensor(&p.n_p, p.a_perp, p.a_par)?;
    for row in 0..3 {
        for col in 0..3 {
            if a[row][col] != 0.0 {
                h = h.add(&s[row].matmul(&i[col]).scale_re(a[row][col]));
            }
        }
    }
    Ok(h)
}

/// Sorted eigenvalues of a builder output, rad/s. Convenience for tests
/// and sweep code.
pub fn spectrum(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigh(h)?.values)
}
