//! Small dense complex matrices, spin operators and rotations.
//!
//! Everything here is sized for spin Hamiltonians of dimension 2 to 6:
//! dense row-major storage, a cyclic Jacobi eigensolver for Hermitian
//! matrices, and the minimal-rotation construction used to express
//! defect-frame tensors. All operations are pure functions of their
//! inputs.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative hermiticity budget: max |H - H'| <= HERMITICITY_TOL * max |H|.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Jacobi convergence: off-diagonal Frobenius norm <= JACOBI_TOL * ||H||.
const JACOBI_TOL: f64 = 1e-14;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= factor;
        }
        out
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |H - H'| over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= HERMITICITY_TOL * self.max_abs()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// H * v for a column vector v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Kronecker product; dim = a.dim * b.dim.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(na * nb, |i, j| a[(i / nb, j / nb)] * b[(i % nb, j % nb)])
}

/// ⟨u|v⟩ with the physics convention (conjugate-linear in u).
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Real 3-vector; direction components or tesla when used as a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub const fn z_axis() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(k * self.x, k * self.y, k * self.z)
    }

    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.norm())
    }
}

/// 3x3 real rotation matrix (orthogonal, det +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    pub m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `angle` radians about the z axis.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = self.m[j][i];
            }
        }
        Self { m: t }
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let mut p = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                p[i][j] = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m: p }
    }

    /// max |R'R - I| entrywise, for orthogonality checks.
    pub fn orthogonality_deviation(&self) -> f64 {
        let rtr = self.transpose().compose(self);
        let mut dev = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((rtr.m[i][j] - expected).abs());
            }
        }
        dev
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Standard angular-momentum matrices (Sx, Sy, Sz) in the |m = s..-s⟩ basis,
/// hbar-free. Supported quantum numbers: 1/2 and 1.
pub fn spin_operators(s: f64) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if s != 0.5 && s != 1.0 {
        return Err(Error::UnsupportedSpin(s));
    }
    let dim = (2.0 * s + 1.0).round() as usize;
    let m_of = |k: usize| s - k as f64;

    let mut sz = ComplexMatrix::zeros(dim);
    for k in 0..dim {
        sz[(k, k)] = Complex64::new(m_of(k), 0.0);
    }

    // Raising operator: S+|m⟩ = sqrt(s(s+1) - m(m+1)) |m+1⟩.
    let mut sp = ComplexMatrix::zeros(dim);
    for k in 1..dim {
        let m = m_of(k);
        sp[(k - 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let sm = sp.adjoint();

    let sx = sp.add(&sm).scale_re(0.5);
    let sy = sp.sub(&sm).scale(Complex64::new(0.0, -0.5));
    Ok((sx, sy, sz))
}

/// Minimal rotation R with R n = z, rotating about the axis n x z.
///
/// For n = z this is the identity; for n = -z a 180-degree rotation about x.
pub fn axis_to_z_rotation(n: &Vec3) -> Result<Rotation3> {
    let norm = n.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit { norm });
    }
    let z = Vec3::z_axis();
    let axis = n.cross(&z);
    let sin_t = axis.norm();
    let cos_t = n.dot(&z);
    if sin_t < 1e-12 {
        return Ok(if cos_t > 0.0 {
            Rotation3::identity()
        } else {
            Rotation3 {
                m: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
            }
        });
    }
    let u = axis.scaled(1.0 / sin_t);
    // Rodrigues: R = cos I + sin [u]x + (1 - cos) u u'.
    let k = 1.0 - cos_t;
    let m = [
        [
            cos_t + k * u.x * u.x,
            k * u.x * u.y - sin_t * u.z,
            k * u.x * u.z + sin_t * u.y,
        ],
        [
            k * u.y * u.x + sin_t * u.z,
            cos_t + k * u.y * u.y,
            k * u.y * u.z - sin_t * u.x,
        ],
        [
            k * u.z * u.x - sin_t * u.y,
            k * u.z * u.y + sin_t * u.x,
            cos_t + k * u.z * u.z,
        ],
    ];
    Ok(Rotation3 { m })
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with orthonormal eigenvector
/// columns such that H = V diag(values) V'. Rejects inputs whose
/// hermiticity deviation exceeds the [`HERMITICITY_TOL`] budget.
pub fn eigh(h: &ComplexMatrix) -> Result<Eigh> {
    let limit = HERMITICITY_TOL * h.max_abs();
    let deviation = h.hermiticity_deviation();
    if deviation > limit {
        return Err(Error::NotHermitian { deviation, limit });
    }

    let n = h.dim();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = h.frobenius_norm();
    let threshold = JACOBI_TOL * scale;

    let mut converged = scale == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        sweeps += 1;
        if sweeps > MAX_JACOBI_SWEEPS {
            return Err(Error::EighNoConvergence { sweeps });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        converged = off <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(Eigh { values, vectors })
}

/// Annihilate A[p][q] with a unitary plane rotation; accumulate into V.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = b / abs_b;

    let tau = (aqq - app) / (2.0 * abs_b);
    let t = if tau == 0.0 {
        1.0
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let sigma = t * c;
    let s = phase * sigma;

    let n = a.dim();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s.conj();
        a[(k, q)] = akp * s + akq * c;
        a[(p, k)] = a[(k, p)].conj();
        a[(q, k)] = a[(k, q)].conj();
    }
    a[(p, p)] = Complex64::new(app * c * c - 2.0 * c * sigma * abs_b + aqq * sigma * sigma, 0.0);
    a[(q, q)] = Complex64::new(app * sigma * sigma + 2.0 * c * sigma * abs_b + aqq * c * c, 0.0);
    a[(p, q)] = Complex64::ZERO;
    a[(q, p)] = Complex64::ZERO;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s.conj();
        v[(k, q)] = vkp * s + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn residual(h: &ComplexMatrix, e: &Eigh) -> f64 {
        let n = h.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            let v = e.vectors.column(k);
            let hv = h.apply(&v);
            let r: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * e.values[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    #[test]
    fn spin_half_sz() {
        let (_, _, sz) = spin_operators(0.5).unwrap();
        approx(sz[(0, 0)].re, 0.5, 1e-15);
        approx(sz[(1, 1)].re, -0.5, 1e-15);
    }

    #[test]
    fn spin_one_sz() {
        let (_, _, sz) = spin_operators(1.0).unwrap();
        for (k, want) in [(0, 1.0), (1, 0.0), (2, -1.0)] {
            approx(sz[(k, k)].re, want, 1e-15);
        }
    }

    #[test]
    fn spin_one_commutator() {
        let (sx, sy, sz) = spin_operators(1.0).unwrap();
        let comm = sx.matmul(&sy).sub(&sy.matmul(&sx));
        let want = sz.scale(Complex64::new(0.0, 1.0));
        assert!(comm.sub(&want).max_abs() <= 1e-14);
    }

    #[test]
    fn casimir_identity() {
        for s in [0.5, 1.0] {
            let (sx, sy, sz) = spin_operators(s).unwrap();
            let total = sx
                .matmul(&sx)
                .add(&sy.matmul(&sy))
                .add(&sz.matmul(&sz));
            let want = ComplexMatrix::identity(total.dim()).scale_re(s * (s + 1.0));
            assert!(total.sub(&want).max_abs() <= 1e-13, "s = {s}");
        }
    }

    #[test]
    fn unsupported_spin_rejected() {
        assert!(matches!(
            spin_operators(1.5),
            Err(Error::UnsupportedSpin(_))
        ));
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(kron(&i2, &i3), ComplexMatrix::identity(6));

        let d = ComplexMatrix::diag(&[1.0, -1.0]);
        let got = kron(&d, &i2);
        let want = ComplexMatrix::diag(&[1.0, 1.0, -1.0, -1.0]);
        assert!(got.sub(&want).max_abs() <= 1e-15);
    }

    #[test]
    fn axis_to_z_trivial_cases() {
        let r = axis_to_z_rotation(&Vec3::z_axis()).unwrap();
        assert_eq!(r, Rotation3::identity());

        let r = axis_to_z_rotation(&Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let img = r.apply(&Vec3::new(1.0, 0.0, 0.0));
        approx(img.x, 0.0, 1e-12);
        approx(img.y, 0.0, 1e-12);
        approx(img.z, 1.0, 1e-12);

        let r = axis_to_z_rotation(&Vec3::new(0.0, 0.0, -1.0)).unwrap();
        let img = r.apply(&Vec3::new(0.0, 0.0, -1.0));
        approx(img.z, 1.0, 1e-12);
        approx(r.det(), 1.0, 1e-12);
    }

    #[test]
    fn axis_to_z_oblique() {
        let n = Vec3::new(1.0, 1.0, 1.0).normalized();
        let r = axis_to_z_rotation(&n).unwrap();
        let img = r.apply(&n);
        approx(img.x, 0.0, 1e-12);
        approx(img.y, 0.0, 1e-12);
        approx(img.z, 1.0, 1e-12);
        assert!(r.orthogonality_deviation() <= 1e-12);
        approx(r.det(), 1.0, 1e-12);
    }

    #[test]
    fn axis_to_z_rejects_non_unit() {
        assert!(matches!(
            axis_to_z_rotation(&Vec3::new(0.0, 0.0, 2.0)),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn z_rotation_still_maps_axis_to_z() {
        let n = Vec3::new(0.3, -0.4, 0.2).normalized();
        let r = axis_to_z_rotation(&n).unwrap();
        for angle in [0.7, 2.1, -1.3] {
            let composed = Rotation3::about_z(angle).compose(&r);
            let img = composed.apply(&n);
            approx(img.z, 1.0, 1e-12);
            assert!(img.x.abs() <= 1e-12 && img.y.abs() <= 1e-12);
        }
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let h = ComplexMatrix::diag(&[3.0, 1.0, 2.0]);
        let e = eigh(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigh_spin_half_sx() {
        let (sx, _, _) = spin_operators(0.5).unwrap();
        let e = eigh(&sx).unwrap();
        approx(e.values[0], -0.5, 1e-14);
        approx(e.values[1], 0.5, 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(eigh(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_deterministic() {
        let h = random_hermitian(6, 7);
        let a = eigh(&h).unwrap();
        let b = eigh(&h).unwrap();
        assert_eq!(a.values, b.values);
        for k in 0..6 {
            let overlap = inner(&a.vectors.column(k), &b.vectors.column(k)).norm();
            approx(overlap, 1.0, 1e-12);
        }
    }

    /// Deterministic pseudo-random Hermitian matrix for tests.
    pub(crate) fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).max(1);
        let mut next = move || {
            // xorshift64*
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            let bits = state.wrapping_mul(0x2545_F491_4F6C_DD1D);
            (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut h = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            h[(i, i)] = Complex64::new(next(), 0.0);
            for j in i + 1..dim {
                let z = Complex64::new(next(), next());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        for seed in 0..10u64 {
            let h = random_hermitian(6, seed + 1);
            let e = eigh(&h).unwrap();
            // H = V diag V'
            let lambda = ComplexMatrix::diag(&e.values);
            let rebuilt = e.vectors.matmul(&lambda).matmul(&e.vectors.adjoint());
            assert!(
                rebuilt.sub(&h).max_abs() <= 1e-10 * h.frobenius_norm().max(1.0),
                "seed {seed}"
            );
            assert!(residual(&h, &e) <= 1e-10 * h.frobenius_norm());
            // orthonormal columns
            let gram = e.vectors.adjoint().matmul(&e.vectors);
            assert!(gram.sub(&ComplexMatrix::identity(6)).max_abs() <= 1e-10);
            // ascending
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_complex() -> impl Strategy<Value = Complex64> {
            (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
        }

        fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
            proptest::collection::vec(small_complex(), dim * dim).prop_map(move |data| {
                ComplexMatrix {
                    dim,
                    data,
                }
            })
        }

        proptest! {
            #[test]
            fn kron_mixed_product(a in matrix(2), b in matrix(3), c in matrix(2), d in matrix(3)) {
                let lhs = kron(&a, &b).matmul(&kron(&c, &d));
                let rhs = kron(&a.matmul(&c), &b.matmul(&d));
                prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-13);
            }

            #[test]
            fn eigh_residual_bounded(seed in 0u64..1000) {
                let h = random_hermitian(5, seed.wrapping_add(11));
                let e = eigh(&h).unwrap();
                prop_assert!(residual(&h, &e) <= 1e-10 * h.frobenius_norm());
            }
        }
    }
}
