//! Dense complex matrices of fixed size (2x2 single-qubit and 4x4 two-qubit
//! operators) and the handful of decompositions the rest of the crate needs.
//!
//! Two-qubit operators use the computational basis ordering
//! `|00>, |01>, |10>, |11>`, first qubit leftmost: index `2 * a + b` for
//! first-qubit value `a` and second-qubit value `b`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Off-diagonal magnitude below which a Jacobi sweep counts as converged.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Tolerance for Hermiticity checks on eigensolver inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues at or above this are clamped to zero by [`psd_sqrt`].
pub const PSD_CLAMP_TOL: f64 = 1e-9;

/// Square complex matrix with `N` rows, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMatrix<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = CMatrix<2>;
pub type Mat4 = CMatrix<4>;

impl<const N: usize> Default for CMatrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> CMatrix<N> {
    pub fn zeros() -> Self {
        CMatrix([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(|i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[f64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = C64::new(values[i], 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[C64; N]) -> Self {
        Self::from_fn(|i, j| v[i] * v[j].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// max |H - H^dagger|
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..N {
            for j in i..N {
                dev = dev.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        dev
    }

    /// `(H + H^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(|i, j| (self.0[i][j] + self.0[j][i].conj()) * 0.5)
    }

    pub fn apply(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for i in 0..N {
            out[i] = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `<v|A|v>`
    pub fn expectation(&self, v: &[C64; N]) -> C64 {
        let av = self.apply(v);
        (0..N).map(|i| v[i].conj() * av[i]).sum()
    }

    /// `self * other^dagger`, without forming the adjoint.
    pub fn mul_adjoint(&self, other: &Self) -> Self {
        Self::from_fn(|i, j| (0..N).map(|k| self.0[i][k] * other.0[j][k].conj()).sum())
    }

    /// `U diag(d) U^dagger`
    pub fn conjugate_diag(u: &Self, d: &[f64; N]) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in i..N {
                let mut acc = ZERO;
                for k in 0..N {
                    acc += u.0[i][k] * u.0[j][k].conj() * d[k];
                }
                out.0[i][j] = acc;
                out.0[j][i] = acc.conj();
            }
            out.0[i][i].im = 0.0;
        }
        out
    }

    pub fn column(&self, j: usize) -> [C64; N] {
        let mut c = [ZERO; N];
        for i in 0..N {
            c[i] = self.0[i][j];
        }
        c
    }

    /// `max |U^dagger U - I|`
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).max_abs()
    }
}

impl<const N: usize> Index<(usize, usize)> for CMatrix<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMatrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Mul for CMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

impl<const N: usize> Mul<C64> for CMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * rhs)
    }
}

impl<const N: usize> Add for CMatrix<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<const N: usize> Sub for CMatrix<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

pub mod pauli {
    use super::*;

    pub fn x() -> Mat2 {
        CMatrix([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> Mat2 {
        CMatrix([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> Mat2 {
        CMatrix([[ONE, ZERO], [ZERO, -ONE]])
    }
}

/// Kronecker product `A (x) B`; `A` acts on the first (leftmost) qubit.
pub fn tensor(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a.0[r / 2][c / 2] * b.0[r % 2][c % 2])
}

/// Transpose on the second qubit: `out[(i,j),(k,l)] = in[(i,l),(k,j)]`.
pub fn partial_transpose_b(rho: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (c / 2, c % 2);
        rho.0[2 * i + l][2 * k + j]
    })
}

/// Reduced state of the first qubit.
pub fn partial_trace_b(rho: &Mat4) -> Mat2 {
    Mat2::from_fn(|i, k| rho.0[2 * i][2 * k] + rho.0[2 * i + 1][2 * k + 1])
}

/// Reduced state of the second qubit.
pub fn partial_trace_a(rho: &Mat4) -> Mat2 {
    Mat2::from_fn(|j, l| rho.0[j][l] + rho.0[2 + j][2 + l])
}

/// Eigenvalues (descending) and unitary matrix of column eigenvectors.
#[derive(Clone, Copy, Debug)]
pub struct EigenSystem<const N: usize> {
    pub values: [f64; N],
    pub vectors: CMatrix<N>,
}

impl<const N: usize> EigenSystem<N> {
    /// `V diag(values) V^dagger`
    pub fn reconstruct(&self) -> CMatrix<N> {
        CMatrix::conjugate_diag(&self.vectors, &self.values)
    }
}

fn off_diagonal_max<const N: usize>(a: &CMatrix<N>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..N {
        for j in (i + 1)..N {
            m = m.max(a.0[i][j].norm());
        }
    }
    m
}

/// Cyclic Jacobi on a Hermitian matrix. Returns unsorted eigenvalues and,
/// when `vectors` is given, accumulates the rotations into it.
fn jacobi<const N: usize>(
    h: &CMatrix<N>,
    mut vectors: Option<&mut CMatrix<N>>,
) -> Result<[f64; N]> {
    let mut a = *h;
    for i in 0..N {
        a.0[i][i].im = 0.0;
    }
    let scale = a.max_abs().max(1.0);
    let tol = JACOBI_TOL * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_max(&a);
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_diagonal: off });
        }
        sweeps += 1;

        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let mag = apq.norm();
                // Skip entries that cannot move the diagonal in floating point.
                if mag == 0.0 || mag < 1e-3 * f64::EPSILON * (a.0[p][p].re.abs() + a.0[q][q].re.abs()) {
                    a.0[p][q] = ZERO;
                    a.0[q][p] = ZERO;
                    continue;
                }
                let phase = apq / mag;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s e^{i theta}], [-s e^{-i theta}, c]] on (p, q).
                let jpq = phase * s;
                let jqp = -phase.conj() * s;

                // A <- A J (columns p, q)
                for k in 0..N {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = akp * c + akq * jqp;
                    a.0[k][q] = akp * jpq + akq * c;
                }
                // A <- J^dagger A (rows p, q)
                for k in 0..N {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = apk * c + aqk * jqp.conj();
                    a.0[q][k] = apk * jpq.conj() + aqk * c;
                }
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                a.0[p][p].im = 0.0;
                a.0[q][q].im = 0.0;

                if let Some(v) = vectors.as_deref_mut() {
                    for k in 0..N {
                        let vkp = v.0[k][p];
                        let vkq = v.0[k][q];
                        v.0[k][p] = vkp * c + vkq * jqp;
                        v.0[k][q] = vkp * jpq + vkq * c;
                    }
                }
            }
        }
    }

    let mut values = [0.0; N];
    for i in 0..N {
        values[i] = a.0[i][i].re;
    }
    Ok(values)
}

fn check_hermitian<const N: usize>(h: &CMatrix<N>) -> Result<()> {
    if !h.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigensystem<const N: usize>(h: &CMatrix<N>) -> Result<EigenSystem<N>> {
    check_hermitian(h)?;
    let mut v = CMatrix::<N>::identity();
    let raw = jacobi(h, Some(&mut v))?;

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let values = std::array::from_fn(|k| raw[order[k]]);
    let vectors = CMatrix::from_fn(|r, k| v.0[r][order[k]]);
    Ok(EigenSystem { values, vectors })
}

/// Eigenvalues only (descending); skips eigenvector accumulation.
pub fn hermitian_eigenvalues<const N: usize>(h: &CMatrix<N>) -> Result<[f64; N]> {
    check_hermitian(h)?;
    let mut values = jacobi(h, None)?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Singular values (descending) by one-sided Jacobi on the columns of `a`.
///
/// Small singular values keep absolute accuracy near `eps * |a|`, unlike
/// square roots of the eigenvalues of `a^dagger a`.
pub fn singular_values<const N: usize>(a: &CMatrix<N>) -> Result<[f64; N]> {
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let mut cols: [[C64; N]; N] = std::array::from_fn(|j| a.column(j));
    let norm2 = |v: &[C64; N]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    // Column cosines stall at a few ulps; N * eps is the usual stopping point.
    let tol = N as f64 * f64::EPSILON;

    let mut sweeps = 0;
    loop {
        let mut worst: f64 = 0.0;
        for p in 0..N {
            for q in (p + 1)..N {
                let alpha = norm2(&cols[p]);
                let beta = norm2(&cols[q]);
                let gamma: C64 = (0..N).map(|k| cols[p][k].conj() * cols[q][k]).sum();
                let mag = gamma.norm();
                if mag == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let rel = mag / (alpha * beta).sqrt();
                worst = worst.max(rel);
                if rel <= tol {
                    continue;
                }
                let phase = gamma / mag;
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..N {
                    let ap = cols[p][k];
                    let aq = cols[q][k];
                    cols[p][k] = ap * c - aq * (phase.conj() * s);
                    cols[q][k] = ap * (phase * s) + aq * c;
                }
            }
        }
        if worst <= tol {
            break;
        }
        sweeps += 1;
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_diagonal: worst });
        }
    }
    let mut values: [f64; N] = std::array::from_fn(|j| norm2(&cols[j]).sqrt());
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Principal square root of a positive semidefinite matrix.
pub fn psd_sqrt<const N: usize>(rho: &CMatrix<N>) -> Result<CMatrix<N>> {
    let eig = hermitian_eigensystem(rho)?;
    let min = eig.values[N - 1];
    if min < -PSD_CLAMP_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let roots = eig.values.map(|v| v.max(0.0).sqrt());
    Ok(CMatrix::conjugate_diag(&eig.vectors, &roots))
}

/// Wire form of a matrix: `{"dim": n, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl<const N: usize> From<&CMatrix<N>> for MatrixJson {
    fn from(m: &CMatrix<N>) -> Self {
        MatrixJson {
            dim: N,
            re: m.0.iter().map(|row| row.iter().map(|z| z.re).collect()).collect(),
            im: m.0.iter().map(|row| row.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl<const N: usize> TryFrom<&MatrixJson> for CMatrix<N> {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.dim != N {
            return Err(Error::InvalidMatrix(format!("expected dim {N}, got {}", j.dim)));
        }
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == N && rows.iter().all(|r| r.len() == N);
        if !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::InvalidMatrix(format!("re/im must both be {N}x{N}")));
        }
        let m = CMatrix::from_fn(|r, c| C64::new(j.re[r][c], j.im[r][c]));
        if !m.is_finite() {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_singlet() -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO]
    }

    #[test]
    fn diagonal_input_spectrum() {
        let eig = hermitian_eigensystem(&Mat4::diag(&[0.05, 0.25, 0.5, 0.2])).unwrap();
        assert_eq!(eig.values, [0.5, 0.25, 0.2, 0.05]);
    }

    #[test]
    fn pauli_x_tensor_identity_spectrum() {
        let h = tensor(&pauli::x(), &Mat2::identity());
        let vals = hermitian_eigenvalues(&h).unwrap();
        for (v, e) in vals.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = Mat4::identity();
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_eigensystem(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = psd_sqrt(&Mat4::diag(&[4.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((s - Mat4::diag(&[2.0, 1.0, 0.0, 0.0])).max_abs() < 1e-14);
        assert!((psd_sqrt(&Mat4::identity()).unwrap() - Mat4::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let err = psd_sqrt(&Mat4::diag(&[1.0, 0.5, 0.0, -1e-6])).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
        // Roundoff-sized negatives are clamped.
        assert!(psd_sqrt(&Mat4::diag(&[1.0, 0.5, 0.0, -1e-13])).is_ok());
    }

    #[test]
    fn sigma_y_squared_is_antidiagonal() {
        let yy = tensor(&pauli::y(), &pauli::y());
        let expect = [-1.0, 1.0, 1.0, -1.0];
        for r in 0..4 {
            for c in 0..4 {
                let want = if r + c == 3 { expect[r] } else { 0.0 };
                assert_eq!(yy[(r, c)], C64::new(want, 0.0));
            }
        }
        assert_eq!(tensor(&Mat2::identity(), &Mat2::identity()), Mat4::identity());
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        let pt = partial_transpose_b(&Mat4::outer(&bell_singlet()));
        let vals = hermitian_eigenvalues(&pt).unwrap();
        for (v, e) in vals.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_transpose_of_product() {
        let a = Mat2::from_real([[0.7, 0.1], [0.1, 0.3]]);
        let b = Mat2::from_fn(|i, j| match (i, j) {
            (0, 0) => C64::new(0.6, 0.0),
            (1, 1) => C64::new(0.4, 0.0),
            (0, 1) => C64::new(0.1, 0.2),
            _ => C64::new(0.1, -0.2),
        });
        let pt = partial_transpose_b(&tensor(&a, &b));
        assert_eq!(pt, tensor(&a, &b.transpose()));
    }

    #[test]
    fn partial_traces_of_product() {
        let a = Mat2::from_real([[0.7, 0.1], [0.1, 0.3]]);
        let b = Mat2::from_real([[0.2, 0.0], [0.0, 0.8]]);
        let ab = tensor(&a, &b);
        assert!((partial_trace_b(&ab) - a).max_abs() < 1e-15);
        assert!((partial_trace_a(&ab) - b).max_abs() < 1e-15);
    }

    #[test]
    fn matrix_json_dimension_checked() {
        let j = MatrixJson::from(&Mat2::identity());
        assert!(Mat4::try_from(&j).is_err());
        assert_eq!(Mat2::try_from(&j).unwrap(), Mat2::identity());
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"dim":2,"re":[[1.0,0.0],[0.0,1.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#);
    }
}
