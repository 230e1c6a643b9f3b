//! Entanglement and mixedness measures for two-qubit states.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, partial_trace_b, partial_transpose_b, psd_sqrt, singular_values, Mat4,
    MatrixJson,
};

pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
pub const DENSITY_TRACE_TOL: f64 = 1e-12;
pub const DENSITY_MIN_EIGENVALUE: f64 = -1e-10;
/// A second partial-transpose eigenvalue below this means a bug upstream.
pub const SECOND_NEGATIVE_TOL: f64 = -1e-9;
/// Purity at or below this certifies separability.
pub const SEPARABLE_PURITY: f64 = 1.0 / 3.0;

/// Hermitian, unit-trace, positive semidefinite 4x4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    pub fn new(mat: Mat4) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        let dev = mat.hermitian_deviation();
        if dev > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min = hermitian_eigenvalues(&mat)?[3];
        if min < DENSITY_MIN_EIGENVALUE {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix(mat))
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub fn new_unchecked(mat: Mat4) -> Self {
        DensityMatrix(mat)
    }

    /// Normalized projector onto `psi`.
    pub fn pure(psi: &[C64; 4]) -> Result<Self> {
        check_unit(psi)?;
        Ok(DensityMatrix(Mat4::outer(psi)))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity().scale(0.25))
    }

    /// `q a + (1 - q) b`
    pub fn mix(a: &Self, b: &Self, q: f64) -> Self {
        DensityMatrix(a.0.scale(q) + b.0.scale(1.0 - q))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// `U rho U^dagger`
    pub fn conjugated(&self, u: &Mat4) -> Self {
        DensityMatrix((*u * self.0).mul_adjoint(u))
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        hermitian_eigenvalues(&self.0)
    }
}

impl TryFrom<&MatrixJson> for DensityMatrix {
    type Error = Error;
    fn try_from(j: &MatrixJson) -> Result<Self> {
        DensityMatrix::new(Mat4::try_from(j)?)
    }
}

fn check_unit(psi: &[C64; 4]) -> Result<()> {
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("state vector norm {} != 1", norm2.sqrt())));
    }
    Ok(())
}

/// Spin-flip sign pattern: `sigma_y (x) sigma_y` is antidiag(-1, 1, 1, -1).
const FLIP_SIGN: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// `(sigma_y (x) sigma_y) rho^* (sigma_y (x) sigma_y)` in the computational basis.
pub fn spin_flip_matrix(rho: &Mat4) -> Mat4 {
    Mat4::from_fn(|i, j| rho.0[3 - i][3 - j].conj() * (FLIP_SIGN[i] * FLIP_SIGN[j]))
}

pub fn spin_flip(rho: &DensityMatrix) -> Mat4 {
    spin_flip_matrix(&rho.0)
}

/// Signature of a spin-flip implementation; swappable for fault injection.
pub type SpinFlipFn = fn(&Mat4) -> Mat4;

/// Concurrence from `sqrt(rho)` and a spin-flip map.
///
/// The `lambda_i` (square roots of the eigenvalues of `rho rho~`) are the
/// singular values of `sqrt(rho) sqrt(rho~)`, since that product times its
/// adjoint is the Hermitian matrix `sqrt(rho) rho~ sqrt(rho)`. The spin flip
/// is multiplicative, so `sqrt(rho~)` is the flip of `sqrt(rho)`.
pub(crate) fn concurrence_from_sqrt(sqrt_rho: &Mat4, flip: SpinFlipFn) -> Result<f64> {
    Ok(unclipped_concurrence(sqrt_rho, flip)?.clamp(0.0, 1.0))
}

/// `lambda_1 - lambda_2 - lambda_3 - lambda_4` before clipping at zero.
pub(crate) fn unclipped_concurrence(sqrt_rho: &Mat4, flip: SpinFlipFn) -> Result<f64> {
    let lambda = singular_values(&(*sqrt_rho * flip(sqrt_rho)))?;
    Ok(lambda[0] - lambda[1] - lambda[2] - lambda[3])
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    concurrence_with_flip(rho, spin_flip_matrix)
}

pub fn concurrence_with_flip(rho: &DensityMatrix, flip: SpinFlipFn) -> Result<f64> {
    concurrence_from_sqrt(&psd_sqrt(&rho.0)?, flip)
}

/// Binary entropy in bits, `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Entanglement of formation (bits) as a function of the concurrence.
pub fn eof_from_concurrence(c: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&c) || c.is_nan() {
        return Err(Error::Domain(format!("concurrence {c} outside [0, 1]")));
    }
    let c = c.clamp(0.0, 1.0);
    let root = (1.0 - c * c).sqrt();
    // Smaller branch (1 - sqrt(1 - C^2)) / 2 written without cancellation.
    let small = c * c / (2.0 * (1.0 + root));
    Ok(binary_entropy(small))
}

pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    eof_from_concurrence(concurrence(rho)?)
}

/// Doubled negativity `2 E_N` from an already partial-transposed matrix.
pub(crate) fn negativity_of_transposed(pt: &Mat4) -> Result<f64> {
    let mu = hermitian_eigenvalues(pt)?;
    if mu[2] < SECOND_NEGATIVE_TOL {
        return Err(Error::InvariantViolation(format!(
            "partial transpose has two negative eigenvalues ({:.3e}, {:.3e})",
            mu[2], mu[3]
        )));
    }
    Ok((2.0 * (-mu[3]).max(0.0)).min(1.0))
}

/// `E_N`: modulus of the negative partial-transpose eigenvalue (zero if none).
pub fn negative_eigenvalue_modulus(rho: &DensityMatrix) -> Result<f64> {
    Ok(negativity(rho)? / 2.0)
}

/// Negativity reported as the doubled quantity `2 E_N` in `[0, 1]`.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    negativity_of_transposed(&partial_transpose_b(&rho.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub purity: f64,
    pub participation_ratio: f64,
    pub separable_by_purity: bool,
}

/// `Tr rho^2` for a Hermitian matrix: sum of squared entry moduli.
pub fn purity_of(m: &Mat4) -> f64 {
    m.0.iter().flatten().map(|z| z.norm_sqr()).sum()
}

pub fn purity_report(rho: &DensityMatrix) -> PurityReport {
    let purity = purity_of(&rho.0);
    PurityReport {
        purity,
        participation_ratio: 1.0 / purity,
        separable_by_purity: purity <= SEPARABLE_PURITY + 1e-12,
    }
}

/// `<psi|rho|psi>`
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &[C64; 4]) -> Result<f64> {
    check_unit(psi)?;
    Ok(rho.0.expectation(psi).re.clamp(0.0, 1.0))
}

/// Von Neumann entropy (bits) of the first qubit's reduced state.
pub fn reduced_entropy(rho: &DensityMatrix) -> Result<f64> {
    let reduced = partial_trace_b(&rho.0);
    let vals = hermitian_eigenvalues(&reduced)?;
    Ok(vals
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub concurrence: f64,
    pub eof: f64,
    pub negativity: f64,
    pub purity: f64,
    pub participation_ratio: f64,
}

pub fn measure_report(rho: &DensityMatrix) -> Result<MeasureReport> {
    let concurrence = concurrence(rho)?;
    let purity = purity_report(rho);
    Ok(MeasureReport {
        concurrence,
        eof: eof_from_concurrence(concurrence)?,
        negativity: negativity(rho)?,
        purity: purity.purity,
        participation_ratio: purity.participation_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn basis(k: usize) -> [C64; 4] {
        let mut v = [ZERO; 4];
        v[k] = C64::new(1.0, 0.0);
        v
    }

    fn singlet() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO]).unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(Mat4::identity()).is_err());
        assert!(DensityMatrix::new(Mat4::diag(&[1.2, -0.2, 0.0, 0.0])).is_err());
        assert!(DensityMatrix::new(Mat4::identity().scale(0.25)).is_ok());
        let mut m = Mat4::identity().scale(0.25);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn spin_flip_examples() {
        let s = singlet();
        assert!((spin_flip(&s) - *s.matrix()).max_abs() < 1e-15);
        let zero = DensityMatrix::pure(&basis(0)).unwrap();
        assert_eq!(spin_flip(&zero), Mat4::outer(&basis(3)));
        let mixed = DensityMatrix::maximally_mixed();
        assert_eq!(spin_flip(&mixed), *mixed.matrix());
    }

    #[test]
    fn spin_flip_matches_explicit_product() {
        use crate::linalg::{pauli, tensor};
        let yy = tensor(&pauli::y(), &pauli::y());
        let m = Mat4::from_fn(|i, j| C64::new((i * 4 + j) as f64, (i as f64) - (j as f64)));
        assert!((spin_flip_matrix(&m) - yy * m.conj() * yy).max_abs() < 1e-14);
    }

    #[test]
    fn singlet_measures() {
        let s = singlet();
        assert!((concurrence(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!((eof(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!((negativity(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!((negative_eigenvalue_modulus(&s).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_measures() {
        let m = DensityMatrix::maximally_mixed();
        assert_eq!(concurrence(&m).unwrap(), 0.0);
        assert_eq!(negativity(&m).unwrap(), 0.0);
        let r = purity_report(&m);
        assert!((r.purity - 0.25).abs() < 1e-15);
        assert!((r.participation_ratio - 4.0).abs() < 1e-12);
        assert!(r.separable_by_purity);
    }

    #[test]
    fn product_state_measures() {
        let p = DensityMatrix::pure(&basis(0)).unwrap();
        assert_eq!(concurrence(&p).unwrap(), 0.0);
        assert_eq!(negativity(&p).unwrap(), 0.0);
        let r = purity_report(&p);
        assert_eq!((r.purity, r.participation_ratio, r.separable_by_purity), (1.0, 1.0, false));
    }

    #[test]
    fn eof_values() {
        assert_eq!(eof_from_concurrence(0.0).unwrap(), 0.0);
        assert!((eof_from_concurrence(1.0).unwrap() - 1.0).abs() < 1e-15);
        // H((1 + sqrt(3)/2) / 2) evaluated independently.
        let x: f64 = (1.0 + 0.75f64.sqrt()) / 2.0;
        let direct = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        let e = eof_from_concurrence(0.5).unwrap();
        assert!((e - direct).abs() < 1e-14);
        assert!((e - 0.354578902665).abs() < 1e-11);
        assert!(eof_from_concurrence(1.1).is_err());
        assert!(eof_from_concurrence(-0.01).is_err());
    }

    #[test]
    fn eof_is_monotone() {
        let mut last = -1.0;
        for k in 0..=1000 {
            let e = eof_from_concurrence(k as f64 / 1000.0).unwrap();
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn fidelity_examples() {
        let psi = basis(1);
        let rho = DensityMatrix::pure(&psi).unwrap();
        assert!((fidelity_to_pure(&rho, &psi).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity_to_pure(&rho, &basis(2)).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed();
        assert!((fidelity_to_pure(&mixed, &psi).unwrap() - 0.25).abs() < 1e-15);
        assert!(fidelity_to_pure(&mixed, &[C64::new(2.0, 0.0), ZERO, ZERO, ZERO]).is_err());
    }

    #[test]
    fn two_negative_eigenvalues_flagged() {
        let bad = Mat4::diag(&[0.7, 0.5, -0.1, -0.1]);
        assert!(matches!(negativity_of_transposed(&bad), Err(Error::InvariantViolation(_))));
    }
}
