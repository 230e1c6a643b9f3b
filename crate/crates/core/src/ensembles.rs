//! Seeded random spectra, Haar unitaries and density matrices.
//!
//! Every draw is fixed by `(seed, stream_id, position in stream)`: each
//! [`RngStream`] is a ChaCha8 generator keyed by the seed with the stream id
//! selecting an independent ChaCha stream.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::Result;
use crate::linalg::{tensor, CMatrix, Mat4};
use crate::mems::Spectrum;
use crate::measures::DensityMatrix;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian, `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }

    fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }
}

/// Flat measure on the probability simplex, sorted descending.
pub fn sample_spectrum(rng: &mut RngStream) -> Spectrum {
    // Normalized i.i.d. exponentials are Dirichlet(1, 1, 1, 1).
    let mut p: [f64; 4] = std::array::from_fn(|_| rng.exp1());
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p.sort_by(|a, b| b.total_cmp(a));
    Spectrum::new_unchecked(p)
}

/// Haar-random `N x N` unitary.
///
/// Columns of a complex Ginibre matrix are orthonormalized by Gram-Schmidt
/// (applied twice for stability). The resulting triangular factor has a real
/// positive diagonal, which is the phase convention that makes the unitary
/// factor exactly Haar distributed.
pub fn sample_haar<const N: usize>(rng: &mut RngStream) -> CMatrix<N> {
    let mut cols: [[C64; N]; N] = std::array::from_fn(|_| std::array::from_fn(|_| rng.complex_normal()));
    for j in 0..N {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..N).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..N {
                    let ck = cols[k][i];
                    cols[j][i] -= proj * ck;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    CMatrix::from_fn(|r, c| cols[c][r])
}

/// Circular unitary ensemble on two qubits.
pub fn sample_cue(rng: &mut RngStream) -> Mat4 {
    sample_haar::<4>(rng)
}

/// Haar-random product unitary `U_A (x) U_B`.
pub fn sample_local_unitary(rng: &mut RngStream) -> Mat4 {
    let a = sample_haar::<2>(rng);
    let b = sample_haar::<2>(rng);
    tensor(&a, &b)
}

/// `U diag(p) U^dagger` with `U` drawn from the CUE.
pub fn sample_density(rng: &mut RngStream, p: &Spectrum) -> DensityMatrix {
    let u = sample_cue(rng);
    DensityMatrix::new_unchecked(Mat4::conjugate_diag(&u, p.values()))
}

/// Spectrum then orbit point: a random two-qubit density matrix.
pub fn sample_random_state(rng: &mut RngStream) -> DensityMatrix {
    let p = sample_spectrum(rng);
    sample_density(rng, &p)
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE scaling, unit
/// Frobenius norm on average per entry).
pub fn sample_gue<const N: usize>(rng: &mut RngStream) -> CMatrix<N> {
    let mut h = CMatrix::<N>::zeros();
    for i in 0..N {
        h.0[i][i] = C64::new(rng.normal(), 0.0);
        for j in (i + 1)..N {
            let z = rng.complex_normal();
            h.0[i][j] = z;
            h.0[j][i] = z.conj();
        }
    }
    h
}

/// Uniformly random unit vector in `C^N`.
pub fn sample_pure<const N: usize>(rng: &mut RngStream) -> [C64; N] {
    let mut v: [C64; N] = std::array::from_fn(|_| rng.complex_normal());
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Checked variant for user-facing callers holding a raw spectrum.
pub fn sample_density_checked(rng: &mut RngStream, p: [f64; 4]) -> Result<DensityMatrix> {
    let p = Spectrum::new(p)?;
    Ok(sample_density(rng, &p))
}
