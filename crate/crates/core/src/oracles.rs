//! Cross-check routines that share no code path with the main
//! implementations: characteristic-polynomial root finding in place of the
//! Jacobi eigensolver, and the non-Hermitian product `rho rho~` in place of
//! the square-root form used by [`crate::measures::concurrence`].

use num_complex::Complex64 as C64;

use crate::linalg::{Mat4, ONE, ZERO};

/// Coefficients `c[0..=4]` of `det(x I - A) = sum c[k] x^k` (Faddeev-LeVerrier).
pub fn char_poly(a: &Mat4) -> [C64; 5] {
    let n = 4;
    let mut c = [ZERO; 5];
    c[n] = ONE;
    let mut m = Mat4::zeros();
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = *a * m;
        for i in 0..n {
            next.0[i][i] += c[n - k + 1];
        }
        m = next;
        c[n - k] = -(*a * m).trace() / (k as f64);
    }
    c
}

fn horner(c: &[C64; 5], z: C64) -> C64 {
    c.iter().rev().fold(ZERO, |acc, &ck| acc * z + ck)
}

fn horner_derivative(c: &[C64; 5], z: C64) -> C64 {
    (1..5).rev().fold(ZERO, |acc, k| acc * z + c[k] * (k as f64))
}

/// All four roots of a monic quartic (Durand-Kerner, then Newton polish).
pub fn quartic_roots(c: &[C64; 5]) -> [C64; 4] {
    let bound = 1.0 + (0..4).map(|k| c[k].norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z: [C64; 4] = std::array::from_fn(|k| seed.powu(k as u32 + 1) * bound);
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..4 {
            let mut denom = ONE;
            for j in 0..4 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = C64::new(1e-300, 0.0);
            }
            let step = horner(c, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = horner_derivative(c, *zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(c, *zi) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
    z
}

/// Eigenvalues of a Hermitian matrix via its characteristic polynomial, descending.
pub fn hermitian_eigenvalues_charpoly(h: &Mat4) -> [f64; 4] {
    let mut vals = quartic_roots(&char_poly(h)).map(|z| z.re);
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Determinant by cofactor expansion along the first row.
pub fn det4(a: &Mat4) -> C64 {
    let minor3 = |skip_col: usize| -> C64 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip_col).collect();
        let m = |r: usize, k: usize| a.0[r][cols[k]];
        m(1, 0) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1)) - m(1, 1) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0))
            + m(1, 2) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0))
    };
    (0..4)
        .map(|c| {
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            a.0[0][c] * minor3(c) * sign
        })
        .sum()
}

/// Concurrence from the eigenvalues of the non-Hermitian product `rho rho~`,
/// with the spin flip written as an explicit Pauli product.
pub fn concurrence_nonhermitian(rho: &Mat4) -> f64 {
    use crate::linalg::{pauli, tensor};
    let yy = tensor(&pauli::y(), &pauli::y());
    let flipped = yy * rho.conj() * yy;
    let roots = quartic_roots(&char_poly(&(*rho * flipped)));
    let mut lambda = roots.map(|z| z.re.max(0.0).sqrt());
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}

/// Doubled negativity from characteristic-polynomial roots of the partial
/// transpose, with the transpose written out by explicit index swap.
pub fn negativity_charpoly(rho: &Mat4) -> f64 {
    let mut pt = Mat4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    pt.0[2 * a + b][2 * c + d] = rho.0[2 * a + d][2 * c + b];
                }
            }
        }
    }
    let min = hermitian_eigenvalues_charpoly(&pt)[3];
    2.0 * (-min).max(0.0)
}
