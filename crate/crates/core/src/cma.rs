//! Small (mu/mu_w, lambda) CMA-ES used to refine orbit maxima.
//!
//! The concurrence maximum over an orbit sits where a singular value hits
//! zero, so the objective has a kink there. Isotropic random steps almost
//! never land in the thin cone of improving directions; adapting the sample
//! covariance lets the search follow the ridge.

use crate::ensembles::RngStream;
use crate::error::Result;
use crate::linalg::{hermitian_eigensystem, CMatrix};

pub(crate) struct CmaOutcome<const N: usize> {
    pub best_x: [f64; N],
    pub best_value: f64,
    pub evaluations: usize,
}

/// Maximizes `f` starting from the origin with initial step `sigma0`.
///
/// Stops after `max_evals` evaluations or once the largest search radius
/// drops below `min_step`. Only strict improvements replace the incumbent,
/// which starts at `(origin, f0)`.
pub(crate) fn maximize<const N: usize>(
    mut f: impl FnMut(&[f64; N]) -> Result<f64>,
    f0: f64,
    sigma0: f64,
    min_step: f64,
    max_evals: usize,
    rng: &mut RngStream,
) -> Result<CmaOutcome<N>> {
    let n = N as f64;
    let lambda = 4 + (3.0 * n.ln()).floor() as usize;
    let mu = lambda / 2;
    let raw: Vec<f64> = (0..mu).map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln()).collect();
    let wsum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / wsum).collect();
    let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
    let cs = (mueff + 2.0) / (n + mueff + 5.0);
    let c1 = 2.0 / ((n + 1.3).powi(2) + mueff);
    let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0).powi(2) + mueff));
    let damps = 1.0 + 2.0 * (((mueff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs;
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    let mut mean = [0.0; N];
    let mut sigma = sigma0;
    let mut cov = [[0.0; N]; N];
    for (i, row) in cov.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut basis = cov;
    let mut scales = [1.0; N];
    let mut pc = [0.0; N];
    let mut ps = [0.0; N];

    let mut best_x = [0.0; N];
    let mut best_value = f0;
    let mut evaluations = 0;
    let mut generation = 0;

    while evaluations + lambda <= max_evals {
        let mut pop: Vec<([f64; N], [f64; N], f64)> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let z: [f64; N] = std::array::from_fn(|_| rng.normal());
            let y: [f64; N] =
                std::array::from_fn(|i| (0..N).map(|k| basis[i][k] * scales[k] * z[k]).sum());
            let x: [f64; N] = std::array::from_fn(|i| mean[i] + sigma * y[i]);
            let v = f(&x)?;
            evaluations += 1;
            if v > best_value {
                best_value = v;
                best_x = x;
            }
            pop.push((x, y, v));
        }
        generation += 1;
        // Stable sort keeps draw order among ties.
        pop.sort_by(|a, b| b.2.total_cmp(&a.2));

        let mut yw = [0.0; N];
        for (w, (_, y, _)) in weights.iter().zip(&pop) {
            for i in 0..N {
                yw[i] += w * y[i];
            }
        }
        for i in 0..N {
            mean[i] += sigma * yw[i];
        }

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let bt_yw: [f64; N] = std::array::from_fn(|k| (0..N).map(|i| basis[i][k] * yw[i]).sum::<f64>() / scales[k]);
        let ps_coef = (cs * (2.0 - cs) * mueff).sqrt();
        for i in 0..N {
            ps[i] = (1.0 - cs) * ps[i] + ps_coef * (0..N).map(|k| basis[i][k] * bt_yw[k]).sum::<f64>();
        }
        let ps_norm = ps.iter().map(|v| v * v).sum::<f64>().sqrt();
        let hsig = ps_norm / (1.0 - (1.0 - cs).powi(2 * generation)).sqrt() / chi_n < 1.4 + 2.0 / (n + 1.0);
        let hsig = if hsig { 1.0 } else { 0.0 };

        let pc_coef = (cc * (2.0 - cc) * mueff).sqrt();
        for i in 0..N {
            pc[i] = (1.0 - cc) * pc[i] + hsig * pc_coef * yw[i];
        }
        let old_weight = 1.0 - c1 - cmu + (1.0 - hsig) * c1 * cc * (2.0 - cc);
        for i in 0..N {
            for j in 0..=i {
                let rank_mu: f64 = weights.iter().zip(&pop).map(|(w, (_, y, _))| w * y[i] * y[j]).sum();
                let v = old_weight * cov[i][j] + c1 * pc[i] * pc[j] + cmu * rank_mu;
                cov[i][j] = v;
                cov[j][i] = v;
            }
        }
        sigma *= ((cs / damps) * (ps_norm / chi_n - 1.0)).exp();

        let eig = hermitian_eigensystem(&CMatrix::<N>::from_real(cov))?;
        for i in 0..N {
            scales[i] = eig.values[i].max(1e-300).sqrt();
            for k in 0..N {
                basis[i][k] = eig.vectors.0[i][k].re;
            }
        }
        let radius = sigma * scales.iter().cloned().fold(0.0, f64::max);
        if radius < min_step {
            break;
        }
    }
    Ok(CmaOutcome { best_x, best_value, evaluations })
}
