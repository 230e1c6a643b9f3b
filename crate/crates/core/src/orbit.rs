//! Monte Carlo maximization of entanglement over unitary orbits
//! `{ U diag(p) U^dagger }` of a fixed spectrum.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cma;
use crate::ensembles::{sample_cue, sample_spectrum, RngStream};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, hermitian_eigenvalues, partial_transpose_b, Mat4};
use num_complex::Complex64 as C64;
use crate::measures::{concurrence_from_sqrt, negativity_of_transposed, spin_flip_matrix, unclipped_concurrence};
use crate::mems::{build_mems, c_star, neg_star, MemsVariant, Spectrum};

/// Slack above the spectrum bound before a point counts as a violation.
pub const ENVELOPE_TOL: f64 = 1e-9;

pub const INITIAL_STEP: f64 = 0.3;
pub const MIN_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureKind {
    Concurrence,
    Negativity,
}

impl MeasureKind {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::Concurrence => "concurrence",
            MeasureKind::Negativity => "negativity",
        }
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concurrence" => Ok(MeasureKind::Concurrence),
            "negativity" => Ok(MeasureKind::Negativity),
            other => Err(Error::Domain(format!("unknown measure '{other}'"))),
        }
    }
}

/// Evaluates one measure on orbit points of a fixed spectrum.
struct OrbitEvaluator {
    p: [f64; 4],
    sqrt_p: [f64; 4],
    kind: MeasureKind,
}

impl OrbitEvaluator {
    fn new(p: &Spectrum, kind: MeasureKind) -> Self {
        let p = *p.values();
        OrbitEvaluator { p, sqrt_p: p.map(f64::sqrt), kind }
    }

    /// Unclipped measure: still informative where the clipped one is flat at 0.
    fn score(&self, u: &Mat4) -> Result<f64> {
        match self.kind {
            MeasureKind::Concurrence => {
                unclipped_concurrence(&Mat4::conjugate_diag(u, &self.sqrt_p), spin_flip_matrix)
            }
            MeasureKind::Negativity => {
                let rho = Mat4::conjugate_diag(u, &self.p);
                Ok(-2.0 * hermitian_eigenvalues(&partial_transpose_b(&rho))?[3])
            }
        }
    }

    fn value(&self, u: &Mat4) -> Result<f64> {
        match self.kind {
            MeasureKind::Concurrence => {
                // sqrt(U D U^dagger) = U sqrt(D) U^dagger
                let sqrt_rho = Mat4::conjugate_diag(u, &self.sqrt_p);
                concurrence_from_sqrt(&sqrt_rho, spin_flip_matrix)
            }
            MeasureKind::Negativity => {
                let rho = Mat4::conjugate_diag(u, &self.p);
                negativity_of_transposed(&partial_transpose_b(&rho))
            }
        }
    }
}

/// Hermitian matrix with Frobenius-orthonormal coordinates `x`.
fn hermitian_from_coords(x: &[f64; 16]) -> Mat4 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = Mat4::zeros();
    let mut k = 4;
    for i in 0..4 {
        h.0[i][i] = C64::new(x[i], 0.0);
        for j in (i + 1)..4 {
            let z = C64::new(x[k] * r, x[k + 1] * r);
            h.0[i][j] = z;
            h.0[j][i] = z.conj();
            k += 2;
        }
    }
    h
}

fn exp_i_hermitian(h: &Mat4) -> Result<Mat4> {
    let eig = hermitian_eigensystem(h)?;
    let v = eig.vectors;
    let phases = eig.values.map(|l| C64::from_polar(1.0, l));
    Ok(Mat4::from_fn(|i, j| (0..4).map(|k| v.0[i][k] * phases[k] * v.0[j][k].conj()).sum()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub spectrum: Spectrum,
    pub best_value: f64,
    pub measure_kind: MeasureKind,
    pub samples_used: usize,
    pub refined: bool,
    pub participation_ratio: f64,
    pub c_star_raw: f64,
    pub neg_star_raw: f64,
}

impl OrbitResult {
    /// Clipped spectrum bound for this row's measure.
    pub fn star_clipped(&self) -> f64 {
        match self.measure_kind {
            MeasureKind::Concurrence => self.c_star_raw.max(0.0),
            MeasureKind::Negativity => self.neg_star_raw.max(0.0),
        }
    }

    /// `best_value - bound`; positive beyond [`ENVELOPE_TOL`] refutes the bound.
    pub fn envelope_gap(&self) -> f64 {
        self.best_value - self.star_clipped()
    }

    pub fn violates_envelope(&self) -> bool {
        self.envelope_gap() > ENVELOPE_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSearch {
    /// Random CUE orbit points drawn before refinement.
    pub budget: usize,
    /// Cap on local refinement trials; zero disables refinement.
    pub refine_steps: usize,
    pub kind: MeasureKind,
    /// Adds the MEMS itself to the candidate set.
    pub inject_mems: bool,
}

impl OrbitSearch {
    pub fn new(budget: usize, refine_steps: usize, kind: MeasureKind) -> Self {
        OrbitSearch { budget, refine_steps, kind, inject_mems: false }
    }

    /// Best value of the measure on the orbit of `p`.
    ///
    /// Draws `budget` Haar unitaries and keeps the first best one. Refinement
    /// then searches `exp(i H) U` around the incumbent with CMA-ES over the
    /// 16 coordinates of `H`, starting at step [`INITIAL_STEP`] and restarting
    /// from the incumbent whenever the step falls below [`MIN_STEP`], until
    /// `refine_steps` evaluations are spent. Candidates are ranked by the
    /// unclipped measure so that the zero plateau still has a slope.
    pub fn max_over_orbit(&self, p: &Spectrum, rng: &mut RngStream) -> Result<OrbitResult> {
        if self.budget == 0 {
            return Err(Error::Domain("orbit budget must be at least 1".into()));
        }
        let eval = OrbitEvaluator::new(p, self.kind);

        let mut best_u = Mat4::identity();
        let mut best = f64::NEG_INFINITY;
        if self.inject_mems {
            let basis = MemsVariant::default().basis();
            let u = Mat4::from_fn(|r, c| basis[c][r]);
            best = eval.score(&u)?;
            best_u = u;
        }
        for _ in 0..self.budget {
            let u = sample_cue(rng);
            let v = eval.score(&u)?;
            if v > best {
                best = v;
                best_u = u;
            }
        }
        let mut samples_used = self.budget;

        if self.refine_steps > 0 {
            let mut used = 0;
            while used < self.refine_steps {
                let base = best_u;
                let out = cma::maximize::<16>(
                    |x| eval.score(&(exp_i_hermitian(&hermitian_from_coords(x))? * base)),
                    best,
                    // Per-coordinate sigma; the expected step norm is INITIAL_STEP.
                    INITIAL_STEP / 4.0,
                    MIN_STEP,
                    self.refine_steps - used,
                    rng,
                )?;
                if out.evaluations == 0 {
                    break;
                }
                used += out.evaluations;
                if out.best_value > best {
                    best = out.best_value;
                    best_u = exp_i_hermitian(&hermitian_from_coords(&out.best_x))? * base;
                }
            }
            samples_used += used;
        }
        let best_value = eval.value(&best_u)?;

        Ok(OrbitResult {
            spectrum: *p,
            best_value,
            measure_kind: self.kind,
            samples_used,
            refined: self.refine_steps > 0,
            participation_ratio: p.participation_ratio(),
            c_star_raw: c_star(p).raw,
            neg_star_raw: neg_star(p).raw,
        })
    }
}

/// Value of the measure at the MEMS point itself.
pub fn mems_value(p: &Spectrum, kind: MeasureKind) -> Result<f64> {
    let m = build_mems(p, MemsVariant::default());
    match kind {
        MeasureKind::Concurrence => crate::measures::concurrence(&m),
        MeasureKind::Negativity => crate::measures::negativity(&m),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_spectra: usize,
    pub n_unitaries_per_spectrum: usize,
    pub refine_steps: usize,
    pub measure_kind: MeasureKind,
    pub seed: u64,
    /// Number of RNG streams; spectra are split into this many contiguous
    /// blocks, each drawn sequentially from its own stream.
    pub streams: usize,
    pub inject_mems: bool,
}

impl ScanConfig {
    /// Desk-scale defaults: 1,000 spectra with 10,000 orbit points each.
    pub fn desk(measure_kind: MeasureKind, seed: u64) -> Self {
        ScanConfig {
            n_spectra: 1_000,
            n_unitaries_per_spectrum: 10_000,
            refine_steps: 2_000,
            measure_kind,
            seed,
            streams: 16,
            inject_mems: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_spectra == 0 || self.n_unitaries_per_spectrum == 0 || self.streams == 0 {
            return Err(Error::Domain("scan counts and stream count must be at least 1".into()));
        }
        Ok(())
    }

    fn search(&self) -> OrbitSearch {
        OrbitSearch {
            budget: self.n_unitaries_per_spectrum,
            refine_steps: self.refine_steps,
            kind: self.measure_kind,
            inject_mems: self.inject_mems,
        }
    }
}

/// Spectrum index ranges per stream, in order.
pub fn stream_blocks(n_spectra: usize, streams: usize) -> Vec<std::ops::Range<usize>> {
    let streams = streams.min(n_spectra).max(1);
    let base = n_spectra / streams;
    let extra = n_spectra % streams;
    let mut start = 0;
    (0..streams)
        .map(|s| {
            let len = base + usize::from(s < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// One [`OrbitResult`] per random spectrum, ordered by spectrum index.
///
/// Stream blocks run on the rayon pool when the `parallel` feature is on;
/// the rows do not depend on it.
pub fn scan(config: &ScanConfig) -> Result<Vec<OrbitResult>> {
    config.validate()?;
    let search = config.search();
    let blocks = stream_blocks(config.n_spectra, config.streams);
    #[cfg(feature = "parallel")]
    let blocks = blocks.into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let blocks = blocks.into_iter();
    let per_block: Vec<Result<Vec<OrbitResult>>> = blocks
        .enumerate()
        .map(|(stream, range)| {
            let mut rng = RngStream::new(config.seed, stream as u64);
            range
                .map(|_| {
                    let p = sample_spectrum(&mut rng);
                    search.max_over_orbit(&p, &mut rng)
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(config.n_spectra);
    for block in per_block {
        rows.extend(block?);
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankBoundStats {
    pub cases: usize,
    /// Largest `best - bound` (must stay below [`ENVELOPE_TOL`]).
    pub max_excess: f64,
    /// Smallest `best - bound` (how far the search fell short).
    pub min_gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankBoundSummary {
    pub rank2: RankBoundStats,
    pub rank3: RankBoundStats,
}

pub const RANK_BOUND_SHORTFALL: f64 = 5e-3;

impl RankBoundSummary {
    pub fn passed(&self) -> bool {
        [self.rank2, self.rank3]
            .iter()
            .all(|s| s.max_excess <= ENVELOPE_TOL && s.min_gap >= -RANK_BOUND_SHORTFALL)
    }
}

/// Uniform rank-2 spectrum `(p1, 1 - p1, 0, 0)`.
pub fn sample_rank2(rng: &mut RngStream) -> Spectrum {
    let u = rng.uniform();
    let (a, b) = if u >= 0.5 { (u, 1.0 - u) } else { (1.0 - u, u) };
    Spectrum::new_unchecked([a, b, 0.0, 0.0])
}

/// Flat rank-3 spectrum with `p4 = 0`.
pub fn sample_rank3(rng: &mut RngStream) -> Spectrum {
    let mut e: [f64; 3] = std::array::from_fn(|_| -(1.0 - rng.uniform()).ln());
    let total: f64 = e.iter().sum();
    e.iter_mut().for_each(|x| *x /= total);
    e.sort_by(|a, b| b.total_cmp(a));
    Spectrum::new_unchecked([e[0], e[1], e[2], 0.0])
}

/// Runs `search` on random rank-2 and rank-3 spectra and compares against
/// the provable bounds `p1` and `p1 - p3`.
pub fn verify_rank_bounds(n_cases: usize, search: &OrbitSearch, rng: &mut RngStream) -> Result<RankBoundSummary> {
    if n_cases == 0 {
        return Err(Error::Domain("need at least one case".into()));
    }
    let mut run = |sample: fn(&mut RngStream) -> Spectrum, bound: fn(&[f64; 4]) -> f64| -> Result<RankBoundStats> {
        let mut stats = RankBoundStats { cases: n_cases, max_excess: f64::NEG_INFINITY, min_gap: f64::INFINITY };
        for _ in 0..n_cases {
            let p = sample(rng);
            let r = search.max_over_orbit(&p, rng)?;
            let gap = r.best_value - bound(p.values());
            stats.max_excess = stats.max_excess.max(gap);
            stats.min_gap = stats.min_gap.min(gap);
        }
        Ok(stats)
    };
    let rank2 = run(sample_rank2, |p| p[0])?;
    let rank3 = run(sample_rank3, |p| p[0] - p[2])?;
    Ok(RankBoundSummary { rank2, rank3 })
}
