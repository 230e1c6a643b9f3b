//! Maximally entangled mixed states and the spectrum-only functions that
//! bound entanglement on a unitary orbit.
//!
//! For a spectrum `p1 >= p2 >= p3 >= p4`, the state
//!
//! ```text
//! M = p1 |Psi-><Psi-| + p2 |00><00| + p3 |Psi+><Psi+| + p4 |11><11|
//! ```
//!
//! has concurrence `max(0, p1 - p3 - 2 sqrt(p2 p4))` and negativity
//! `max(0, -p2 - p4 + sqrt((p1 - p3)^2 + (p2 - p4)^2))`. Those closed forms
//! are conjectured to be the largest values reachable by any unitary acting
//! on a state with that spectrum, and proven for rank below four.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat4, ZERO};
use crate::measures::{eof_from_concurrence, DensityMatrix};

pub const SPECTRUM_SUM_TOL: f64 = 1e-12;
pub const SPECIAL_CONDITION_TOL: f64 = 1e-10;

/// Four eigenvalues in descending order summing to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum([f64; 4]);

impl Spectrum {
    /// Rejects unsorted, negative or unnormalized input; never reorders.
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpectrum(format!("non-finite entry in {p:?}")));
        }
        if p[3] < 0.0 {
            return Err(Error::InvalidSpectrum(format!("negative eigenvalue in {p:?}")));
        }
        if !p.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpectrum(format!("{p:?} is not in descending order")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SPECTRUM_SUM_TOL {
            return Err(Error::InvalidSpectrum(format!("{p:?} sums to {total}, not 1")));
        }
        Ok(Spectrum(p))
    }

    pub(crate) fn new_unchecked(p: [f64; 4]) -> Self {
        Spectrum(p)
    }

    /// Sorts descending and rescales to unit sum. The flag reports whether
    /// the input needed either fix.
    pub fn normalize(raw: [f64; 4]) -> Result<(Self, bool)> {
        if raw.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidSpectrum(format!("cannot normalize {raw:?}")));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidSpectrum("all weights are zero".into()));
        }
        let mut p = if (total - 1.0).abs() <= SPECTRUM_SUM_TOL { raw } else { raw.map(|x| x / total) };
        p.sort_by(|a, b| b.total_cmp(a));
        let changed = p != raw;
        Ok((Spectrum(p), changed))
    }

    /// Spectrum of a computed density matrix: roundoff negatives are
    /// clipped and the result renormalized.
    pub fn from_eigenvalues(vals: [f64; 4]) -> Result<Self> {
        if vals.iter().any(|&v| v < -1e-9) {
            return Err(Error::InvalidSpectrum(format!("eigenvalues {vals:?} are not PSD")));
        }
        Ok(Self::normalize(vals.map(|v| v.max(0.0)))?.0)
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn participation_ratio(&self) -> f64 {
        1.0 / self.purity()
    }

    pub fn rank(&self) -> usize {
        self.0.iter().filter(|&&x| x > 0.0).count()
    }
}

/// Basis in which the MEMS is diagonal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemsForm {
    /// `Psi-, |00>, Psi+, |11>`
    #[default]
    Psi,
    /// `Phi-, |01>, Phi+, |10>`
    Phi,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemsVariant {
    pub form: MemsForm,
    /// Exchange the two Bell states (`Psi- <-> Psi+` or `Phi- <-> Phi+`).
    pub swap_bell: bool,
    /// Exchange the two product states (`00 <-> 11` or `01 <-> 10`).
    pub swap_product: bool,
}

impl MemsVariant {
    pub fn all() -> impl Iterator<Item = MemsVariant> {
        [MemsForm::Psi, MemsForm::Phi].into_iter().flat_map(|form| {
            [(false, false), (true, false), (false, true), (true, true)]
                .into_iter()
                .map(move |(swap_bell, swap_product)| MemsVariant { form, swap_bell, swap_product })
        })
    }

    /// Orthonormal eigenbasis, in the order paired with `p1..p4`.
    pub fn basis(&self) -> [[C64; 4]; 4] {
        let h = FRAC_1_SQRT_2;
        let ket = |pairs: &[(usize, f64)]| {
            let mut v = [ZERO; 4];
            for &(k, a) in pairs {
                v[k] = C64::new(a, 0.0);
            }
            v
        };
        // (bell minus, bell plus, first product, second product)
        let (minus, plus, prod_a, prod_b) = match self.form {
            MemsForm::Psi => (
                ket(&[(1, h), (2, -h)]),
                ket(&[(1, h), (2, h)]),
                ket(&[(0, 1.0)]),
                ket(&[(3, 1.0)]),
            ),
            MemsForm::Phi => (
                ket(&[(0, h), (3, -h)]),
                ket(&[(0, h), (3, h)]),
                ket(&[(1, 1.0)]),
                ket(&[(2, 1.0)]),
            ),
        };
        let (b1, b3) = if self.swap_bell { (plus, minus) } else { (minus, plus) };
        let (b2, b4) = if self.swap_product { (prod_b, prod_a) } else { (prod_a, prod_b) };
        [b1, b2, b3, b4]
    }
}

/// Maximally entangled mixed state with spectrum `p`.
pub fn build_mems(p: &Spectrum, variant: MemsVariant) -> DensityMatrix {
    let basis = variant.basis();
    let u = Mat4::from_fn(|r, c| basis[c][r]);
    DensityMatrix::new_unchecked(Mat4::conjugate_diag(&u, p.values()))
}

/// `(max(0, raw), raw)` pair for the spectrum-only bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarValue {
    pub clipped: f64,
    pub raw: f64,
}

impl StarValue {
    fn from_raw(raw: f64) -> Self {
        StarValue { clipped: raw.max(0.0), raw }
    }
}

/// `p1 - p3 - 2 sqrt(p2 p4)`, range `[-1/2, 1]`.
pub fn c_star(p: &Spectrum) -> StarValue {
    let [p1, p2, p3, p4] = p.0;
    StarValue::from_raw(p1 - p3 - 2.0 * (p2 * p4).sqrt())
}

/// `-p2 - p4 + sqrt((p1 - p3)^2 + (p2 - p4)^2)`, the doubled negativity of the MEMS.
pub fn neg_star(p: &Spectrum) -> StarValue {
    let [p1, p2, p3, p4] = p.0;
    StarValue::from_raw(-p2 - p4 + (p1 - p3).hypot(p2 - p4))
}

/// Largest entanglement of formation reachable on the orbit of `p`.
///
/// Uses `sqrt(1 - C^2)` inside the entropy argument, the same expression that
/// maps concurrence to EOF everywhere else.
pub fn eof_upper_bound(p: &Spectrum) -> f64 {
    eof_from_concurrence(c_star(p).clipped.min(1.0)).expect("clipped concurrence is in [0, 1]")
}

/// Werner state: singlet weight `p1`, the other three Bell states share `1 - p1`.
pub fn build_werner(p1: f64) -> Result<DensityMatrix> {
    if !(0.25..=1.0).contains(&p1) {
        return Err(Error::Domain(format!("Werner weight {p1} outside [1/4, 1]")));
    }
    let q = (1.0 - p1) / 3.0;
    // Psi- plus the isotropic remainder: q I + (p1 - q) |Psi-><Psi-|.
    let h = FRAC_1_SQRT_2;
    let singlet = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
    Ok(DensityMatrix::new_unchecked(
        Mat4::identity().scale(q) + Mat4::outer(&singlet).scale(p1 - q),
    ))
}

pub fn werner_spectrum(p1: f64) -> Result<Spectrum> {
    if !(0.25..=1.0).contains(&p1) {
        return Err(Error::Domain(format!("Werner weight {p1} outside [1/4, 1]")));
    }
    let q = (1.0 - p1) / 3.0;
    Ok(Spectrum([p1, q, q, q]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialCondition {
    pub satisfied: bool,
    /// Unnormalized spectrum of the remainder after removing the
    /// `C*`-weighted leading eigenprojector.
    pub rho4_spectrum: [f64; 4],
    /// Purity of the normalized remainder; `None` when it has zero weight.
    pub rho4_purity: Option<f64>,
}

/// Tests `p3 = p2 + p4 - sqrt(p2 p4)`, under which the remainder has purity
/// exactly 1/3 and `C*` is provably the orbit maximum.
pub fn special_condition(p: &Spectrum) -> SpecialCondition {
    let [_, p2, p3, p4] = p.0;
    let g = (p2 * p4).sqrt();
    let satisfied = (p3 - (p2 + p4 - g)).abs() <= SPECIAL_CONDITION_TOL;
    let rho4_spectrum = [p3 + 2.0 * g, p2, p3, p4];
    let weight: f64 = rho4_spectrum.iter().sum();
    let rho4_purity = (weight > 0.0)
        .then(|| rho4_spectrum.iter().map(|x| (x / weight) * (x / weight)).sum());
    SpecialCondition { satisfied, rho4_spectrum, rho4_purity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use crate::measures::{concurrence, negativity, purity_report};

    fn spec(p: [f64; 4]) -> Spectrum {
        Spectrum::new(p).unwrap()
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new([0.5, 0.3, 0.4, 0.2]).is_err());
        assert!(Spectrum::new([0.5, 0.3, 0.2, 0.1]).is_err());
        assert!(Spectrum::new([1.1, 0.0, 0.0, -0.1]).is_err());
        assert!(Spectrum::new([0.4, 0.3, 0.2, 0.1]).is_ok());
        let (p, changed) = Spectrum::normalize([0.2, 0.4, 0.1, 0.3]).unwrap();
        assert!(changed);
        assert_eq!(p.values(), &[0.4, 0.3, 0.2, 0.1]);
        let (_, changed) = Spectrum::normalize([0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!(!changed);
    }

    #[test]
    fn c_star_examples() {
        assert_eq!(c_star(&spec([1.0, 0.0, 0.0, 0.0])), StarValue { clipped: 1.0, raw: 1.0 });
        assert_eq!(c_star(&spec([0.25; 4])), StarValue { clipped: 0.0, raw: -0.5 });
        let c = c_star(&spec([0.5, 0.3, 0.2, 0.0]));
        assert!((c.raw - 0.3).abs() < 1e-15 && (c.clipped - 0.3).abs() < 1e-15);
    }

    #[test]
    fn neg_star_examples() {
        assert_eq!(neg_star(&spec([1.0, 0.0, 0.0, 0.0])).raw, 1.0);
        let flat = neg_star(&spec([0.25; 4]));
        assert_eq!((flat.clipped, flat.raw), (0.0, -0.5));
        let n = neg_star(&spec([0.5, 0.25, 0.2, 0.05]));
        assert!((n.raw - (-0.3 + 0.13f64.sqrt())).abs() < 1e-15);
        assert!((n.raw - 0.060555).abs() < 1e-6);
    }

    #[test]
    fn eof_bound_examples() {
        assert!((eof_upper_bound(&spec([1.0, 0.0, 0.0, 0.0])) - 1.0).abs() < 1e-15);
        assert_eq!(eof_upper_bound(&spec([0.25; 4])), 0.0);
        assert!((eof_upper_bound(&spec([0.5, 0.25, 0.2, 0.05])) - 0.01587).abs() < 1e-4);
    }

    #[test]
    fn mems_examples() {
        let rank1 = build_mems(&spec([1.0, 0.0, 0.0, 0.0]), MemsVariant::default());
        assert!((concurrence(&rank1).unwrap() - 1.0).abs() < 1e-12);

        let p = spec([0.5, 0.25, 0.2, 0.05]);
        let m = build_mems(&p, MemsVariant::default());
        let expected = 0.3 - 2.0 * 0.0125f64.sqrt();
        assert!((concurrence(&m).unwrap() - expected).abs() < 1e-10);
        assert!((expected - 0.076393).abs() < 1e-6);
        assert!((negativity(&m).unwrap() - 0.060555).abs() < 1e-6);

        let flat = build_mems(&spec([0.25; 4]), MemsVariant::default());
        assert_eq!(concurrence(&flat).unwrap(), 0.0);
    }

    #[test]
    fn variants_share_measures_and_spectrum() {
        let p = spec([0.45, 0.3, 0.15, 0.1]);
        let c0 = concurrence(&build_mems(&p, MemsVariant::default())).unwrap();
        let n0 = negativity(&build_mems(&p, MemsVariant::default())).unwrap();
        for v in MemsVariant::all() {
            let m = build_mems(&p, v);
            assert!((concurrence(&m).unwrap() - c0).abs() < 1e-10, "{v:?}");
            assert!((negativity(&m).unwrap() - n0).abs() < 1e-10, "{v:?}");
            let vals = hermitian_eigenvalues(m.matrix()).unwrap();
            for (a, b) in vals.iter().zip(p.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn werner_examples() {
        let singlet = build_werner(1.0).unwrap();
        assert!((concurrence(&singlet).unwrap() - 1.0).abs() < 1e-12);
        let mixed = build_werner(0.25).unwrap();
        assert!((*mixed.matrix() - Mat4::identity().scale(0.25)).max_abs() < 1e-15);
        assert_eq!(concurrence(&mixed).unwrap(), 0.0);

        let w = build_werner(0.75).unwrap();
        assert!((concurrence(&w).unwrap() - 0.5).abs() < 1e-10);
        let q: f64 = 0.25 / 3.0;
        let purity = 0.75f64.powi(2) + 3.0 * q * q;
        assert!((purity_report(&w).purity - purity).abs() < 1e-14);
        assert!((purity - 0.583333).abs() < 1e-6);

        let half = build_werner(0.5).unwrap();
        let r = purity_report(&half);
        assert!((r.purity - 1.0 / 3.0).abs() < 1e-14 && r.separable_by_purity);
        assert!(concurrence(&half).unwrap() < 1e-12);

        assert!(build_werner(0.2).is_err());
        assert!(build_werner(1.01).is_err());
    }

    #[test]
    fn werner_matches_bell_mixture() {
        let p1 = 0.6;
        let q = (1.0 - p1) / 3.0;
        let p = spec([p1, q, q, q]);
        // Psi- with weight p1, then 00/11 and Psi+ share q: same as the isotropic mixture.
        let from_mems = build_mems(&p, MemsVariant::default());
        let vals = hermitian_eigenvalues(build_werner(p1).unwrap().matrix()).unwrap();
        for (a, b) in vals.iter().zip(p.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((concurrence(&from_mems).unwrap() - (2.0 * p1 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn special_condition_examples() {
        let w = special_condition(&werner_spectrum(0.7).unwrap());
        assert!(w.satisfied);
        assert!((w.rho4_purity.unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let s = special_condition(&spec([0.4, 0.3, 0.2, 0.1]));
        assert!(!s.satisfied);
        assert!((0.3 + 0.1 - 0.03f64.sqrt() - 0.226795).abs() < 1e-6);

        let pure = special_condition(&spec([1.0, 0.0, 0.0, 0.0]));
        assert!(pure.satisfied);
        assert_eq!(pure.rho4_purity, None);
        assert_eq!(pure.rho4_spectrum, [0.0; 4]);
    }
}
