use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use mems_core::cnot::{self, BathSpec, CouplingKind, GateSpec};
use mems_core::ensembles::{
    sample_cue, sample_density, sample_gue, sample_local_unitary, sample_pure, sample_random_state, sample_spectrum,
    RngStream,
};
use mems_core::linalg::{hermitian_eigensystem, hermitian_eigenvalues, psd_sqrt, tensor, Mat2, Mat4};
use mems_core::measures::{
    concurrence, eof, negativity, purity_of, reduced_entropy, spin_flip_matrix, DensityMatrix, SEPARABLE_PURITY,
};
use mems_core::mems::{build_mems, c_star, neg_star};
use mems_core::oracles::{concurrence_nonhermitian, negativity_charpoly};
use mems_core::{MemsVariant, Spectrum};

fn state(seed: u64) -> DensityMatrix {
    sample_random_state(&mut RngStream::new(seed, 0))
}

fn max_diff(a: &Mat4, b: &Mat4) -> f64 {
    (*a - *b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn local_unitaries_leave_measures_unchanged(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1);
        let rho = sample_random_state(&mut rng);
        let moved = rho.conjugated(&sample_local_unitary(&mut rng));
        prop_assert!((concurrence(&rho)? - concurrence(&moved)?).abs() < 1e-10);
        prop_assert!((negativity(&rho)? - negativity(&moved)?).abs() < 1e-10);
        prop_assert!((eof(&rho)? - eof(&moved)?).abs() < 1e-10);
        prop_assert!((purity_of(rho.matrix()) - purity_of(moved.matrix())).abs() < 1e-12);
    }

    #[test]
    fn measures_are_convex(a in any::<u64>(), b in any::<u64>(), q in 0.0..=1.0f64) {
        let (x, y) = (state(a), state(b));
        let mix = DensityMatrix::mix(&x, &y, q);
        prop_assert!(concurrence(&mix)? <= q * concurrence(&x)? + (1.0 - q) * concurrence(&y)? + 1e-10);
        prop_assert!(negativity(&mix)? <= q * negativity(&x)? + (1.0 - q) * negativity(&y)? + 1e-10);
    }

    #[test]
    fn entangled_exactly_when_not_ppt(seed in any::<u64>()) {
        let rho = state(seed);
        prop_assert_eq!(concurrence(&rho)? > 1e-8, negativity(&rho)? > 1e-8);
    }

    #[test]
    fn low_purity_states_are_separable(seed in any::<u64>(), w in 0.0..1.0f64) {
        // Mixing towards I/4 pushes most draws below purity 1/3.
        let rho = DensityMatrix::mix(&state(seed), &DensityMatrix::maximally_mixed(), w);
        if purity_of(rho.matrix()) <= SEPARABLE_PURITY {
            prop_assert!(concurrence(&rho)? <= 1e-8);
            prop_assert!(negativity(&rho)? <= 1e-8);
        }
    }

    #[test]
    fn pure_state_eof_is_reduced_entropy(seed in any::<u64>()) {
        let psi = sample_pure::<4>(&mut RngStream::new(seed, 2));
        let rho = DensityMatrix::pure(&psi)?;
        prop_assert!((eof(&rho)? - reduced_entropy(&rho)?).abs() < 1e-10);
        // Pure-state concurrence is 2|ad - bc|.
        let c = 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm();
        prop_assert!((concurrence(&rho)? - c).abs() < 1e-10);
    }

    #[test]
    fn concurrence_routes_agree(seed in any::<u64>()) {
        let rho = state(seed);
        let s = psd_sqrt(rho.matrix())?;
        let r = s * spin_flip_matrix(rho.matrix()) * s;
        let mut lambda = hermitian_eigenvalues(&r.hermitian_part())?.map(|x| x.max(0.0).sqrt());
        lambda.sort_by(|a, b| b.total_cmp(a));
        let hermitian_route = (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0);
        let c = concurrence(&rho)?;
        prop_assert!((c - hermitian_route).abs() < 1e-8);
        prop_assert!((c - concurrence_nonhermitian(rho.matrix())).abs() < 1e-8);
        prop_assert!((negativity(&rho)? - negativity_charpoly(rho.matrix())).abs() < 1e-8);
    }

    #[test]
    fn mems_round_trip_and_tightness(seed in any::<u64>()) {
        let p = sample_spectrum(&mut RngStream::new(seed, 3));
        for v in MemsVariant::all() {
            let m = build_mems(&p, v);
            let eig = m.eigenvalues()?;
            for (a, b) in eig.iter().zip(p.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!((concurrence(&m)? - c_star(&p).clipped).abs() < 1e-10);
            prop_assert!((negativity(&m)? - neg_star(&p).clipped).abs() < 1e-10);
        }
    }

    #[test]
    fn star_bounds_share_sign(seed in any::<u64>()) {
        let p = sample_spectrum(&mut RngStream::new(seed, 4));
        let (c, n) = (c_star(&p).raw, neg_star(&p).raw);
        if c.abs() > 1e-12 && n.abs() > 1e-12 {
            prop_assert_eq!(c > 0.0, n > 0.0);
        }
        prop_assert!(c <= p.values()[0] - p.values()[2] + 1e-15);
    }

    #[test]
    fn star_bound_reduces_on_low_rank(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let mut v = [a, b, c];
        v.sort_by(|x, y| y.total_cmp(x));
        let total: f64 = v.iter().sum::<f64>().max(1e-9);
        let (p3, _) = Spectrum::normalize([v[0] / total, v[1] / total, v[2] / total, 0.0])?;
        let q = p3.values();
        prop_assert!((c_star(&p3).raw - (q[0] - q[2])).abs() < 1e-15);
        let (p2, _) = Spectrum::normalize([v[0], v[1], 0.0, 0.0].map(|x| x + 1e-3))?;
        let (p2, _) = Spectrum::normalize([p2.values()[0], p2.values()[1] + p2.values()[2] + p2.values()[3], 0.0, 0.0])?;
        prop_assert!((c_star(&p2).raw - p2.values()[0]).abs() < 1e-15);
    }

    #[test]
    fn eigensystem_invariants(seed in any::<u64>()) {
        let h = sample_gue::<4>(&mut RngStream::new(seed, 5));
        let e = hermitian_eigensystem(&h)?;
        let trace: f64 = e.values.iter().sum();
        prop_assert!((trace - h.trace().re).abs() < 1e-12 * (1.0 + h.max_abs()));
        let fro: f64 = e.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((fro - h.frobenius_norm()).abs() < 1e-12 * (1.0 + fro));
        prop_assert!(max_diff(&e.reconstruct(), &h) <= 1e-11 * (1.0 + h.max_abs()));
        prop_assert!(e.vectors.unitarity_error() <= 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn tensor_mixed_product(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 6);
        let m: [Mat2; 4] = std::array::from_fn(|_| sample_gue::<2>(&mut rng));
        let lhs = tensor(&m[0], &m[1]) * tensor(&m[2], &m[3]);
        let rhs = tensor(&(m[0] * m[2]), &(m[1] * m[3]));
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back(seed in any::<u64>()) {
        let rho = state(seed);
        let s = psd_sqrt(rho.matrix())?;
        prop_assert!(max_diff(&(s * s), rho.matrix()) < 1e-12);
        prop_assert!(max_diff(&(s * *rho.matrix()), &(*rho.matrix() * s)) < 1e-12);
        prop_assert!(s.hermitian_deviation() < 1e-12);
    }

    #[test]
    fn dephasing_preserves_state_and_populations(k in 0.0..0.2f64, frac in 0.0..=1.0f64, gate_axis in any::<bool>()) {
        let kind = if gate_axis { CouplingKind::GateAxisDephasing } else { CouplingKind::ControlDephasing };
        let gate = GateSpec::new(1.0)?;
        let bath = BathSpec::new(k, 5.0, 2.0)?;
        let rho0 = cnot::initial_state();
        let rho = cnot::evolve(&rho0, kind, &gate, &bath, frac * gate.gate_time())?;
        let m = rho.matrix();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-14);
        prop_assert!(m.hermitian_deviation() < 1e-15);
        prop_assert!(hermitian_eigenvalues(m)?[3] >= -1e-10);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let basis = [[o, z, z, z], [z, o, z, z], [z, z, h, h], [z, z, h, -h]];
        for b in &basis {
            prop_assert!((m.expectation(b).re - rho0.matrix().expectation(b).re).abs() < 1e-14);
        }
    }
}

#[test]
fn fidelity_falls_and_eof_never_rises_with_coupling() {
    let gate = GateSpec::new(1.0).unwrap();
    for kind in [CouplingKind::ControlDephasing, CouplingKind::GateAxisDephasing] {
        let mut last_f = f64::INFINITY;
        let mut last_e = f64::INFINITY;
        for i in 0..=40 {
            let bath = BathSpec::new(0.002 * i as f64, 5.0, 2.0).unwrap();
            let f = cnot::gate_fidelity(kind, &gate, &bath).unwrap();
            let rho = cnot::evolve(&cnot::initial_state(), kind, &gate, &bath, gate.gate_time()).unwrap();
            let e = eof(&rho).unwrap();
            assert!(f < last_f, "{} K={}: {f} !< {last_f}", kind.name(), bath.coupling);
            assert!(e <= last_e + 1e-12);
            last_f = f;
            last_e = e;
        }
    }
}

#[test]
fn ordered_flat_spectrum_moments() {
    let mut rng = RngStream::new(11, 0);
    let n = 200_000;
    let (mut p1, mut p4) = (0.0, 0.0);
    for _ in 0..n {
        let p = sample_spectrum(&mut rng);
        p1 += p.values()[0];
        p4 += p.values()[3];
    }
    // E[max] = (1 + 1/2 + 1/3 + 1/4) / 4 and E[min] = 1/16 for the flat simplex.
    assert!((p1 / n as f64 - 25.0 / 48.0).abs() < 0.005);
    assert!((p4 / n as f64 - 0.0625).abs() < 0.003);
}

#[test]
fn haar_entries_follow_beta_1_3() {
    // |U_00|^2 of a 4x4 Haar unitary has CDF 1 - (1 - x)^3; left multiplication
    // by a fixed unitary must not change that.
    let mut rng = RngStream::new(12, 0);
    let fixed = sample_cue(&mut rng);
    let n = 20_000;
    let mut plain: Vec<f64> = Vec::with_capacity(n);
    let mut shifted: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let u = sample_cue(&mut rng);
        plain.push(u.0[0][0].norm_sqr());
        shifted.push((fixed * u).0[1][2].norm_sqr());
    }
    for mut xs in [plain, shifted] {
        xs.sort_by(|a, b| a.total_cmp(b));
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (1.0 - x).powi(3);
                (cdf - i as f64 / n as f64).abs().max((cdf - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic.
        assert!(ks < 1.63 / (n as f64).sqrt(), "KS {ks}");
    }
}

#[test]
fn fixed_spectrum_density_has_that_spectrum() {
    let mut rng = RngStream::new(13, 0);
    for _ in 0..100 {
        let p = sample_spectrum(&mut rng);
        let rho = sample_density(&mut rng, &p);
        for (a, b) in rho.eigenvalues().unwrap().iter().zip(p.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
