//! Decohered CNOT gate in the spin-boson pure-dephasing model.
//!
//! The gate Hamiltonian `-(R/4)(1 - sigma_cz) (x) sigma_tx` and both bath
//! couplings are diagonal in the joint basis `|00>, |01>, |1+>, |1->`, so
//! every density-matrix element in that basis evolves independently:
//!
//! ```text
//! rho_mn(t) = rho_mn(0) exp(-i (e_m - e_n) t) exp(i (s_m^2 - s_n^2) phi(t)) exp(-(s_m - s_n)^2 Gamma(t))
//! ```
//!
//! with gate energies `e = (0, 0, -R/2, R/2)`, branch eigenvalues `s` of the
//! system coupling operator, and decoherence functions of an Ohmic bath
//! `J(w) = K w exp(-w / w_c)`. Units have `hbar = 1`; the gate completes at
//! `t* = pi / R`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat4, ZERO};
use crate::measures::{concurrence, eof_from_concurrence, fidelity_to_pure, DensityMatrix};
use crate::mems::{eof_upper_bound, Spectrum};
use crate::quadrature::{integrate, QuadratureConfig};

/// Figure-style defaults: `R = 1`, `w_c = 5`, `beta w_c = 10`, 200 steps.
pub const DEFAULT_RABI_RATE: f64 = 1.0;
pub const DEFAULT_CUTOFF: f64 = 5.0;
pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_STEPS: usize = 200;

/// Integration cutoff in units of `w_c`; `exp(-60)` is below double precision.
const UPPER_LIMIT: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub rabi_rate: f64,
}

impl GateSpec {
    pub fn new(rabi_rate: f64) -> Result<Self> {
        if !(rabi_rate.is_finite() && rabi_rate > 0.0) {
            return Err(Error::Domain(format!("Rabi rate {rabi_rate} must be positive")));
        }
        Ok(GateSpec { rabi_rate })
    }

    pub fn gate_time(&self) -> f64 {
        PI / self.rabi_rate
    }
}

/// Ohmic bath; `beta = f64::INFINITY` means zero temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub coupling: f64,
    pub cutoff: f64,
    pub beta: f64,
}

impl BathSpec {
    pub fn new(coupling: f64, cutoff: f64, beta: f64) -> Result<Self> {
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::Domain(format!("coupling {coupling} must be >= 0")));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff {cutoff} must be > 0")));
        }
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::Domain(format!("inverse temperature {beta} must be > 0")));
        }
        Ok(BathSpec { coupling, cutoff, beta })
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        BathSpec { coupling, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingKind {
    /// `S = -sigma_cz (x) I`: only the control qubit sees the bath.
    ControlDephasing,
    /// `S = -(1/2)(1 - sigma_cz) (x) sigma_tx`: noise rides on the gate axis.
    GateAxisDephasing,
}

impl CouplingKind {
    /// Eigenvalues of the system coupling operator on `|00>, |01>, |1+>, |1->`.
    pub fn branch_eigenvalues(&self) -> [f64; 4] {
        match self {
            CouplingKind::ControlDephasing => [-1.0, -1.0, 1.0, 1.0],
            CouplingKind::GateAxisDephasing => [0.0, 0.0, -1.0, 1.0],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CouplingKind::ControlDephasing => "control",
            CouplingKind::GateAxisDephasing => "gate-axis",
        }
    }
}

/// `(Gamma(t), phi(t))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decoherence {
    pub gamma: f64,
    pub phi: f64,
}

impl Decoherence {
    fn scaled(&self, k: f64) -> Self {
        Decoherence { gamma: self.gamma * k, phi: self.phi * k }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time {t} must be finite and >= 0")));
    }
    Ok(())
}

/// Zero-temperature closed forms `(K/2) ln(1 + (w_c t)^2)` and `K (w_c t - atan(w_c t))`.
pub fn decoherence_closed_form(t: f64, bath: &BathSpec) -> Decoherence {
    let x = bath.cutoff * t;
    Decoherence {
        gamma: 0.5 * bath.coupling * (x * x).ln_1p(),
        phi: bath.coupling * (x - x.atan()),
    }
}

/// `Gamma` and `phi` by adaptive quadrature at any temperature, in the
/// scaled frequency `x = w / w_c`.
pub fn decoherence_quadrature(t: f64, bath: &BathSpec) -> Result<Decoherence> {
    check_time(t)?;
    if t == 0.0 || bath.coupling == 0.0 {
        return Ok(Decoherence { gamma: 0.0, phi: 0.0 });
    }
    let a = bath.cutoff * t;
    let thermal = bath.beta * bath.cutoff;
    let cfg = QuadratureConfig {
        initial_pieces: ((a * UPPER_LIMIT / PI).ceil() as usize).clamp(16, 4000),
        ..Default::default()
    };

    // e^{-x} coth(thermal x / 2) (1 - cos a x) / x, finite as x -> 0.
    let gamma_integrand = |x: f64| {
        if x == 0.0 {
            return if thermal.is_finite() { a * a / thermal } else { 0.0 };
        }
        let one_minus_cos = 2.0 * (0.5 * a * x).sin().powi(2);
        let coth = if thermal.is_finite() { 1.0 + 2.0 / (thermal * x).exp_m1() } else { 1.0 };
        (-x).exp() * coth * one_minus_cos / x
    };
    // e^{-x} (a x - sin a x) / x
    let phi_integrand = |x: f64| {
        let y = a * x;
        let numer = if y.abs() < 1e-3 {
            let y3 = y * y * y;
            y3 / 6.0 - y3 * y * y / 120.0
        } else {
            y - y.sin()
        };
        if x == 0.0 {
            0.0
        } else {
            (-x).exp() * numer / x
        }
    };
    let gamma = bath.coupling * integrate(gamma_integrand, 0.0, UPPER_LIMIT, cfg)?;
    let phi = bath.coupling * integrate(phi_integrand, 0.0, UPPER_LIMIT, cfg)?;
    Ok(Decoherence { gamma, phi })
}

/// Closed forms at zero temperature, quadrature otherwise.
pub fn decoherence_functions(t: f64, bath: &BathSpec) -> Result<Decoherence> {
    check_time(t)?;
    if bath.beta.is_infinite() {
        Ok(decoherence_closed_form(t, bath))
    } else {
        decoherence_quadrature(t, bath)
    }
}

/// Columns are `|00>, |01>, |1+>, |1->` in the computational basis.
fn joint_basis() -> Mat4 {
    let h = FRAC_1_SQRT_2;
    Mat4::from_real([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, h, h],
        [0.0, 0.0, h, -h],
    ])
}

fn gate_energies(gate: &GateSpec) -> [f64; 4] {
    let half = 0.5 * gate.rabi_rate;
    [0.0, 0.0, -half, half]
}

/// `(|0> + |1>)/sqrt(2) (x) |0>`
pub fn initial_state() -> DensityMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    DensityMatrix::new_unchecked(Mat4::outer(&[h, ZERO, h, ZERO]))
}

/// Decoherence-free gate output `(|00> + i|11>)/sqrt(2)`.
pub fn ideal_output() -> [C64; 4] {
    let h = FRAC_1_SQRT_2;
    [C64::new(h, 0.0), ZERO, ZERO, C64::new(0.0, h)]
}

/// Applies the exact dephasing map with precomputed decoherence functions.
pub fn evolve_with(
    initial: &DensityMatrix,
    kind: CouplingKind,
    gate: &GateSpec,
    deco: Decoherence,
    t: f64,
) -> DensityMatrix {
    let b = joint_basis();
    let eps = gate_energies(gate);
    let s = kind.branch_eigenvalues();
    let mut r = b.adjoint() * *initial.matrix() * b;
    for m in 0..4 {
        for n in 0..4 {
            let ds = s[m] - s[n];
            let angle = -(eps[m] - eps[n]) * t + (s[m] * s[m] - s[n] * s[n]) * deco.phi;
            let damping = if ds == 0.0 { 1.0 } else { (-ds * ds * deco.gamma).exp() };
            r.0[m][n] *= C64::from_polar(damping, angle);
        }
    }
    let out = (b * r * b.adjoint()).hermitian_part();
    DensityMatrix::new_unchecked(out)
}

pub fn evolve(
    initial: &DensityMatrix,
    kind: CouplingKind,
    gate: &GateSpec,
    bath: &BathSpec,
    t: f64,
) -> Result<DensityMatrix> {
    let deco = decoherence_functions(t, bath)?;
    Ok(evolve_with(initial, kind, gate, deco, t))
}

/// State reached when every coherence between distinct branches is lost.
pub fn fully_dephased(initial: &DensityMatrix, kind: CouplingKind, gate: &GateSpec, t: f64) -> DensityMatrix {
    let b = joint_basis();
    let eps = gate_energies(gate);
    let s = kind.branch_eigenvalues();
    let mut r = b.adjoint() * *initial.matrix() * b;
    for m in 0..4 {
        for n in 0..4 {
            if s[m] != s[n] {
                r.0[m][n] = ZERO;
            } else {
                r.0[m][n] *= C64::from_polar(1.0, -(eps[m] - eps[n]) * t);
            }
        }
    }
    DensityMatrix::new_unchecked((b * r * b.adjoint()).hermitian_part())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub time: f64,
    pub fidelity: f64,
    pub concurrence: f64,
    pub eof: f64,
    /// EOF upper bound from the spectrum of the state at this time.
    pub bound: f64,
    pub spectrum: [f64; 4],
}

pub fn trace_row(rho: &DensityMatrix, time: f64) -> Result<TraceRow> {
    let c = concurrence(rho)?;
    let spectrum = Spectrum::from_eigenvalues(rho.eigenvalues()?)?;
    Ok(TraceRow {
        time,
        fidelity: fidelity_to_pure(rho, &ideal_output())?,
        concurrence: c,
        eof: eof_from_concurrence(c)?,
        bound: eof_upper_bound(&spectrum),
        spectrum: *spectrum.values(),
    })
}

/// Samples `n_steps` uniform times on `[0, t*]`, each evolved from `t = 0`.
pub fn trace_run(kind: CouplingKind, gate: &GateSpec, bath: &BathSpec, n_steps: usize) -> Result<Vec<TraceRow>> {
    if n_steps < 2 {
        return Err(Error::Domain(format!("need at least 2 time steps, got {n_steps}")));
    }
    let t_end = gate.gate_time();
    let rho0 = initial_state();
    (0..n_steps)
        .map(|k| {
            let t = if k + 1 == n_steps { t_end } else { t_end * k as f64 / (n_steps - 1) as f64 };
            let rho = evolve(&rho0, kind, gate, bath, t)?;
            trace_row(&rho, t)
        })
        .collect()
}

/// Fidelity to the ideal output at `t*`.
pub fn gate_fidelity(kind: CouplingKind, gate: &GateSpec, bath: &BathSpec) -> Result<f64> {
    let t = gate.gate_time();
    let rho = evolve(&initial_state(), kind, gate, bath, t)?;
    fidelity_to_pure(&rho, &ideal_output())
}

/// Gate fidelity in the limit of infinite coupling.
pub fn fidelity_floor(kind: CouplingKind, gate: &GateSpec) -> f64 {
    let rho = fully_dephased(&initial_state(), kind, gate, gate.gate_time());
    rho.matrix().expectation(&ideal_output()).re
}

pub const CALIBRATION_TOL: f64 = 1e-9;
const MAX_COUPLING: f64 = 1e8;

/// Coupling strength whose gate fidelity equals `target`.
///
/// `Gamma` and `phi` are linear in `K`, so they are evaluated once at unit
/// coupling and rescaled. The bracket grows geometrically until the fidelity
/// drops below the target, then bisection runs to [`CALIBRATION_TOL`].
pub fn calibrate_coupling(kind: CouplingKind, gate: &GateSpec, bath_template: &BathSpec, target: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Domain(format!("target fidelity {target} outside (0, 1]")));
    }
    let t = gate.gate_time();
    let rho0 = initial_state();
    let ideal = ideal_output();
    let unit = decoherence_functions(t, &bath_template.with_coupling(1.0))?;
    let fidelity = |k: f64| rho_fidelity(&evolve_with(&rho0, kind, gate, unit.scaled(k), t), &ideal);

    if fidelity(0.0) - target <= CALIBRATION_TOL {
        return Ok(0.0);
    }
    let floor = fidelity_floor(kind, gate);
    if target <= floor {
        return Err(Error::NotBracketed { target, floor });
    }

    let mut lo = 0.0;
    let mut hi = 1e-4;
    while fidelity(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_COUPLING {
            return Err(Error::NotBracketed { target, floor });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = fidelity(mid);
        if (f - target).abs() <= CALIBRATION_TOL || hi - lo <= f64::EPSILON * hi {
            return Ok(mid);
        }
        if f > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn rho_fidelity(rho: &DensityMatrix, ideal: &[C64; 4]) -> f64 {
    rho.matrix().expectation(ideal).re
}
