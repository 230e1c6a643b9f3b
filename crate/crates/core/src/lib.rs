//! Two-qubit entanglement laboratory.
//!
//! - [`linalg`]: fixed-size complex matrices, Jacobi eigensolver, partial operations.
//! - [`measures`]: concurrence, entanglement of formation, negativity, purity.
//! - [`mems`]: maximally entangled mixed states and spectrum-only bounds.
//! - [`ensembles`]: seeded spectra, Haar unitaries and random states.
//! - [`orbit`]: Monte Carlo search for the most entangled point of a unitary orbit.
//! - [`cnot`]: CNOT gate under pure-dephasing spin-boson decoherence.
//! - [`selftest`]: the acceptance criteria as runnable checks.

mod cma;
pub mod cnot;
pub mod ensembles;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod mems;
pub mod oracles;
pub mod orbit;
pub mod quadrature;
pub mod selftest;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Mat2, Mat4, MatrixJson};
pub use measures::{DensityMatrix, MeasureReport};
pub use mems::{MemsForm, MemsVariant, Spectrum};
