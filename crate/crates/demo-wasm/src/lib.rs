//! wasm-bindgen entry points for `www/index.html`.
//!
//! Results cross the boundary as JSON strings or flat `Float64Array`s so the
//! page needs no glue beyond `JSON.parse`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use mems_core::cnot::{self, BathSpec, CouplingKind, GateSpec};
use mems_core::ensembles::RngStream;
use mems_core::measures::measure_report;
use mems_core::mems::{build_mems, c_star, eof_upper_bound, neg_star, special_condition};
use mems_core::orbit::{MeasureKind, OrbitSearch};
use mems_core::{ensembles, MemsForm, MemsVariant, Spectrum};

fn js_err(e: mems_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Normalizes and sorts four weights, builds the MEMS and reports its
/// measures next to the spectrum bounds.
#[wasm_bindgen]
pub fn mems_explorer(w1: f64, w2: f64, w3: f64, w4: f64, phi_form: bool) -> Result<String, JsError> {
    let (p, _) = Spectrum::normalize([w1, w2, w3, w4]).map_err(js_err)?;
    let form = if phi_form { MemsForm::Phi } else { MemsForm::Psi };
    let rho = build_mems(&p, MemsVariant { form, ..Default::default() });
    let report = measure_report(&rho).map_err(js_err)?;
    let m = rho.matrix();
    let re: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| m.0[i][j].re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| m.0[i][j].im).collect()).collect();
    Ok(json!({
        "spectrum": p.values(),
        "re": re,
        "im": im,
        "report": report,
        "c_star": c_star(&p).clipped,
        "neg_star": neg_star(&p).clipped,
        "eof_bound": eof_upper_bound(&p),
        "special_condition": special_condition(&p).satisfied,
    })
    .to_string())
}

/// Orbit maxima for random spectra as flat triples
/// `(participation ratio, best value, spectrum bound)`.
#[wasm_bindgen]
pub fn orbit_scatter(n_spectra: usize, n_unitaries: usize, refine: usize, negativity: bool, seed: u64) -> Result<Vec<f64>, JsError> {
    let kind = if negativity { MeasureKind::Negativity } else { MeasureKind::Concurrence };
    let search = OrbitSearch::new(n_unitaries.max(1), refine, kind);
    let mut rng = RngStream::new(seed, 0);
    let mut out = Vec::with_capacity(3 * n_spectra);
    for _ in 0..n_spectra {
        let p = ensembles::sample_spectrum(&mut rng);
        let r = search.max_over_orbit(&p, &mut rng).map_err(js_err)?;
        out.extend([r.participation_ratio, r.best_value, r.star_clipped()]);
    }
    Ok(out)
}

/// Calibrates the coupling to `target_fidelity` and returns the trace with
/// the calibrated K.
#[wasm_bindgen]
pub fn cnot_trace(gate_axis: bool, target_fidelity: f64, steps: usize) -> Result<String, JsError> {
    let kind = if gate_axis { CouplingKind::GateAxisDephasing } else { CouplingKind::ControlDephasing };
    let gate = GateSpec::new(cnot::DEFAULT_RABI_RATE).map_err(js_err)?;
    let template = BathSpec::new(0.0, cnot::DEFAULT_CUTOFF, cnot::DEFAULT_BETA).map_err(js_err)?;
    let k = cnot::calibrate_coupling(kind, &gate, &template, target_fidelity).map_err(js_err)?;
    let rows = cnot::trace_run(kind, &gate, &template.with_coupling(k), steps.max(2)).map_err(js_err)?;
    Ok(json!({ "coupling": kind.name(), "K": k, "rows": rows }).to_string())
}
