use mems_demo::{cnot_trace, mems_explorer, orbit_scatter};

#[test]
fn explorer_normalizes_and_reports_tight_bounds() {
    let v: serde_json::Value = serde_json::from_str(&mems_explorer(2.0, 6.0, 1.5, 0.5, false).unwrap()).unwrap();
    let p: Vec<f64> = v["spectrum"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(p, vec![0.6, 0.2, 0.15, 0.05]);
    let c = v["report"]["concurrence"].as_f64().unwrap();
    assert!((c - v["c_star"].as_f64().unwrap()).abs() < 1e-10);
    let n = v["report"]["negativity"].as_f64().unwrap();
    assert!((n - v["neg_star"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn scatter_stays_under_the_bound() {
    let data = orbit_scatter(12, 200, 100, false, 3).unwrap();
    assert_eq!(data.len(), 36);
    for t in data.chunks(3) {
        assert!((1.0..=4.0 + 1e-12).contains(&t[0]));
        assert!(t[1] <= t[2] + 1e-9);
    }
}

#[test]
fn trace_hits_the_target_fidelity() {
    let v: serde_json::Value = serde_json::from_str(&cnot_trace(true, 0.9, 30).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 30);
    let f = rows.last().unwrap()["fidelity"].as_f64().unwrap();
    assert!((f - 0.9).abs() < 1e-6);
}
