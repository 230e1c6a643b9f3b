//! Text output: 12-significant-digit number formatting, `#`-prefixed
//! manifest headers and the scan / trace CSV layouts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cnot::{BathSpec, CouplingKind, GateSpec, TraceRow};
use crate::orbit::{OrbitResult, ScanConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting: shortest of fixed or scientific notation with
/// twelve significant digits and trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT_DIGITS as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to the value printed by [`fmt_sig`], for JSON emission.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        fmt_sig(x).parse().unwrap_or(x)
    } else {
        x
    }
}

/// Run description embedded at the top of every dataset.
///
/// Only reproducible fields go into the file so that identical runs produce
/// identical bytes; wall-clock timing is reported separately by the caller.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest { subcommand: subcommand.into(), ..Default::default() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn header(&self) -> String {
        let mut out = format!("# memslab {VERSION} {}\n", self.subcommand);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }
}

pub fn scan_manifest(cfg: &ScanConfig) -> RunManifest {
    RunManifest::new("scan")
        .seed(cfg.seed)
        .param("measure", cfg.measure_kind.name())
        .param("refine", cfg.refine_steps)
        .param("spectra", cfg.n_spectra)
        .param("streams", cfg.streams)
        .param("unitaries", cfg.n_unitaries_per_spectrum)
}

pub fn cnot_manifest(kind: CouplingKind, gate: &GateSpec, bath: &BathSpec, steps: usize) -> RunManifest {
    RunManifest::new("cnot")
        .param("K", fmt_sig(bath.coupling))
        .param("R", fmt_sig(gate.rabi_rate))
        .param("beta", fmt_sig(bath.beta))
        .param("coupling", kind.name())
        .param("steps", steps)
        .param("wc", fmt_sig(bath.cutoff))
}

pub const SCAN_COLUMNS: &str =
    "spectrum_index,p1,p2,p3,p4,participation_ratio,c_star_raw,neg_star_raw,measure_kind,best_value,samples_used,refined";

pub fn scan_csv(manifest: &RunManifest, rows: &[OrbitResult]) -> String {
    let mut out = manifest.header();
    out.push_str(SCAN_COLUMNS);
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let p = r.spectrum.values();
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(p[0]),
            fmt_sig(p[1]),
            fmt_sig(p[2]),
            fmt_sig(p[3]),
            fmt_sig(r.participation_ratio),
            fmt_sig(r.c_star_raw),
            fmt_sig(r.neg_star_raw),
            r.measure_kind.name(),
            fmt_sig(r.best_value),
            r.samples_used,
            r.refined,
        );
    }
    out
}

pub const TRACE_COLUMNS: &str = "t,fidelity,concurrence,eof,bound_eq18,p1,p2,p3,p4";

pub fn trace_csv(manifest: &RunManifest, rows: &[TraceRow]) -> String {
    let mut out = manifest.header();
    out.push_str(TRACE_COLUMNS);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_sig(r.time),
            fmt_sig(r.fidelity),
            fmt_sig(r.concurrence),
            fmt_sig(r.eof),
            fmt_sig(r.bound),
            fmt_sig(r.spectrum[0]),
            fmt_sig(r.spectrum[1]),
            fmt_sig(r.spectrum[2]),
            fmt_sig(r.spectrum[3]),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e15), "1e15");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
    }

    #[test]
    fn manifest_header_is_sorted_and_prefixed() {
        let m = RunManifest::new("scan").seed(7).param("spectra", 10).param("measure", "concurrence");
        let h = m.header();
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert_eq!(h.lines().nth(1), Some("# seed=7"));
        assert_eq!(h.lines().nth(2), Some("# measure=concurrence"));
    }
}
