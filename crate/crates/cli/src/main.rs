use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mems_core::cnot::{self, BathSpec, CouplingKind, GateSpec};
use mems_core::io::{cnot_manifest, fmt_sig, round_sig, scan_csv, scan_manifest, trace_csv};
use mems_core::measures::{measure_report, DensityMatrix};
use mems_core::mems::{build_mems, c_star, eof_upper_bound, neg_star, special_condition};
use mems_core::orbit::{scan, MeasureKind, ScanConfig};
use mems_core::selftest::{run_all, run_criterion, SelftestOptions};
use mems_core::{Error, MatrixJson, MemsForm, MemsVariant, Spectrum};

#[derive(Parser)]
#[command(name = "memslab", version, about = "Two-qubit entanglement laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence, EOF, negativity and purity of a density matrix in Matrix JSON.
    Measure {
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the maximally entangled mixed state for a spectrum.
    Mems(MemsArgs),
    /// Maximize entanglement over unitary orbits of random spectra.
    Scan(ScanArgs),
    /// Decohered CNOT trace, or coupling calibration with --calibrate.
    Cnot(CnotArgs),
    /// Run the acceptance criteria.
    Selftest {
        #[arg(long)]
        fast: bool,
        /// Run a single criterion (1-9).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        criterion: Option<u8>,
        #[arg(long, default_value_t = SelftestOptions::default().seed)]
        seed: u64,
        /// Directory for the determinism check's files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Psi,
    Phi,
}

#[derive(Args)]
struct MemsArgs {
    /// Eigenvalues p1,p2,p3,p4 (descending, summing to 1).
    #[arg(long, value_parser = parse_weights, allow_hyphen_values = true)]
    p: [f64; 4],
    #[arg(long, value_enum, default_value = "psi")]
    variant: FormArg,
    #[arg(long)]
    swap_bell: bool,
    #[arg(long)]
    swap_product: bool,
    /// Also write the state as Matrix JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Concurrence,
    Negativity,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 1000)]
    spectra: usize,
    #[arg(long, default_value_t = 10_000)]
    unitaries: usize,
    #[arg(long, default_value_t = 2000)]
    refine: usize,
    #[arg(long, value_enum, default_value = "concurrence")]
    measure: MeasureArg,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    streams: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CouplingArg {
    Control,
    GateAxis,
}

#[derive(Args)]
struct CnotArgs {
    #[arg(long, value_enum)]
    coupling: CouplingArg,
    #[arg(long = "K", default_value_t = 0.0)]
    k: f64,
    #[arg(long, default_value_t = cnot::DEFAULT_CUTOFF)]
    wc: f64,
    /// Inverse temperature, or `inf`.
    #[arg(long, default_value_t = cnot::DEFAULT_BETA)]
    beta: f64,
    #[arg(long = "R", default_value_t = cnot::DEFAULT_RABI_RATE)]
    r: f64,
    #[arg(long, default_value_t = cnot::DEFAULT_STEPS)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the coupling K that gives this fidelity at the gate time.
    #[arg(long)]
    calibrate: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    let started = unix_now();
    let result = match cli.command {
        Command::Measure { input } => measure(&input),
        Command::Mems(args) => mems(&args),
        Command::Scan(args) => scan_cmd(&args),
        Command::Cnot(args) => cnot_cmd(&args),
        Command::Selftest { fast, criterion, seed, out_dir } => {
            let opts = SelftestOptions { fast, seed, fault: None, out_dir };
            return selftest(&opts, criterion);
        }
    };
    match result {
        Ok(()) => {
            eprintln!("# start={started} end={} elapsed={:.3}s", unix_now(), start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = if e.is_domain() { "error" } else { "computation failed" };
            eprintln!("{kind}: {e}");
            ExitCode::from(1)
        }
    }
}

fn parse_weights(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Rounds every float to 12 significant digits.
fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn print_json(v: Value) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(&rounded(v))?);
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn measure(input: &Path) -> Result<(), Error> {
    let raw = std::fs::read_to_string(input)?;
    let mj: MatrixJson = serde_json::from_str(&raw).map_err(|e| Error::InvalidMatrix(e.to_string()))?;
    let rho = DensityMatrix::try_from(&mj)?;
    print_json(serde_json::to_value(measure_report(&rho)?)?)
}

fn mems(args: &MemsArgs) -> Result<(), Error> {
    let p = Spectrum::new(args.p)?;
    let form = match args.variant {
        FormArg::Psi => MemsForm::Psi,
        FormArg::Phi => MemsForm::Phi,
    };
    let variant = MemsVariant { form, swap_bell: args.swap_bell, swap_product: args.swap_product };
    let rho = build_mems(&p, variant);
    let state = MatrixJson::from(rho.matrix());
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&rounded(serde_json::to_value(&state)?))?)?;
    }
    let sc = special_condition(&p);
    print_json(json!({
        "spectrum": p.values(),
        "variant": variant,
        "state": state,
        "report": measure_report(&rho)?,
        "c_star": c_star(&p).clipped,
        "c_star_raw": c_star(&p).raw,
        "neg_star": neg_star(&p).clipped,
        "neg_star_raw": neg_star(&p).raw,
        "eof_bound": eof_upper_bound(&p),
        "special_condition": sc.satisfied,
    }))
}

fn scan_cmd(args: &ScanArgs) -> Result<(), Error> {
    let measure_kind = match args.measure {
        MeasureArg::Concurrence => MeasureKind::Concurrence,
        MeasureArg::Negativity => MeasureKind::Negativity,
    };
    let cfg = ScanConfig {
        n_spectra: args.spectra,
        n_unitaries_per_spectrum: args.unitaries,
        refine_steps: args.refine,
        measure_kind,
        seed: args.seed,
        streams: args.streams,
        inject_mems: false,
    };
    let rows = scan(&cfg)?;
    let manifest = scan_manifest(&cfg);
    let violations = rows.iter().filter(|r| r.violates_envelope()).count();
    eprintln!("# {} rows, {violations} above the spectrum bound", rows.len());
    emit(args.out.as_deref(), &scan_csv(&manifest, &rows))
}

fn cnot_cmd(args: &CnotArgs) -> Result<(), Error> {
    let kind = match args.coupling {
        CouplingArg::Control => CouplingKind::ControlDephasing,
        CouplingArg::GateAxis => CouplingKind::GateAxisDephasing,
    };
    let gate = GateSpec::new(args.r)?;
    let bath = BathSpec::new(args.k, args.wc, args.beta)?;
    if let Some(target) = args.calibrate {
        let k = cnot::calibrate_coupling(kind, &gate, &bath, target)?;
        println!("{}", fmt_sig(k));
        return Ok(());
    }
    let rows = cnot::trace_run(kind, &gate, &bath, args.steps)?;
    let manifest = cnot_manifest(kind, &gate, &bath, args.steps);
    emit(args.out.as_deref(), &trace_csv(&manifest, &rows))
}

fn selftest(opts: &SelftestOptions, criterion: Option<u8>) -> ExitCode {
    let reports = match criterion {
        Some(id) => run_criterion(id, opts).into_iter().collect(),
        None => run_all(opts),
    };
    let mut ok = true;
    for r in &reports {
        println!("{r}");
        ok &= r.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
