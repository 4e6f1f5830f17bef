//! Command-line front door: load a plant JSON file, run certification,
//! map sweeps, simulations, or numerator-slope sweeps, and emit JSON
//! certificates and CSV tables.
//!
//! Exit codes: 0 on success, 2 on input/validation errors, 3 on numerical
//! failures (non-convergence or iteration caps).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use relaycycle::cycle::{self, Classification, LimitCycleCertificate};
use relaycycle::error::{CycleError, SwitchError};
use relaycycle::plant::{Plant, PlantSpec};
use relaycycle::sim::{self, SimConfig};
use relaycycle::switching;

#[derive(Parser)]
#[command(
    name = "relaycycle",
    about = "Certify the asymptotic behaviour of a relay feedback system with a second-order plant",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Plant description: {"num": [b1, b0], "den": [1.0, a1, a2]}
    plant: PathBuf,
    /// Output path (stdout when omitted, except `simulate` which defaults to trace.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance for root finding and fixed-point stops.
    /// Precedence: this flag, then RELAYCYCLE_TOL, then 1e-12.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap for the fixed-point search
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write the limit-cycle certificate for a plant
    Analyze {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Tabulate the switching map over a uniform grid as CSV
    Map {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        xi_min: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        xi_max: f64,
        /// Number of grid points (>= 2)
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Integrate the relay loop and write a trace CSV plus an events JSON sidecar
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Initial state "x1,x2"
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Diagnostic mode: pin the relay output to +1 or -1
        #[arg(long, allow_hyphen_values = true)]
        force_sign: Option<i8>,
    },
    /// Re-analyze the plant for each numerator slope kappa in a list
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated kappa values, e.g. "1,0,-1"
        #[arg(long, allow_hyphen_values = true)]
        kappa_list: String,
    },
}

enum CliError {
    /// Bad input: unreadable files, malformed JSON, invalid plants, bad ranges.
    Input(String),
    /// Numerical failure: non-convergence or an exceeded iteration cap.
    Numeric(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        let (kind, message, code) = match self {
            CliError::Input(m) => ("input", m, 2),
            CliError::Numeric(m) => ("numeric", m, 3),
        };
        let body = serde_json::json!({ "error": { "kind": kind, "message": message } });
        eprintln!("{body}");
        ExitCode::from(code)
    }
}

fn input_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn cycle_err(e: CycleError) -> CliError {
    match e {
        CycleError::MaxIterExceeded { .. }
        | CycleError::NotContractive { .. }
        | CycleError::Switch(SwitchError::NoConvergence(_)) => CliError::Numeric(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn switch_err(e: SwitchError) -> CliError {
    match e {
        SwitchError::NoConvergence(_) => CliError::Numeric(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn global_tol(flag: Option<f64>) -> Result<f64, CliError> {
    if let Some(t) = flag {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
        return Ok(t);
    }
    match std::env::var("RELAYCYCLE_TOL") {
        Ok(s) => {
            let t: f64 = s
                .parse()
                .map_err(|_| CliError::Input(format!("RELAYCYCLE_TOL is not a number: {s}")))?;
            if t.is_nan() || t <= 0.0 {
                return Err(CliError::Input(format!(
                    "RELAYCYCLE_TOL must be positive, got {t}"
                )));
            }
            Ok(t)
        }
        Err(_) => Ok(1e-12),
    }
}

fn load_plant(path: &Path) -> Result<Plant, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let spec = PlantSpec::from_json_str(&text).map_err(input_err)?;
    Plant::new(spec).map_err(input_err)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes()).map_err(input_err)
        }
    }
}

/// CSV float formatting: shortest round-trip representation, `nan` literal for
/// absent values (the JSON side uses null instead).
fn csv_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Stable on-disk certificate schema. Inapplicable fields serialize as null.
#[derive(Serialize)]
struct CertificateDocument {
    classification: Classification,
    xi_cycle: Option<f64>,
    half_period: Option<f64>,
    period: Option<f64>,
    output_amplitude: Option<f64>,
    half_map_multiplier: Option<f64>,
    full_return_multiplier: Option<f64>,
    contraction_bound: Option<f64>,
    certified_interval_theta: Option<f64>,
    chattering_set: Option<[f64; 2]>,
    plant_echo: serde_json::Value,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct Tolerances {
    rel_tol: f64,
    max_iter: usize,
}

fn certificate_document(
    plant: &Plant,
    cert: &LimitCycleCertificate,
    tol: f64,
    max_iter: usize,
) -> CertificateDocument {
    CertificateDocument {
        classification: cert.classification,
        xi_cycle: cert.xi_cycle,
        half_period: cert.half_period,
        period: cert.half_period.map(|h| 2.0 * h),
        output_amplitude: cert.output_amplitude,
        half_map_multiplier: cert.half_map_multiplier,
        full_return_multiplier: cert.full_return_multiplier,
        contraction_bound: cert.contraction_bound,
        certified_interval_theta: cert.certified_interval_theta,
        chattering_set: cert.chattering_set,
        plant_echo: plant.spec().to_json_value(),
        tolerances: Tolerances {
            rel_tol: tol,
            max_iter,
        },
    }
}

fn cmd_analyze(common: &CommonOpts) -> Result<(), CliError> {
    let plant = load_plant(&common.plant)?;
    let tol = global_tol(common.tol)?;
    let cert = cycle::certify_with(&plant, tol, common.max_iter).map_err(cycle_err)?;
    let doc = certificate_document(&plant, &cert, tol, common.max_iter);
    let mut body = serde_json::to_string_pretty(&doc).map_err(input_err)?;
    body.push('\n');
    write_output(&common.out, &body)
}

fn cmd_map(common: &CommonOpts, xi_min: f64, xi_max: f64, n: usize) -> Result<(), CliError> {
    if xi_min.is_nan() || xi_max.is_nan() || xi_min >= xi_max || n < 2 {
        return Err(CliError::Input(format!(
            "need xi_min < xi_max and n >= 2 (got {xi_min}, {xi_max}, {n})"
        )));
    }
    let plant = load_plant(&common.plant)?;
    let tol = global_tol(common.tol)?;
    let mut out = String::from("xi,tau_plus,f_plus,f_plus_prime,f_plus_second_or_nan\n");
    for i in 0..n {
        let xi = xi_min + (xi_max - xi_min) * i as f64 / (n - 1) as f64;
        let tau = switching::tau_plus(&plant, xi, tol).map_err(switch_err)?;
        let f = switching::f_plus(&plant, xi).map_err(switch_err)?;
        let fp = match switching::f_plus_prime(&plant, xi) {
            Ok(v) => v,
            Err(SwitchError::BelowSwitchOnset { .. }) => f64::NAN,
            Err(e) => return Err(switch_err(e)),
        };
        let fpp = match switching::f_plus_second(&plant, xi) {
            Ok(v) => v,
            Err(SwitchError::BelowSwitchOnset { .. } | SwitchError::UnsupportedPoleClass) => {
                f64::NAN
            }
            Err(e) => return Err(switch_err(e)),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_num(xi),
            csv_num(tau),
            csv_num(f),
            csv_num(fp),
            csv_num(fpp)
        ));
    }
    write_output(&common.out, &out)
}

fn parse_x0(s: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!(
            "x0 must be \"x1,x2\", got {s:?}"
        )));
    }
    let x1: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("bad x0 component {:?}", parts[0])))?;
    let x2: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("bad x0 component {:?}", parts[1])))?;
    Ok([x1, x2])
}

fn events_sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    csv.with_file_name(format!("{stem}.events.json"))
}

fn cmd_simulate(
    common: &CommonOpts,
    x0: &str,
    t_max: Option<f64>,
    dt: Option<f64>,
    force_sign: Option<i8>,
) -> Result<(), CliError> {
    let plant = load_plant(&common.plant)?;
    let x0 = parse_x0(x0)?;
    let mut cfg = SimConfig::for_plant(&plant);
    if let Some(t) = t_max {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Input(format!("t_max must be positive, got {t}")));
        }
        cfg.t_max = t;
    }
    if let Some(h) = dt {
        if h.is_nan() || h <= 0.0 {
            return Err(CliError::Input(format!("dt must be positive, got {h}")));
        }
        cfg.dt = h;
    }
    match force_sign {
        Some(1) => cfg.forced_sign = Some(1.0),
        Some(-1) => cfg.forced_sign = Some(-1.0),
        Some(other) => {
            return Err(CliError::Input(format!(
                "force_sign must be 1 or -1, got {other}"
            )))
        }
        None => {}
    }

    let trace = sim::simulate(&plant, x0, &cfg);

    let mut csv = String::from("t,x1,x2,u\n");
    for s in &trace.samples {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            csv_num(s.t),
            csv_num(s.x1),
            csv_num(s.x2),
            csv_num(s.u)
        ));
    }
    let events = serde_json::to_string_pretty(&trace.events).map_err(input_err)?;

    let csv_path = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    fs::write(&csv_path, csv)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", csv_path.display())))?;
    let ev_path = events_sidecar_path(&csv_path);
    fs::write(&ev_path, format!("{events}\n"))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", ev_path.display())))?;
    Ok(())
}

fn cmd_sweep(common: &CommonOpts, kappa_list: &str) -> Result<(), CliError> {
    let base = load_plant(&common.plant)?;
    let tol = global_tol(common.tol)?;
    let kappas: Vec<f64> = kappa_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad kappa value {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    if kappas.is_empty() {
        return Err(CliError::Input("kappa list is empty".into()));
    }

    let spec = *base.spec();
    let mut out = String::from("kappa,classification,xi_cycle,half_period\n");
    for &kappa in &kappas {
        let plant =
            Plant::from_kappa_gamma(kappa, spec.b0, spec.a1, spec.a2).map_err(input_err)?;
        let cert = cycle::certify_with(&plant, tol, common.max_iter).map_err(cycle_err)?;
        let class = match cert.classification {
            Classification::SelfOscillation => "SelfOscillation",
            Classification::ConvergesToOrigin => "ConvergesToOrigin",
            Classification::ConvergesToChatteringSet => "ConvergesToChatteringSet",
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_num(kappa),
            class,
            csv_num(cert.xi_cycle.unwrap_or(f64::NAN)),
            csv_num(cert.half_period.unwrap_or(f64::NAN))
        ));
    }
    write_output(&common.out, &out)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze { common } => cmd_analyze(common),
        Command::Map {
            common,
            xi_min,
            xi_max,
            n,
        } => cmd_map(common, *xi_min, *xi_max, *n),
        Command::Simulate {
            common,
            x0,
            t_max,
            dt,
            force_sign,
        } => cmd_simulate(common, x0, *t_max, *dt, *force_sign),
        Command::Sweep { common, kappa_list } => cmd_sweep(common, kappa_list),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
