//! Command-line front end: `simulate`, `decompose`, `scaling`.
//!
//! Exit codes: 0 success, 1 malformed scenario/arguments, 2 fatal
//! validation (zero detuning), 3 truncation leakage under
//! --strict-truncation, 4 failed --assert-cubic assertion.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use raman::analysis::{
    coarse_vs_fine_report, factorization_error, lambda_scaling_study, population_timeseries,
    truncation_leakage, PropagatorKind,
};
use raman::error::RamanError;
use raman::hamiltonian::{derive_effective_params, RamanConfig};
use raman::hilbert::OperatorMatrix;
use raman::linalg;
use raman::perturbation::{
    closed_form_first_order, closed_form_second_order, decompose, PerturbativeDecomposition,
};
use raman::scenario::ScenarioFile;

const EXIT_MALFORMED: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_TRUNCATION: u8 = 3;
const EXIT_ASSERTION: u8 = 4;

/// Leakage threshold for --strict-truncation.
const LEAKAGE_LIMIT: f64 = 1e-6;
/// Fock margin counted as "top of the truncated space".
const LEAKAGE_MARGIN: usize = 2;
/// Accepted exponent window for --assert-cubic.
const CUBIC_WINDOW: (f64, f64) = (2.6, 3.4);

/// Three-level Raman scheme simulator: coarse-grained vs fine dynamics.
#[derive(Parser)]
#[command(name = "raman", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario description (JSON).
    scenario: PathBuf,
    /// Output directory (overrides the scenario's output.path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decomposition order (overrides the scenario's run.order).
    #[arg(long)]
    order: Option<usize>,
    /// Validate and report only; write no files.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the scenario and write population/fidelity series and an
    /// error report.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Fail (exit 3) if truncation leakage exceeds 1e-6.
        #[arg(long)]
        strict_truncation: bool,
    },
    /// Solve the perturbative decomposition and write its report.
    Decompose {
        #[command(flatten)]
        common: CommonArgs,
        /// Also dump the decomposition matrices in dense binary form.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Sweep the perturbative strength and fit the error scaling exponent.
    Scaling {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated strength values (at least 3).
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.04,0.08")]
        lambdas: Vec<f64>,
        /// Probe time for the error fit.
        #[arg(long, default_value_t = 50.0)]
        tau: f64,
        /// Exit 4 unless the fitted exponent lies in [2.6, 3.4].
        #[arg(long)]
        assert_cubic: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<RamanError> for Failure {
    fn from(e: RamanError) -> Self {
        let code = match e {
            RamanError::ZeroDetuning => EXIT_VALIDATION,
            _ => EXIT_MALFORMED,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            common,
            strict_truncation,
        } => cmd_simulate(&common, strict_truncation),
        Command::Decompose {
            common,
            dump_matrices,
        } => cmd_decompose(&common, dump_matrices),
        Command::Scaling {
            common,
            lambdas,
            tau,
            assert_cubic,
        } => cmd_scaling(&common, &lambdas, tau, assert_cubic),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Fixed 17-significant-digit float formatting for every data file.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

struct Prepared {
    scenario: ScenarioFile,
    scenario_path: PathBuf,
    config: RamanConfig<f64>,
    order: usize,
    outdir: PathBuf,
}

fn prepare(common: &CommonArgs) -> Result<Prepared, Failure> {
    let scenario = ScenarioFile::load(&common.scenario)?;
    let config = scenario.to_config()?;
    let report = config.validate()?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let order = common.order.unwrap_or(scenario.run.order);
    let outdir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&scenario.output.path));
    Ok(Prepared {
        scenario,
        scenario_path: common.scenario.clone(),
        config,
        order,
        outdir,
    })
}

fn print_dry_run(p: &Prepared) -> Result<(), Failure> {
    let report = p.config.validate()?;
    println!("scenario: valid");
    println!("dimension: {}", p.config.layout.dim());
    println!("lambda: {}", fmt(report.lambda));
    println!("kappa: {}", fmt(report.kappa));
    println!("order: {}", p.order);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn ensure_outdir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::new(EXIT_MALFORMED, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

#[derive(Serialize)]
struct RunMeta {
    command: String,
    scenario_path: String,
    fingerprint: String,
    order: usize,
    package_version: String,
}

fn write_meta(p: &Prepared, command: &str) -> Result<(), Failure> {
    let meta = RunMeta {
        command: command.to_string(),
        scenario_path: p.scenario_path.display().to_string(),
        fingerprint: p.config.fingerprint(),
        order: p.order,
        package_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_json(&p.outdir.join("run_meta.json"), &meta)
}

fn cmd_simulate(common: &CommonArgs, strict_truncation: bool) -> Result<(), Failure> {
    let p = prepare(common)?;
    if common.dry_run {
        return print_dry_run(&p);
    }
    if p.order < 2 {
        return Err(Failure::new(
            EXIT_MALFORMED,
            format!("simulate needs decomposition order >= 2, got {}", p.order),
        ));
    }
    let grid = p.scenario.tau_grid();
    let initial = p.scenario.initial_state();
    let decomp = decompose(&p.config, p.order)?;

    let leakage = truncation_leakage(&p.config, &initial, &grid, LEAKAGE_MARGIN)?;
    if strict_truncation && leakage > LEAKAGE_LIMIT {
        return Err(Failure::new(
            EXIT_TRUNCATION,
            format!("truncation leakage {leakage:.3e} exceeds {LEAKAGE_LIMIT:.0e}; raise the Fock cutoffs"),
        ));
    }

    let pops = population_timeseries(&p.config, &decomp, &initial, &grid, PropagatorKind::Exact)?;
    let fids = coarse_vs_fine_report(&p.config, &decomp, &initial, &grid)?;
    let mut errors = factorization_error(&p.config, &decomp, &grid)?;
    errors.truncation_leakage = Some(leakage);

    let mut csv = String::from("tau,P1,P2,P3,fid_eff,fid_factored\n");
    let p1 = pops.channel("P1").expect("channel");
    let p2 = pops.channel("P2").expect("channel");
    let p3 = pops.channel("P3").expect("channel");
    let fe = fids.channel("fid_eff").expect("channel");
    let ff = fids.channel("fid_factored").expect("channel");
    for (i, &tau) in grid.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(tau),
            fmt(p1[i]),
            fmt(p2[i]),
            fmt(p3[i]),
            fmt(fe[i]),
            fmt(ff[i]),
        ));
    }

    ensure_outdir(&p.outdir)?;
    write_text(&p.outdir.join("timeseries.csv"), &csv)?;
    write_json(&p.outdir.join("error_report.json"), &errors)?;
    write_meta(&p, "simulate")?;
    println!(
        "wrote {} and {}",
        p.outdir.join("timeseries.csv").display(),
        p.outdir.join("error_report.json").display()
    );
    Ok(())
}

#[derive(Serialize)]
struct OrderNorms {
    order: usize,
    c_norm: f64,
    z_norm: f64,
    c_hermiticity_defect: f64,
    z_hermiticity_defect: f64,
    /// `||[H0, C_n]||` max-norm.
    c_commutes_with_h0: f64,
    /// `||P_g Z P_g|| + ||P_e Z P_e||` max-norm (minimal-solution residual).
    z_minimal_residual: f64,
}

#[derive(Serialize)]
struct EffectiveReport {
    omega12: f64,
    k12_eta: Vec<f64>,
    g12_re: f64,
    g12_im: f64,
    stark1: f64,
    stark2: f64,
    stark3: f64,
}

#[derive(Serialize)]
struct DecompositionReport {
    order: usize,
    dimension: usize,
    lambda: f64,
    orders: Vec<OrderNorms>,
    effective: EffectiveReport,
    /// Max entrywise deviation between the recursion and the closed forms
    /// (orders 1 and 2 as available).
    closed_form_deviation: f64,
}

fn order_norms(d: &PerturbativeDecomposition<f64>, n: usize) -> OrderNorms {
    let c = &d.scaled_c[n - 1];
    let z = &d.scaled_z[n - 1];
    let comm = (&(&d.h0 * c) - &(c * &d.h0)).max_abs();
    let res = (&(&d.block.projector_g * z) * &d.block.projector_g).max_abs()
        + (&(&d.block.projector_e * z) * &d.block.projector_e).max_abs();
    OrderNorms {
        order: n,
        c_norm: linalg::spectral_norm(&c.mat),
        z_norm: linalg::spectral_norm(&z.mat),
        c_hermiticity_defect: c.hermiticity_defect(),
        z_hermiticity_defect: z.hermiticity_defect(),
        c_commutes_with_h0: comm,
        z_minimal_residual: res,
    }
}

fn dump_matrix(path: &Path, m: &OperatorMatrix<f64>) -> Result<(), Failure> {
    let mut buf = Vec::with_capacity(16 + 16 * m.dim() * m.dim());
    buf.extend_from_slice(b"RAMANMAT");
    buf.extend_from_slice(&(m.dim() as u64).to_le_bytes());
    for r in 0..m.dim() {
        for c in 0..m.dim() {
            let z = m.mat[(r, c)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    file.write_all(&buf)
        .map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))
}

fn cmd_decompose(common: &CommonArgs, dump_matrices: bool) -> Result<(), Failure> {
    let p = prepare(common)?;
    if common.dry_run {
        return print_dry_run(&p);
    }
    let d = decompose(&p.config, p.order)?;

    let mut deviation = 0.0_f64;
    let (c1, z1) = closed_form_first_order(&p.config)?;
    deviation = deviation
        .max((&d.scaled_c[0] - &c1).max_abs())
        .max((&d.scaled_z[0] - &z1).max_abs());
    if p.order >= 2 {
        let (c2, z2) = closed_form_second_order(&p.config)?;
        deviation = deviation
            .max((&d.scaled_c[1] - &c2).max_abs())
            .max((&d.scaled_z[1] - &z2).max_abs());
    }

    let eff = derive_effective_params(&p.config)?;
    let report = DecompositionReport {
        order: p.order,
        dimension: p.config.layout.dim(),
        lambda: p.config.lambda(),
        orders: (1..=p.order).map(|n| order_norms(&d, n)).collect(),
        effective: EffectiveReport {
            omega12: eff.omega12,
            k12_eta: eff.k12_eta.clone(),
            g12_re: eff.g12.re,
            g12_im: eff.g12.im,
            stark1: eff.stark1,
            stark2: eff.stark2,
            stark3: eff.stark3,
        },
        closed_form_deviation: deviation,
    };

    ensure_outdir(&p.outdir)?;
    write_json(&p.outdir.join("decomposition.json"), &report)?;
    if dump_matrices {
        for n in 1..=p.order {
            dump_matrix(&p.outdir.join(format!("c{n}.bin")), &d.scaled_c[n - 1])?;
            dump_matrix(&p.outdir.join(format!("z{n}.bin")), &d.scaled_z[n - 1])?;
        }
    }
    write_meta(&p, "decompose")?;
    println!("wrote {}", p.outdir.join("decomposition.json").display());
    Ok(())
}

fn cmd_scaling(
    common: &CommonArgs,
    lambdas: &[f64],
    tau: f64,
    assert_cubic: bool,
) -> Result<(), Failure> {
    let p = prepare(common)?;
    if lambdas.len() < 3 {
        return Err(Failure::new(
            EXIT_MALFORMED,
            format!("need >=3 lambda values, got {}", lambdas.len()),
        ));
    }
    for &l in lambdas {
        if l > 0.15 {
            eprintln!("warning: lambda {l} outside perturbative regime");
        }
        if !(l > 0.0) {
            return Err(Failure::new(
                EXIT_MALFORMED,
                format!("lambda values must be positive, got {l}"),
            ));
        }
    }
    if common.dry_run {
        return print_dry_run(&p);
    }
    let report = lambda_scaling_study(&p.config, lambdas, tau)?;

    let mut csv = String::from("lambda,err_factored,err_prime_factored,err_effective\n");
    for (i, &l) in report.lambda_values.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt(l),
            fmt(report.factored_by_lambda[i]),
            fmt(report.prime_by_lambda[i]),
            fmt(report.effective_by_lambda[i]),
        ));
    }
    ensure_outdir(&p.outdir)?;
    write_text(&p.outdir.join("scaling.csv"), &csv)?;
    write_json(&p.outdir.join("scaling.json"), &report)?;
    write_meta(&p, "scaling")?;

    let exponent = report
        .fit_factored
        .as_ref()
        .map(|f| f.exponent)
        .unwrap_or(f64::NAN);
    println!("fitted exponent: {}", fmt(exponent));
    if assert_cubic && !(exponent >= CUBIC_WINDOW.0 && exponent <= CUBIC_WINDOW.1) {
        return Err(Failure::new(
            EXIT_ASSERTION,
            format!(
                "fitted exponent {exponent:.3} outside [{}, {}]",
                CUBIC_WINDOW.0, CUBIC_WINDOW.1
            ),
        ));
    }
    Ok(())
}
