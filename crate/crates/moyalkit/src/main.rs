//! Batch front door: `moyalkit <subcommand> --config <path> --out <dir>`.
//!
//! Subcommands: wigner, star, quantize, norm, propagate, admissible, verify.
//! Exit codes: 0 success, 1 verification failure, 2 config error,
//! 3 precondition violation, 4 numerical failure.

use clap::{Parser, Subcommand};
use moyalkit::error::MoyalError;
use moyalkit::fieldio::{read_field, write_field};
use moyalkit::modnorm::{msinf1_norm, msq_norm, NormReport};
use moyalkit::scenario::Scenario;
use moyalkit::star::{tau_quantize, weyl_quantize, Symbol};
use moyalkit::starexp::{star_exp_propagate, StepDiagnostic};
use moyalkit::symplectic::{gaussian_admissible, hardy_pair_check};
use moyalkit::transforms::{cross_wigner, wave_packet, Window};
use moyalkit::verify::CheckRow;
use moyalkit::{GridSpec, SampledField};
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "moyalkit", about = "phase-space quantization toolkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Scenario configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: MOYALKIT_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cross-Wigner and wave-packet transforms of inputs psi, phi
    Wigner,
    /// Moyal product of inputs A and B
    Star,
    /// Weyl / tau quantization of input A (params: tau)
    Quantize,
    /// Modulation-norm report for the named input (params: q, s)
    Norm,
    /// Phase-space propagation of input Psi0 under input H (params: t, dt)
    Propagate,
    /// Gaussian admissibility / Hardy pair tests (params: m_a, m_b or a, b)
    Admissible,
    /// Run the full invariant battery; nonzero exit on any failure
    Verify,
}

fn exit_code(e: &MoyalError) -> i32 {
    match e {
        MoyalError::Scenario(_) | MoyalError::FieldFile(_) | MoyalError::Io(_) => 2,
        MoyalError::NonFinite(_)
        | MoyalError::DivergentSeries(_)
        | MoyalError::NormDriftExceeded { .. }
        | MoyalError::TailTooLarge { .. }
        | MoyalError::NotPositiveDefinite(_)
        | MoyalError::NotSymplectic(_) => 4,
        _ => 3,
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("MOYALKIT_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario, MoyalError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| MoyalError::Scenario("--config is required for this command".into()))?;
    Scenario::load(path)
}

fn ensure_out(dir: &Path) -> Result<(), MoyalError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), MoyalError> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<i32, MoyalError> {
    ensure_out(&cli.out)?;
    match &cli.cmd {
        Cmd::Wigner => {
            let sc = load_scenario(cli)?;
            let psi = sc.resolve("psi", 1)?;
            let phi = sc.resolve("phi", 1)?;
            let w = cross_wigner(&psi, &phi, &sc.ctx)?;
            write_field(&w, &sc.ctx, &cli.out.join("cross_wigner.mkf"))?;
            let window = Window::normalized(phi)?;
            let wp = wave_packet(&window, &psi, &sc.ctx)?;
            write_field(&wp, &sc.ctx, &cli.out.join("wave_packet.mkf"))?;
            println!("wigner: wrote cross_wigner.mkf, wave_packet.mkf");
            Ok(0)
        }
        Cmd::Star => {
            let sc = load_scenario(cli)?;
            let a = Symbol::new(sc.resolve("A", 2)?, sc.ctx)?;
            let b = Symbol::new(sc.resolve("B", 2)?, sc.ctx)?;
            let c = moyalkit::star::moyal_star(&a, &b)?;
            write_field(&c.field, &sc.ctx, &cli.out.join("star.mkf"))?;
            println!("star: wrote star.mkf");
            Ok(0)
        }
        Cmd::Quantize => {
            let sc = load_scenario(cli)?;
            let a = Symbol::new(sc.resolve("A", 2)?, sc.ctx)?;
            let tau = sc.param_f64("tau").unwrap_or(0.5);
            let k = if (tau - 0.5).abs() < 1e-15 {
                weyl_quantize(&a)?
            } else {
                tau_quantize(&a, tau)?
            };
            // kernel written as a d=2 field over (row, column) grid points
            let n = k.grid.points();
            let kg = GridSpec::uniform(2, n, k.grid.extent(0))?;
            let vals: Vec<_> = (0..n * n).map(|f| k.entries[(f / n, f % n)]).collect();
            let kf = SampledField::new(kg, vals)?;
            write_field(&kf, &sc.ctx, &cli.out.join("operator.mkf"))?;
            let ev = k.hermitian_eigenvalues();
            let rows: Vec<String> = ev
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{i},{v:.12e}"))
                .collect();
            write_csv(&cli.out.join("spectrum.csv"), "index,eigenvalue", &rows)?;
            println!("quantize: wrote operator.mkf, spectrum.csv (tau = {tau})");
            Ok(0)
        }
        Cmd::Norm => {
            let sc = load_scenario(cli)?;
            let s = sc.param_f64("s").unwrap_or(0.0);
            let q = sc.param_exponent("q")?;
            // field dimensionality decides the estimator
            let report: NormReport = match sc.resolve("A", 2) {
                Ok(a_field) => {
                    let a = Symbol::new(a_field, sc.ctx)?;
                    let win = moyalkit::modnorm::default_phase_window(a.grid())?;
                    msinf1_norm(&a, &win, s)?
                }
                Err(_) => {
                    let psi = sc.resolve("psi", 1)?;
                    let g1 = psi.grid().clone();
                    let win = Window::normalized(moyalkit::builtin::standard_gaussian(
                        &g1, sc.ctx.hbar,
                    )?)?;
                    msq_norm(&psi, &win, q, s)?
                }
            };
            write_csv(
                &cli.out.join("norm.csv"),
                NormReport::csv_header(),
                &[report.csv_row()],
            )?;
            println!("norm: value = {:.9e} (tail {:.3e})", report.value, report.truncation_tail);
            Ok(0)
        }
        Cmd::Propagate => {
            let sc = load_scenario(cli)?;
            let h = Symbol::new(sc.resolve("H", 2)?, sc.ctx)?;
            let psi0 = sc.resolve("Psi0", 2)?;
            let t = sc
                .param_f64("t")
                .ok_or_else(|| MoyalError::Scenario("propagate needs params.t".into()))?;
            let dt = sc
                .param_f64("dt")
                .unwrap_or_else(|| 0.01 * sc.ctx.hbar / h.field.max_abs());
            let r = star_exp_propagate(&h, &psi0, t, dt)?;
            write_field(&r.psi_t, &sc.ctx, &cli.out.join("psi_t.mkf"))?;
            let rows: Vec<String> = r.diagnostics.iter().map(|d| d.csv_row()).collect();
            write_csv(&cli.out.join("steps.csv"), StepDiagnostic::csv_header(), &rows)?;
            println!(
                "propagate: {} steps to t = {}, norm drift {:.3e}",
                r.steps, r.t, r.norm_drift
            );
            Ok(0)
        }
        Cmd::Admissible => {
            let sc = load_scenario(cli)?;
            let get = |k: &str, d: f64| sc.param_f64(k).unwrap_or(d);
            let m = nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[get("m11", 1.0), get("m12", 0.0), get("m12", 0.0), get("m22", 1.0)],
            );
            let (mods, ok) = gaussian_admissible(&m)?;
            let a = nalgebra::DMatrix::from_row_slice(1, 1, &[get("a", 1.0)]);
            let b = nalgebra::DMatrix::from_row_slice(1, 1, &[get("b", 1.0)]);
            let (eigs, hok) = hardy_pair_check(&a, &b)?;
            let rows = vec![
                format!(
                    "gaussian,{},{}",
                    mods.iter()
                        .map(|v| format!("{v:.9}"))
                        .collect::<Vec<_>>()
                        .join(";"),
                    ok
                ),
                format!(
                    "hardy,{},{}",
                    eigs.iter()
                        .map(|v| format!("{v:.9}"))
                        .collect::<Vec<_>>()
                        .join(";"),
                    hok
                ),
            ];
            write_csv(&cli.out.join("admissible.csv"), "test,eigenvalues,ok", &rows)?;
            println!("admissible: gaussian ok = {ok}, hardy ok = {hok}");
            Ok(0)
        }
        Cmd::Verify => {
            let rows = moyalkit::verify::run_battery()?;
            let csv_rows: Vec<String> = rows.iter().map(|r| r.csv_row()).collect();
            write_csv(&cli.out.join("verify.csv"), CheckRow::csv_header(), &csv_rows)?;
            let mut failed = 0usize;
            for r in &rows {
                let status = if r.pass { "pass" } else { "FAIL" };
                println!(
                    "{status} {:<42} residual {:>12.4e}  tol {:>8.1e}",
                    r.name, r.residual, r.tolerance
                );
                if !r.pass && r.gating {
                    failed += 1;
                }
            }
            if failed > 0 {
                eprintln!("{failed} invariant(s) failed");
                Ok(1)
            } else {
                println!("all {} invariants passed", rows.len());
                Ok(0)
            }
        }
    }
}

// read_field is re-exported for binary users who want to postprocess outputs
#[allow(unused_imports)]
use read_field as _read_field_keepalive;
