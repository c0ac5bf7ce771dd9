//! Command line front end: scenario-driven simulation, verification and
//! analysis of semiclassical electron dynamics.
//!
//! Exit codes: 0 success, 1 failed verification check or I/O problem,
//! 2 parse/usage error, 3 physics precondition violation, 4 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spindrift_cli::scenario::{self, AnalysisKind, OutputFormat, Scenario};
use spindrift_cli::{output, run, CliError};

#[derive(Parser)]
#[command(name = "spindrift", version, about = "semiclassical Dirac electron dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write the trajectory (CSV or JSON).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// csv|json (overrides the scenario's output.format)
        #[arg(long)]
        format: Option<String>,
        /// berry|pauli|classical (overrides the scenario's model)
        #[arg(long)]
        model: Option<String>,
        /// Override the scenario's hbar.
        #[arg(long)]
        hbar: Option<f64>,
        /// Override the rk45 relative tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Verify the block-diagonalizing transformation and its gauge
    /// structure; nonzero exit if any check fails.
    VerifyFw {
        #[arg(long)]
        output: Option<PathBuf>,
        /// text|kv|json report format (default text on stdout, kv to files)
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        hbar: Option<f64>,
    },
    /// Verify the closed-form Berry connection and curvature against their
    /// finite-difference oracles on a 100-point grid.
    VerifyCurvature {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        hbar: Option<f64>,
    },
    /// Run the simulations an observable needs and report measured vs
    /// predicted values.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// spin-hall|monopole|cyclotron|helicity (overrides the scenario's
        /// analysis section)
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the same scenario under the covariant and canonical Pauli models
    /// and summarize the divergence.
    ComparePauli {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn apply_overrides(
    scn: &mut Scenario,
    model: Option<&str>,
    hbar: Option<f64>,
    tol: Option<f64>,
) -> Result<(), CliError> {
    if let Some(m) = model {
        scn.model = scenario::parse_model(m)?;
    }
    if let Some(hb) = hbar {
        scn.constants.hbar = hb;
        scn.constants
            .validate()
            .map_err(|e| CliError::Parse(format!("--hbar: {e}")))?;
    }
    if let Some(t) = tol {
        // rejects NaN as well
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(t > 0.0) {
            return Err(CliError::Parse(format!("--tol: must be > 0, got {t}")));
        }
        match &mut scn.settings.scheme {
            spindrift_core::dynamics::Scheme::Rk45Adaptive { rel_tol, abs_tol } => {
                *rel_tol = t;
                *abs_tol = t * 1e-2;
            }
            spindrift_core::dynamics::Scheme::Rk4Fixed { .. } => {
                return Err(CliError::Parse(
                    "--tol applies to the rk45 scheme; this scenario uses rk4".into(),
                ));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ReportFormat {
    Text,
    Kv,
    Json,
}

fn parse_report_format(s: Option<&str>) -> Result<Option<ReportFormat>, CliError> {
    match s {
        None => Ok(None),
        Some("text") => Ok(Some(ReportFormat::Text)),
        Some("kv") => Ok(Some(ReportFormat::Kv)),
        Some("json") => Ok(Some(ReportFormat::Json)),
        Some(other) => Err(CliError::Parse(format!(
            "unknown report format `{other}` (expected text|kv|json)"
        ))),
    }
}

fn emit_report(
    stdout_text: &str,
    file_payload: impl Fn(ReportFormat) -> String,
    output: Option<&PathBuf>,
    format: Option<ReportFormat>,
) -> Result<(), CliError> {
    match output {
        None => {
            let fmt = format.unwrap_or(ReportFormat::Text);
            if fmt == ReportFormat::Text {
                print!("{stdout_text}");
            } else {
                print!("{}", file_payload(fmt));
            }
        }
        Some(path) => {
            print!("{stdout_text}");
            let fmt = format.unwrap_or(ReportFormat::Kv);
            std::fs::write(path, file_payload(fmt))
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Simulate {
            config,
            output,
            format,
            model,
            hbar,
            tol,
        } => {
            let mut scn = scenario::load_scenario(&config)?;
            apply_overrides(&mut scn, model.as_deref(), hbar, tol)?;
            if let Some(f) = format.as_deref() {
                scn.output_format = OutputFormat::parse(f)?;
            }
            run::simulate(&scn, output.as_deref())?;
            Ok(0)
        }
        Command::VerifyFw {
            output,
            format,
            hbar,
        } => {
            let mut k = spindrift_core::PhysConstants::natural();
            if let Some(hb) = hbar {
                k.hbar = hb;
                k.validate().map_err(|e| CliError::Parse(format!("--hbar: {e}")))?;
            }
            let checks = run::verify_fw(&k)?;
            let fmt = parse_report_format(format.as_deref())?;
            emit_report(
                &output::checks_text(&checks),
                |f| match f {
                    ReportFormat::Text => output::checks_text(&checks),
                    ReportFormat::Kv => output::checks_kv(&checks),
                    ReportFormat::Json => output::checks_json(&checks),
                },
                output.as_ref(),
                fmt,
            )?;
            Ok(if spindrift_core::verify::all_pass(&checks) { 0 } else { 1 })
        }
        Command::VerifyCurvature {
            output,
            format,
            hbar,
        } => {
            let mut k = spindrift_core::PhysConstants::natural();
            if let Some(hb) = hbar {
                k.hbar = hb;
                k.validate().map_err(|e| CliError::Parse(format!("--hbar: {e}")))?;
            }
            let checks = run::verify_curvature(&k)?;
            let fmt = parse_report_format(format.as_deref())?;
            emit_report(
                &output::checks_text(&checks),
                |f| match f {
                    ReportFormat::Text => output::checks_text(&checks),
                    ReportFormat::Kv => output::checks_kv(&checks),
                    ReportFormat::Json => output::checks_json(&checks),
                },
                output.as_ref(),
                fmt,
            )?;
            Ok(if spindrift_core::verify::all_pass(&checks) { 0 } else { 1 })
        }
        Command::Analyze {
            config,
            kind,
            output,
            format,
            hbar,
            tol,
        } => {
            let mut scn = scenario::load_scenario(&config)?;
            apply_overrides(&mut scn, None, hbar, tol)?;
            let kind = match (kind.as_deref(), scn.analysis) {
                (Some(s), _) => AnalysisKind::parse(s)?,
                (None, Some(k)) => k,
                (None, None) => {
                    return Err(CliError::Parse(
                        "no analysis requested: pass --kind or add an [analysis] section".into(),
                    ))
                }
            };
            let reports = run::analyze(&scn, kind)?;
            let fmt = parse_report_format(format.as_deref())?;
            emit_report(
                &output::reports_text(&reports),
                |f| match f {
                    ReportFormat::Text => output::reports_text(&reports),
                    ReportFormat::Kv => output::reports_kv(&reports),
                    ReportFormat::Json => output::reports_json(&reports),
                },
                output.as_ref(),
                fmt,
            )?;
            Ok(0)
        }
        Command::ComparePauli {
            config,
            output,
            hbar,
            tol,
        } => {
            let mut scn = scenario::load_scenario(&config)?;
            apply_overrides(&mut scn, None, hbar, tol)?;
            let (text, kv) = run::compare_pauli(&scn)?;
            print!("{text}");
            if let Some(path) = output {
                std::fs::write(&path, kv)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
