// negated float comparisons below are deliberate: NaN must fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Scenario files: a single TOML format, fully validated before any run.
//! Unknown keys are errors; physics-bearing fields (initial state, spin,
//! field parameters, total time) have no silent defaults.

use std::path::Path;

use serde::Deserialize;
use spindrift_core::algebra::Vec3;
use spindrift_core::dynamics::{IntegratorSettings, ParticleState, RhsModel, Scheme};
use spindrift_core::fields::FieldConfig;
use spindrift_core::spin::{SpinVec, Spinor2};
use spindrift_core::{C64, PhysConstants};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    constants: PhysConstants,
    initial: InitialSection,
    spin: SpinSection,
    field: FieldSection,
    integrator: IntegratorSection,
    model: Option<String>,
    analysis: Option<AnalysisSection>,
    output: Option<OutputSection>,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    r: [f64; 3],
    p: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinSection {
    #[serde(rename = "S")]
    s: Option<[f64; 3]>,
    chi: Option<[f64; 4]>,
    /// Per-step renormalization for very long runs; off by default.
    #[serde(default)]
    renormalize: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldSection {
    kind: String,
    #[serde(rename = "E0")]
    e0: Option<[f64; 3]>,
    #[serde(rename = "H0")]
    h0: Option<[f64; 3]>,
    #[serde(rename = "Z")]
    z: Option<f64>,
    softening: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorSection {
    scheme: Option<String>,
    dt: Option<f64>,
    tol: Option<f64>,
    #[serde(rename = "T")]
    t_final: f64,
    output_every: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisSection {
    kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    hbar: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisKind {
    SpinHall,
    Monopole,
    Cyclotron,
    Helicity,
}

impl AnalysisKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "spin-hall" => Ok(Self::SpinHall),
            "monopole" => Ok(Self::Monopole),
            "cyclotron" => Ok(Self::Cyclotron),
            "helicity" => Ok(Self::Helicity),
            other => Err(CliError::Parse(format!(
                "unknown analysis kind `{other}` (expected spin-hall|monopole|cyclotron|helicity)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::Parse(format!(
                "unknown output format `{other}` (expected csv|json)"
            ))),
        }
    }
}

pub fn parse_model(s: &str) -> Result<RhsModel, CliError> {
    match s {
        "berry" => Ok(RhsModel::BerryFull),
        "pauli" => Ok(RhsModel::PauliCanonical),
        "classical" => Ok(RhsModel::ClassicalLorentz),
        other => Err(CliError::Parse(format!(
            "unknown model `{other}` (expected berry|pauli|classical)"
        ))),
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub constants: PhysConstants,
    pub state0: ParticleState,
    pub field: FieldConfig,
    pub settings: IntegratorSettings,
    pub model: RhsModel,
    pub analysis: Option<AnalysisKind>,
    pub output_path: Option<String>,
    pub output_format: OutputFormat,
    pub sweep_hbar: Vec<f64>,
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| CliError::Parse(format!("scenario: {e}")))?;

    file.constants
        .validate()
        .map_err(|e| CliError::Parse(format!("constants: {e}")))?;

    // spin: exactly one of S or chi
    let (s, chi) = match (&file.spin.s, &file.spin.chi) {
        (Some(sv), None) => {
            let s = SpinVec::normalized(v3(*sv))
                .map_err(|_| CliError::Parse("spin.S: spin not normalizable".into()))?;
            (s, None)
        }
        (None, Some(c)) => {
            let chi = Spinor2::normalized(C64::new(c[0], c[1]), C64::new(c[2], c[3]))
                .map_err(|_| CliError::Parse("spin.chi: spin not normalizable".into()))?;
            let s = spindrift_core::spin::spin_from_spinor(&chi)
                .map_err(|e| CliError::Parse(format!("spin.chi: {e}")))?;
            (s, Some(chi))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Parse(
                "spin: give either spin.S or spin.chi, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Parse(
                "spin: missing spin.S or spin.chi".into(),
            ))
        }
    };

    let field = match file.field.kind.as_str() {
        "uniform" | "crossed_uniform" => {
            let e0 = file.field.e0.ok_or_else(|| {
                CliError::Parse(format!("field.E0: required for kind `{}`", file.field.kind))
            })?;
            let h0 = file.field.h0.ok_or_else(|| {
                CliError::Parse(format!("field.H0: required for kind `{}`", file.field.kind))
            })?;
            if file.field.z.is_some() || file.field.softening.is_some() {
                return Err(CliError::Parse(format!(
                    "field: Z/softening are not valid for kind `{}`",
                    file.field.kind
                )));
            }
            if file.field.kind == "uniform" {
                FieldConfig::uniform(v3(e0), v3(h0))
            } else {
                FieldConfig::crossed_uniform(v3(e0), v3(h0))
                    .map_err(|e| CliError::Parse(format!("field: {e}")))?
            }
        }
        "coulomb" => {
            let z = file
                .field
                .z
                .ok_or_else(|| CliError::Parse("field.Z: required for kind `coulomb`".into()))?;
            let softening = file.field.softening.ok_or_else(|| {
                CliError::Parse("field.softening: required for kind `coulomb`".into())
            })?;
            if file.field.e0.is_some() || file.field.h0.is_some() {
                return Err(CliError::Parse(
                    "field: E0/H0 are not valid for kind `coulomb`".into(),
                ));
            }
            FieldConfig::coulomb(z, softening)
                .map_err(|e| CliError::Parse(format!("field: {e}")))?
        }
        other => {
            return Err(CliError::Parse(format!(
                "field.kind: unknown kind `{other}` (expected uniform|crossed_uniform|coulomb)"
            )))
        }
    };

    let t_final = file.integrator.t_final;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(CliError::Parse(format!(
            "integrator.T: must be a positive finite time, got {t_final}"
        )));
    }
    let output_every = file.integrator.output_every.unwrap_or(t_final / 1000.0);
    if !(output_every > 0.0) {
        return Err(CliError::Parse(format!(
            "integrator.output_every: must be > 0, got {output_every}"
        )));
    }
    let scheme = match file.integrator.scheme.as_deref().unwrap_or("rk45") {
        "rk45" => {
            if file.integrator.dt.is_some() {
                return Err(CliError::Parse(
                    "integrator.dt: not valid for scheme `rk45` (use tol)".into(),
                ));
            }
            let tol = file.integrator.tol.unwrap_or(1e-10);
            if !(tol > 0.0) {
                return Err(CliError::Parse(format!(
                    "integrator.tol: must be > 0, got {tol}"
                )));
            }
            Scheme::Rk45Adaptive {
                rel_tol: tol,
                abs_tol: tol * 1e-2,
            }
        }
        "rk4" => {
            if file.integrator.tol.is_some() {
                return Err(CliError::Parse(
                    "integrator.tol: not valid for scheme `rk4` (use dt)".into(),
                ));
            }
            let dt = file.integrator.dt.ok_or_else(|| {
                CliError::Parse("integrator.dt: required for scheme `rk4`".into())
            })?;
            if !(dt > 0.0) {
                return Err(CliError::Parse(format!(
                    "integrator.dt: must be > 0, got {dt}"
                )));
            }
            Scheme::Rk4Fixed { dt }
        }
        other => {
            return Err(CliError::Parse(format!(
                "integrator.scheme: unknown scheme `{other}` (expected rk45|rk4)"
            )))
        }
    };

    let model = parse_model(file.model.as_deref().unwrap_or("berry"))?;
    let analysis = file
        .analysis
        .as_ref()
        .map(|a| AnalysisKind::parse(&a.kind))
        .transpose()?;
    let (output_path, output_format) = match &file.output {
        Some(o) => {
            let fmt = o
                .format
                .as_deref()
                .map(OutputFormat::parse)
                .transpose()?
                .unwrap_or_default();
            (o.path.clone(), fmt)
        }
        None => (None, OutputFormat::default()),
    };
    let sweep_hbar = file.sweep.map(|s| s.hbar).unwrap_or_default();
    for (i, hb) in sweep_hbar.iter().enumerate() {
        if !(hb.is_finite() && *hb >= 0.0) {
            return Err(CliError::Parse(format!(
                "sweep.hbar[{i}]: must be >= 0, got {hb}"
            )));
        }
    }

    let mut state0 = ParticleState::new(0.0, v3(file.initial.r), v3(file.initial.p), s);
    if let Some(chi) = chi {
        state0 = state0.with_spinor(chi);
    }

    Ok(Scenario {
        constants: file.constants,
        state0,
        field,
        settings: IntegratorSettings {
            scheme,
            t_final,
            output_every,
            renormalize: file.spin.renormalize,
        },
        model,
        analysis,
        output_path,
        output_format,
        sweep_hbar,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Parse(format!("cannot read scenario {}: {e}", path.display()))
    })?;
    parse_scenario(&text)
}
