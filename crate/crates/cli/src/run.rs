//! Command orchestration: simulation runs (with optional hbar sweeps),
//! analyses, model comparison, and the verification reports.

use std::fs;
use std::path::{Path, PathBuf};

use spindrift_core::algebra::Vec3;
use spindrift_core::analysis::{
    cyclotron_shift, helicity_drift, monopole_check, spin_hall_drift, spin_hall_model_ratio,
    AnalysisReport,
};
use spindrift_core::dynamics::{integrate, RhsModel, Trajectory};
use spindrift_core::error::CoreError;
use spindrift_core::verify;
use spindrift_core::PhysConstants;

use crate::output;
use crate::scenario::{AnalysisKind, OutputFormat, Scenario};
use crate::CliError;

const GRID_SEED: u64 = 20240901;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run_trajectory(scn: &Scenario, model: RhsModel) -> Result<Trajectory, CliError> {
    integrate(&scn.state0, &scn.field, model, &scn.constants, &scn.settings)
        .map_err(CliError::Core)
}

fn sweep_path(base: &Path, hbar: f64) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".into());
    let ext = base
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = if ext.is_empty() {
        format!("{stem}_hbar{hbar:e}")
    } else {
        format!("{stem}_hbar{hbar:e}.{ext}")
    };
    base.with_file_name(name)
}

fn render_trajectory(traj: &Trajectory, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => output::trajectory_csv(traj),
        OutputFormat::Json => output::trajectory_json(traj),
    }
}

/// `simulate`: one trajectory file, or one per sweep point. When no output
/// path is configured the trajectory goes to stdout.
pub fn simulate(scn: &Scenario, out_override: Option<&Path>) -> Result<(), CliError> {
    let out = out_override
        .map(Path::to_path_buf)
        .or_else(|| scn.output_path.as_ref().map(PathBuf::from));

    if scn.sweep_hbar.is_empty() {
        let traj = run_trajectory(scn, scn.model)?;
        let text = render_trajectory(&traj, scn.output_format);
        match &out {
            Some(p) => write_file(p, &text)?,
            None => print!("{text}"),
        }
        return Ok(());
    }

    // independent workers over the sweep list; per-point output files
    let base = out.ok_or_else(|| {
        CliError::Parse("sweep runs need an output path (per-point files are derived from it)".into())
    })?;
    let results: Vec<Result<(), CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scn
            .sweep_hbar
            .iter()
            .map(|&hb| {
                let mut point = scn.clone();
                point.constants.hbar = hb;
                let path = sweep_path(&base, hb);
                scope.spawn(move || -> Result<(), CliError> {
                    let traj = run_trajectory(&point, point.model)?;
                    write_file(&path, &render_trajectory(&traj, point.output_format))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    for r in results {
        r?;
    }
    println!(
        "wrote {} sweep trajectories next to {}",
        scn.sweep_hbar.len(),
        base.display()
    );
    Ok(())
}

fn initial_field(scn: &Scenario) -> (Vec3, Vec3) {
    let f = scn.field.sample(&scn.state0.r, scn.state0.t);
    (f.e, f.h)
}

fn require(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Core(CoreError::Precondition(msg.into())))
    }
}

/// `analyze`: runs the simulations the requested observable needs and
/// produces its report(s).
pub fn analyze(scn: &Scenario, kind: AnalysisKind) -> Result<Vec<AnalysisReport>, CliError> {
    let k = &scn.constants;
    let (e0, h0) = initial_field(scn);
    match kind {
        AnalysisKind::SpinHall => {
            require(
                h0.norm() == 0.0,
                "spin Hall analysis expects a pure electric field (H = 0)",
            )?;
            require(e0.norm() > 0.0, "spin Hall analysis expects a nonzero electric field")?;
            let tb = run_trajectory(scn, RhsModel::BerryFull)?;
            let tp = run_trajectory(scn, RhsModel::PauliCanonical)?;
            let drift = spin_hall_drift(&tb, &e0, &scn.state0.s, k).map_err(CliError::Core)?;
            let ratio = spin_hall_model_ratio(&tb, &tp, &e0, &scn.state0.s, k)
                .map_err(CliError::Core)?;
            Ok(vec![drift, ratio])
        }
        AnalysisKind::Monopole => {
            require(
                h0.norm() == 0.0,
                "monopole analysis expects a pure electric field (H = 0)",
            )?;
            let rep = monopole_check(&scn.state0.p, &scn.state0.s, &e0, k)
                .map_err(CliError::Core)?;
            Ok(vec![rep])
        }
        AnalysisKind::Cyclotron => {
            require(
                e0.norm() == 0.0,
                "cyclotron analysis expects a pure magnetic field (E = 0)",
            )?;
            require(h0.norm() > 0.0, "cyclotron analysis expects a magnetic field")?;
            let h_dir = h0 / h0.norm();
            let p0v = scn.state0.p;
            require(
                p0v.dot(&h_dir).abs() <= 1e-9 * p0v.norm(),
                "cyclotron analysis expects p perpendicular to H",
            )?;
            let mu = scn.state0.s.vec().dot(&h_dir);
            require(
                (mu.abs() - 1.0).abs() <= 1e-9,
                "cyclotron analysis expects S aligned with H (mu = +-1)",
            )?;
            let tb = run_trajectory(scn, RhsModel::BerryFull)?;
            let tp = run_trajectory(scn, RhsModel::PauliCanonical)?;
            let mut base = scn.clone();
            base.constants.hbar = 0.0;
            let t0 = run_trajectory(&base, RhsModel::ClassicalLorentz)?;
            let reps = cyclotron_shift(&tb, &tp, Some(&t0), &h0, mu, p0v.norm(), k)
                .map_err(CliError::Core)?;
            Ok(vec![
                reps.frequency_berry,
                reps.frequency_pauli,
                reps.difference,
                reps.sign_opposition,
            ])
        }
        AnalysisKind::Helicity => {
            require(
                e0.norm() == 0.0,
                "helicity analysis expects a pure magnetic field (E = 0)",
            )?;
            require(h0.norm() > 0.0, "helicity analysis expects a magnetic field")?;
            let p0v = scn.state0.p;
            let lambda = scn.state0.s.vec().dot(&p0v) / (2.0 * p0v.norm());
            let traj = run_trajectory(scn, RhsModel::BerryFull)?;
            let rep = helicity_drift(&traj, &h0, lambda, p0v.norm(), k)
                .map_err(CliError::Core)?;
            Ok(vec![rep])
        }
    }
}

/// `compare-pauli`: the same scenario under both models, with the
/// divergence between the trajectories summarized per component.
pub fn compare_pauli(scn: &Scenario) -> Result<(String, String), CliError> {
    let tb = run_trajectory(scn, RhsModel::BerryFull)?;
    let tp = run_trajectory(scn, RhsModel::PauliCanonical)?;
    let n = tb.len().min(tp.len());
    let mut max_r = 0.0_f64;
    let mut max_p = 0.0_f64;
    let mut max_s = 0.0_f64;
    for i in 0..n {
        let (a, b) = (&tb.samples[i], &tp.samples[i]);
        max_r = max_r.max((a.r - b.r).norm());
        max_p = max_p.max((a.p - b.p).norm());
        max_s = max_s.max((a.s - b.s).norm());
    }
    let (fa, fb) = (tb.last(), tp.last());
    let mut text = String::new();
    text.push_str(&format!(
        "side-by-side over {} samples to t = {}\n",
        n,
        output::fmt_f64(fa.t)
    ));
    text.push_str(&format!(
        "max divergence: |dr| = {:.6e}, |dp| = {:.6e}, |dS| = {:.6e}\n",
        max_r, max_p, max_s
    ));
    text.push_str("final state (berry | pauli):\n");
    for (name, a, b) in [
        ("r", fa.r, fb.r),
        ("p", fa.p, fb.p),
        ("S", fa.s, fb.s),
    ] {
        text.push_str(&format!(
            "  {name} = [{}, {}, {}] | [{}, {}, {}]\n",
            output::fmt_f64(a.x),
            output::fmt_f64(a.y),
            output::fmt_f64(a.z),
            output::fmt_f64(b.x),
            output::fmt_f64(b.y),
            output::fmt_f64(b.z),
        ));
    }
    let mut kv = String::new();
    kv.push_str(&format!("compare.samples={n}\n"));
    kv.push_str(&format!("compare.max_dr={}\n", output::fmt_f64(max_r)));
    kv.push_str(&format!("compare.max_dp={}\n", output::fmt_f64(max_p)));
    kv.push_str(&format!("compare.max_dS={}\n", output::fmt_f64(max_s)));
    Ok((text, kv))
}

/// `verify-fw`: transformation-level checks (unitarity, classical limit,
/// off-diagonal scaling, block energy, Hermiticity) plus the connection and
/// curvature oracles.
pub fn verify_fw(k: &PhysConstants) -> Result<Vec<verify::Check>, CliError> {
    let mut checks = verify::fw_checks(k, GRID_SEED).map_err(CliError::Core)?;
    checks.push(verify::connection_oracle_check(k, 100, 5.0 * k.m * k.c, GRID_SEED).map_err(CliError::Core)?);
    checks.extend(verify::curvature_oracle_checks(k, 100, 5.0 * k.m * k.c, GRID_SEED));
    Ok(checks)
}

/// `verify-curvature`: the 100-point connection/curvature grid oracles.
pub fn verify_curvature(k: &PhysConstants) -> Result<Vec<verify::Check>, CliError> {
    let mut checks = vec![
        verify::connection_oracle_check(k, 100, 5.0 * k.m * k.c, GRID_SEED).map_err(CliError::Core)?,
    ];
    checks.extend(verify::curvature_oracle_checks(k, 100, 5.0 * k.m * k.c, GRID_SEED));
    Ok(checks)
}
