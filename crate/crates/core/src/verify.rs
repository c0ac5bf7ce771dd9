//! Check runners shared by the verification CLI subcommands and the
//! acceptance suite: deterministic random momentum grids, residual
//! aggregation, and pass/fail bookkeeping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{herm_deviation2, CMat2, CMat4, Vec3};
use crate::constants::PhysConstants;
use crate::error::Result;
use crate::fw;

/// One named residual check. `cmp` documents the direction: the check
/// passes when `value <= limit` ("<=") or `value >= limit` (">=").
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub cmp: &'static str,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            cmp: "<=",
            pass: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            cmp: ">=",
            pass: value >= limit,
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Deterministic momenta with |p| <= pmax (rejection-sampled in the cube).
pub fn random_momenta(n: usize, pmax: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vec3::new(
            rng.gen_range(-pmax..pmax),
            rng.gen_range(-pmax..pmax),
            rng.gen_range(-pmax..pmax),
        );
        if p.norm() <= pmax {
            out.push(p);
        }
    }
    out
}

fn max_component(m: &CMat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rel_component_error(a: &[CMat2; 3], b: &[CMat2; 3]) -> f64 {
    let scale = b.iter().map(max_component).fold(1e-300, f64::max);
    let diff = (0..3)
        .map(|i| max_component(&(a[i] - b[i])))
        .fold(0.0, f64::max);
    diff / scale
}

/// Closed-form Berry connection versus the i U dU^dag finite-difference
/// construction on a random momentum grid. Returns the per-grid worst
/// relative max-component error as a single check.
pub fn connection_oracle_check(
    k: &PhysConstants,
    n: usize,
    pmax: f64,
    seed: u64,
) -> Result<Check> {
    let mut worst = 0.0_f64;
    for p in random_momenta(n, pmax, seed) {
        let numeric = fw::berry_connection_numeric(&p, k, fw::default_fd_step(&p))?;
        let closed = fw::berry_connection_closed(&p, k);
        worst = worst.max(rel_component_error(&numeric, &closed));
    }
    Ok(Check::at_most(
        format!("berry_connection_fd_vs_closed_max_rel_{n}pt"),
        worst,
        1e-6,
    ))
}

/// Non-Abelian curl of the closed-form connection versus the closed-form
/// curvature, plus the demonstration that the Abelian curl (commutator
/// dropped) is wrong by at least 10% somewhere on the grid, plus the
/// tracelessness of the curvature.
pub fn curvature_oracle_checks(
    k: &PhysConstants,
    n: usize,
    pmax: f64,
    seed: u64,
) -> Vec<Check> {
    let mut worst_curl = 0.0_f64;
    let mut worst_abelian = 0.0_f64;
    let mut worst_trace = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    for p in random_momenta(n, pmax, seed) {
        let step = fw::default_fd_step(&p);
        let closed = fw::berry_curvature_matrix(&p, k);
        let curl = fw::curvature_from_connection(&p, k, step);
        let abelian = fw::curvature_abelian_curl(&p, k, step);
        let scale = closed.iter().map(|m| m.norm()).fold(1e-300, f64::max);
        for i in 0..3 {
            worst_curl = worst_curl.max((curl[i] - closed[i]).norm() / scale);
            worst_abelian = worst_abelian.max((abelian[i] - closed[i]).norm() / closed[i].norm().max(1e-300));
            worst_trace = worst_trace.max((closed[i][(0, 0)] + closed[i][(1, 1)]).norm());
            worst_trace = worst_trace.max((curl[i][(0, 0)] + curl[i][(1, 1)]).norm());
            worst_herm = worst_herm.max(herm_deviation2(&closed[i]));
            worst_herm = worst_herm.max(herm_deviation2(&curl[i]));
        }
    }
    vec![
        Check::at_most(
            format!("berry_curvature_curl_vs_closed_max_rel_{n}pt"),
            worst_curl,
            1e-6,
        ),
        Check::at_least(
            "berry_curvature_abelian_curl_max_deviation",
            worst_abelian,
            0.10,
        ),
        Check::at_most("berry_curvature_trace_max", worst_trace, 1e-12),
        Check::at_most("berry_curvature_hermiticity_max", worst_herm, 1e-10),
    ]
}

/// Unitarity, classical-limit, off-diagonal scaling and block-energy checks
/// of the block-diagonalizing transformation.
pub fn fw_checks(k: &PhysConstants, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // unitarity over a random grid of admissible (p, H)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_unitarity = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    for _ in 0..50 {
        let p = Vec3::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        ) * (k.m * k.c);
        let h = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ) * (0.3 * k.mc2() * k.mc2() / (k.e * k.hbar * k.c).abs().max(1e-300));
        let u = fw::fw_unitary(&p, &h, k)?;
        worst_unitarity = worst_unitarity.max((u * u.adjoint() - CMat4::identity()).norm());
        let a = fw::berry_connection_closed(&p, k);
        for comp in a {
            worst_herm = worst_herm.max(herm_deviation2(&comp));
        }
    }
    checks.push(Check::at_most("fw_unitarity_max", worst_unitarity, 1e-10));
    checks.push(Check::at_most(
        "berry_connection_hermiticity_max",
        worst_herm,
        1e-10,
    ));

    // H = 0 reduces to the classical transformation: exact diagonalization
    let p = Vec3::new(k.m * k.c, 0.0, 0.0);
    let res0 = fw::diagonalization_residual(&p, &Vec3::zeros(), k)?;
    checks.push(Check::at_most(
        "fw_offdiag_norm_at_zero_field",
        res0.offdiag_norm,
        1e-10,
    ));

    // off-diagonal block norm scales at least linearly in hbar
    let p = Vec3::new(0.5, 0.2, -0.1) * (k.m * k.c);
    let h = Vec3::new(0.1, -0.3, 0.2) * (k.mc2() * k.mc2() / (k.e * k.c).abs().max(1e-300));
    let hbars = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut logs = Vec::new();
    for &hb in &hbars {
        let kk = PhysConstants { hbar: hb, ..*k };
        let r = fw::diagonalization_residual(&p, &h, &kk)?;
        logs.push((hb.ln(), r.offdiag_norm.ln()));
    }
    let slope = fit_slope(&logs);
    checks.push(Check::at_least("fw_offdiag_loglog_slope", slope, 1.0));

    // block-energy error drops two orders per hbar decade
    let kk1 = PhysConstants { hbar: 1e-3, ..*k };
    let kk2 = PhysConstants { hbar: 1e-4, ..*k };
    let e1 = fw::diagonalization_residual(&p, &h, &kk1)?.block_energy_error;
    let e2 = fw::diagonalization_residual(&p, &h, &kk2)?.block_energy_error;
    let order = (e1 / e2).log10();
    checks.push(Check::at_least("fw_block_energy_error_order", order, 1.9));

    Ok(checks)
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
