//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured numbers. Criteria 5 and 7 exercise limit-case claims
//! about the cyclotron shift and the helicity drift that the implemented
//! equations of motion do not reproduce (the interaction-energy momentum
//! gradient cancels the curvature-force contribution to the orbital
//! frequency, and suppresses the field-aligned drift by a factor m c / p);
//! those assertions are kept faithful to the stated predictions and fail.

use spindrift_core::algebra::Vec3;
use spindrift_core::analysis::{
    cyclotron_shift, helicity_drift, monopole_check, spin_hall_drift, spin_hall_model_ratio,
};
use spindrift_core::constants::PhysConstants;
use spindrift_core::dynamics::{
    grad_delta_energy, implicit_residual, integrate, rhs, IntegratorSettings, ParticleState,
    RhsModel, Scheme, Trajectory,
};
use spindrift_core::fields::{FieldConfig, FieldSample};
use spindrift_core::fw;
use spindrift_core::spin::{spin_from_spinor, SpinVec, Spinor2};
use spindrift_core::verify;

const GRID_SEED: u64 = 20240901;

fn nat() -> PhysConstants {
    PhysConstants::natural()
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[test]
fn criterion_01_connection_oracle() {
    let check = verify::connection_oracle_check(&nat(), 100, 5.0, GRID_SEED).unwrap();
    println!(
        "criterion 1: {} — closed-form connection vs i U dU^dag on 100 momenta |p| <= 5 mc: \
         max relative component error {:.3e} (limit 1e-6)",
        status(check.pass),
        check.value
    );
    assert!(check.pass, "{check:?}");
}

#[test]
fn criterion_02_curvature_oracle() {
    let checks = verify::curvature_oracle_checks(&nat(), 100, 5.0, GRID_SEED);
    let curl = &checks[0];
    let abelian = &checks[1];
    let pass = curl.pass && abelian.pass;
    println!(
        "criterion 2: {} — non-Abelian curl vs closed form: max rel {:.3e} (limit 1e-6); \
         Abelian curl max deviation {:.3} (must reach 0.10)",
        status(pass),
        curl.value,
        abelian.value
    );
    assert!(pass, "{checks:?}");
}

#[test]
fn criterion_03_diagonalization_order() {
    let k = nat();
    let p = Vec3::new(0.5, 0.2, -0.1);
    let h = Vec3::new(0.1, -0.3, 0.2);
    let hbars = [1e-1, 1e-2, 1e-3, 1e-4];
    let pts: Vec<(f64, f64)> = hbars
        .iter()
        .map(|&hb| {
            let r = fw::diagonalization_residual(&p, &h, &k.with_hbar(hb)).unwrap();
            (hb.ln(), r.offdiag_norm.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let pass = slope >= 1.0;
    println!(
        "criterion 3: {} — off-diagonal block norm log-log slope over hbar in 1e-1..1e-4: \
         {slope:.4} (must be >= 1.0)",
        status(pass)
    );
    assert!(pass);
}

fn spin_hall_trajectories() -> (Trajectory, Trajectory, Vec3, SpinVec, PhysConstants) {
    let k = nat();
    let e_field = Vec3::new(1e-4, 0.0, 0.0);
    let cfg = FieldConfig::uniform(e_field, Vec3::zeros());
    let s0 = SpinVec::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let st = ParticleState::new(0.0, Vec3::zeros(), Vec3::new(0.1, 0.0, 0.0), s0);
    let settings = IntegratorSettings::rk45(50.0, 0.25);
    let tb = integrate(&st, &cfg, RhsModel::BerryFull, &k, &settings).unwrap();
    let tp = integrate(&st, &cfg, RhsModel::PauliCanonical, &k, &settings).unwrap();
    (tb, tp, e_field, s0, k)
}

#[test]
fn criterion_04_spin_hall_reproduction() {
    let (tb, tp, e_field, s0, k) = spin_hall_trajectories();
    let drift = spin_hall_drift(&tb, &e_field, &s0, &k).unwrap();
    let ratio = spin_hall_model_ratio(&tb, &tp, &e_field, &s0, &k).unwrap();
    // the predicted transverse velocity in this scenario is exactly
    // -(e hbar / 2 m^2 c^2) |S x E| = -5e-5
    assert!((drift.predicted + 5e-5).abs() < 1e-18, "{}", drift.predicted);
    let pass = drift.pass && ratio.pass;
    println!(
        "criterion 4: {} — transverse drift {:.6e} vs -(e hbar/2 m^2 c^2)|S x E| = {:.6e} \
         (rel {:.2e}, limit 2e-2); model drift ratio {:.4} vs 2.00 +- 0.05",
        status(pass),
        drift.measured,
        drift.predicted,
        drift.relative_error,
        ratio.measured
    );
    assert!(pass, "drift {drift:?}, ratio {ratio:?}");
}

#[test]
fn criterion_05_cyclotron_shift() {
    let k = nat().with_hbar(0.01);
    let k0 = nat().with_hbar(0.0);
    let h = 0.01;
    let p0 = 0.1;
    let cfg = FieldConfig::uniform(Vec3::zeros(), Vec3::new(0.0, 0.0, h));
    let period = 2.0 * std::f64::consts::PI * k.energy(&Vec3::new(p0, 0.0, 0.0)) / (k.e * k.c * h);
    let settings = IntegratorSettings {
        scheme: Scheme::Rk45Adaptive {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        },
        t_final: 14.0 * period,
        output_every: period / 256.0,
        renormalize: false,
    };
    let mu = 1.0;
    let s = SpinVec::new(Vec3::new(0.0, 0.0, mu)).unwrap();
    let st = ParticleState::new(0.0, Vec3::zeros(), Vec3::new(p0, 0.0, 0.0), s);
    let tb = integrate(&st, &cfg, RhsModel::BerryFull, &k, &settings).unwrap();
    let tp = integrate(&st, &cfg, RhsModel::PauliCanonical, &k, &settings).unwrap();
    let t0 = integrate(&st, &cfg, RhsModel::ClassicalLorentz, &k0, &settings).unwrap();
    let reports = cyclotron_shift(&tb, &tp, Some(&t0), &Vec3::new(0.0, 0.0, h), mu, p0, &k).unwrap();

    let freq_ok = reports.frequency_berry.pass;
    println!(
        "criterion 5a: {} — covariant-model frequency {:.9e} vs predicted prefactor {:.9e} \
         (rel {:.2e}, limit 1e-3)",
        status(freq_ok),
        reports.frequency_berry.measured,
        reports.frequency_berry.predicted,
        reports.frequency_berry.relative_error
    );
    let sign_ok = reports.sign_opposition.pass;
    println!(
        "criterion 5b: {} — mu-term sign product {} (want -1): both models shift by the same \
         +mu e hbar H / 2 m^2 c^3 (shifts {:?})",
        status(sign_ok),
        reports.sign_opposition.measured,
        reports.sign_opposition.notes
    );
    let diff_ok = reports.difference.pass;
    println!(
        "criterion 5c: {} — (omega_pauli - omega_berry)/omega_c0 = {:.3e} vs mu e hbar H / m^2 c^3 \
         = {:.3e} (limit 5%): the interaction-energy momentum gradient adds the same frequency \
         shift to both models, cancelling the curvature-force term of the covariant model",
        status(diff_ok),
        reports.difference.measured,
        reports.difference.predicted
    );
    assert!(freq_ok, "{:?}", reports.frequency_berry);
    assert!(
        sign_ok && diff_ok,
        "cyclotron mu-splitting between the models is absent in the implemented dynamics: \
         sign product {:?}, difference {:?}",
        reports.sign_opposition,
        reports.difference
    );
}

#[test]
fn criterion_06_monopole_limit() {
    let k = nat().with_hbar(0.01);
    let p = Vec3::new(20.0, 0.0, 0.0);
    let e_field = Vec3::new(0.0, 1e-4, 0.0);
    let s_plus = SpinVec::new(Vec3::new(1.0, 0.0, 0.0)).unwrap();
    let rep = monopole_check(&p, &s_plus, &e_field, &k).unwrap();
    let s_minus = SpinVec::new(Vec3::new(-1.0, 0.0, 0.0)).unwrap();
    let rep_minus = monopole_check(&p, &s_minus, &e_field, &k).unwrap();
    let flip_exact = (rep_minus.measured + rep.measured).abs() <= 1e-12 * rep.measured.abs();
    let pass = rep.pass && flip_exact;
    println!(
        "criterion 6: {} — anomalous velocity at |p| = 20 mc: rel deviation {:.3e} from \
         -lambda e hbar (p x E)/p^3 (limit 1e-2); helicity flip reverses sign exactly: {}",
        status(pass),
        rep.relative_error,
        flip_exact
    );
    assert!(pass, "{rep:?} / flip {rep_minus:?}");
}

#[test]
fn criterion_07_helicity_drift() {
    let k = nat().with_hbar(0.01);
    let h = 0.01;
    let p0 = 20.0;
    let h_field = Vec3::new(0.0, 0.0, h);
    let cfg = FieldConfig::uniform(Vec3::zeros(), h_field);
    // p perpendicular to H with S along p: lambda = 1/2, conserved
    let s = SpinVec::new(Vec3::new(1.0, 0.0, 0.0)).unwrap();
    let st = ParticleState::new(0.0, Vec3::zeros(), Vec3::new(p0, 0.0, 0.0), s);
    let e_p = k.energy(&st.p);
    let period = 2.0 * std::f64::consts::PI * e_p / (k.e * k.c * h);
    let traj = integrate(
        &st,
        &cfg,
        RhsModel::BerryFull,
        &k,
        &IntegratorSettings::rk45(12.0 * period, period / 128.0),
    )
    .unwrap();
    let rep = helicity_drift(&traj, &h_field, 0.5, p0, &k).unwrap();
    println!(
        "criterion 7: {} — field-aligned drift {:.4e} vs -lambda e hbar H / p^2 = {:.4e} \
         (rel {:.3}, limit 2e-2): the interaction-energy gradient cancels the curvature \
         drift up to a factor ~ m c / p of opposite sign",
        status(rep.pass),
        rep.measured,
        rep.predicted,
        rep.relative_error
    );
    assert!(
        rep.pass,
        "field-aligned drift does not follow the asymptotic monopole form: {rep:?}"
    );
}

#[test]
fn criterion_08_conservation() {
    // |S| over 1e4 fixed RK4 steps in crossed fields
    let k = nat().with_hbar(0.01);
    let cfg = FieldConfig::uniform(Vec3::new(1e-3, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.05));
    let s0 = SpinVec::normalized(Vec3::new(0.4, -0.3, 0.8)).unwrap();
    let st = ParticleState::new(0.0, Vec3::zeros(), Vec3::new(0.2, 0.0, 0.0), s0);
    let traj = integrate(
        &st,
        &cfg,
        RhsModel::BerryFull,
        &k,
        &IntegratorSettings::rk4(0.02, 200.0, 0.02),
    )
    .unwrap();
    assert!(traj.len() >= 10_000);
    let s_drift = traj
        .samples
        .iter()
        .map(|s| (s.s.norm() - 1.0).abs())
        .fold(0.0_f64, f64::max);

    // energy monitor over the same crossed-field scenario, adaptive scheme
    let tol = 1e-10;
    let traj_e = integrate(
        &st,
        &cfg,
        RhsModel::BerryFull,
        &k,
        &IntegratorSettings::rk45(200.0, 1.0),
    )
    .unwrap();
    let e0 = traj_e.first().energy.unwrap();
    let e_drift = traj_e
        .samples
        .iter()
        .map(|s| ((s.energy.unwrap() - e0) / e0).abs())
        .fold(0.0_f64, f64::max);
    // C fitted once against this scenario (measured 4.8e-10 at hbar = 1e-2,
    // T = 200) and frozen with margin
    let c_frozen = 1e-6;
    let bound = (10.0_f64 * tol).max(c_frozen * k.hbar * k.hbar * 200.0);

    let pass = s_drift <= 1e-9 && e_drift <= bound;
    println!(
        "criterion 8: {} — |S| drift {:.2e} over {} RK4 steps (limit 1e-9); energy monitor \
         drift {:.2e} (bound {:.2e})",
        status(pass),
        s_drift,
        traj.len() - 1,
        e_drift,
        bound
    );
    assert!(pass, "s_drift {s_drift:e}, e_drift {e_drift:e} vs {bound:e}");
}

#[test]
fn criterion_09_implicit_residual_order() {
    let cfg = FieldConfig::uniform(Vec3::new(5e-3, 1e-3, -2e-3), Vec3::new(0.05, 0.1, 0.2));
    let st = ParticleState::new(
        0.0,
        Vec3::new(0.2, 0.1, -0.3),
        Vec3::new(0.8, -0.5, 0.3),
        SpinVec::normalized(Vec3::new(0.2, -1.0, 0.4)).unwrap(),
    );
    let mut worst_ratio = 0.0_f64;
    for (m, c) in [(1.0, 1.0), (0.7, 1.9)] {
        let per_h2: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&hb| {
                let k = PhysConstants::new(m, c, 1.0, hb).unwrap();
                let d = rhs(&st, &cfg, RhsModel::BerryFull, &k);
                let res = implicit_residual(&st, &d, &cfg, &k);
                (res.rp.norm() + res.rr.norm()) / (hb * hb)
            })
            .collect();
        let maxr = per_h2.iter().cloned().fold(f64::MIN, f64::max);
        let minr = per_h2.iter().cloned().fold(f64::MAX, f64::min);
        worst_ratio = worst_ratio.max(maxr / minr);
    }
    let pass = worst_ratio <= 2.0;
    println!(
        "criterion 9: {} — implicit-form residual / hbar^2 varies by factor {:.4} across two \
         decades of hbar (limit 2), including m, c != 1",
        status(pass),
        worst_ratio
    );
    assert!(pass);
}

#[test]
fn criterion_10_spinor_vector_agreement() {
    let tol = 1e-10;
    let t_final = 100.0;
    let c_frozen = 1.0;
    let cfg = FieldConfig::uniform(Vec3::new(1e-3, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.1));
    let s0 = SpinVec::normalized(Vec3::new(1.0, 0.4, -0.2)).unwrap();
    let mut all_pass = true;
    let mut msg = String::new();
    for hbar in [1e-2, 1e-3] {
        let k = nat().with_hbar(hbar);
        let st = ParticleState::new(0.0, Vec3::zeros(), Vec3::new(0.3, 0.0, 0.0), s0)
            .with_spinor(Spinor2::from_spin(&s0));
        let traj = integrate(
            &st,
            &cfg,
            RhsModel::BerryFull,
            &k,
            &IntegratorSettings::rk45(t_final, 0.5),
        )
        .unwrap();
        let worst = traj
            .samples
            .iter()
            .map(|s| (spin_from_spinor(&s.chi.unwrap()).unwrap().vec() - s.s).norm())
            .fold(0.0_f64, f64::max);
        let bound = c_frozen * (hbar * hbar + tol) * t_final;
        all_pass &= worst <= bound;
        msg.push_str(&format!("hbar {hbar:.0e}: max dev {worst:.2e} (bound {bound:.2e}); "));
    }
    println!("criterion 10: {} — {msg}", status(all_pass));
    assert!(all_pass, "{msg}");
}

#[test]
fn criterion_11_gradient_checks() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(GRID_SEED);
    let k = nat().with_hbar(0.3);
    let cfg = FieldConfig::custom(|r, _| FieldSample {
        e: Vec3::new(0.02 * r.y, -0.01 * r.z, 0.03 * r.x),
        h: Vec3::new(0.1 + 0.04 * r.z, 0.2 - 0.03 * r.x, 0.05 * r.y + 0.02 * r.z),
    });
    let mut worst_p = 0.0_f64;
    let mut worst_r = 0.0_f64;
    for _ in 0..50 {
        let p = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let s = SpinVec::normalized(Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ))
        .unwrap();
        let r = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let grads = grad_delta_energy(&p, &s, &cfg, &r, 0.0, &k);
        let de = |pp: &Vec3, rr: &Vec3| {
            spindrift_core::dynamics::delta_energy(pp, &s, &cfg.sample(rr, 0.0), &k)
        };
        let step = 1e-6;
        let scale_p = grads.dp.norm().max(1e-12);
        let scale_r = grads.dr.norm().max(1e-12);
        for i in 0..3 {
            let mut dp = Vec3::zeros();
            dp[i] = step;
            let fd = (de(&(p + dp), &r) - de(&(p - dp), &r)) / (2.0 * step);
            worst_p = worst_p.max((grads.dp[i] - fd).abs() / scale_p);
            let mut dr = Vec3::zeros();
            dr[i] = step;
            let fdr = (de(&p, &(r + dr)) - de(&p, &(r - dr))) / (2.0 * step);
            worst_r = worst_r.max((grads.dr[i] - fdr).abs() / scale_r);
        }
    }
    let pass = worst_p <= 1e-6 && worst_r <= 1e-6;
    println!(
        "criterion 11: {} — analytic vs central-difference gradients on 50 random inputs: \
         momentum max rel {:.2e}, position max rel {:.2e} (limit 1e-6)",
        status(pass),
        worst_p,
        worst_r
    );
    assert!(pass, "dp {worst_p:e}, dr {worst_r:e}");
}
