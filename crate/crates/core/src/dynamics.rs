// negated float comparisons below are deliberate: NaN must fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Trajectory dynamics: the classical Berry curvature, the magnetic
//! interaction energy and its gradients, the explicit first-order equations
//! of motion (with the implicit "Lorentz-force" form kept as a residual
//! check), and fixed/adaptive Runge-Kutta integration with spin and optional
//! spinor transport.
//!
//! Three right-hand-side models are provided:
//!  - `BerryFull`: covariant equations with the anomalous-velocity and
//!    curvature force terms; every correction carries a factor hbar.
//!  - `PauliCanonical`: canonical Hamilton equations for E_p plus the
//!    Zeeman and spin-orbit energies, used as the comparison model.
//!  - `ClassicalLorentz`: the hbar = 0 limit of both.

use crate::algebra::Vec3;
use crate::constants::PhysConstants;
use crate::error::{CoreError, Result};
use crate::fields::{FieldConfig, FieldSample};
use crate::spin::{precession_vector, spinor_generator, SpinVec, Spinor2};

/// Phase-space state of the particle (plus polarization).
#[derive(Debug, Clone, Copy)]
pub struct ParticleState {
    pub t: f64,
    pub r: Vec3,
    pub p: Vec3,
    pub s: SpinVec,
    /// When present, the 2-spinor is transported along the trajectory with
    /// the Berry-connection generator and recorded per sample.
    pub chi: Option<Spinor2>,
}

impl ParticleState {
    pub fn new(t: f64, r: Vec3, p: Vec3, s: SpinVec) -> Self {
        Self {
            t,
            r,
            p,
            s,
            chi: None,
        }
    }

    pub fn with_spinor(mut self, chi: Spinor2) -> Self {
        self.chi = Some(chi);
        self
    }
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsModel {
    BerryFull,
    PauliCanonical,
    ClassicalLorentz,
}

impl RhsModel {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::BerryFull => "berry",
            Self::PauliCanonical => "pauli",
            Self::ClassicalLorentz => "classical",
        }
    }
}

/// Phase-space derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub rdot: Vec3,
    pub pdot: Vec3,
    pub sdot: Vec3,
}

/// Zeroth-order (Lorentz) momentum derivative e E + (e c / E_p) p x H.
pub fn lorentz_force(p: &Vec3, f: &FieldSample, k: &PhysConstants) -> Vec3 {
    f.e * k.e + p.cross(&f.h) * (k.e * k.c / k.energy(p))
}

/// Classical Berry curvature dual vector,
/// F(p, S) = -(c^4 / 2 E^3) [ m S + (S.p) p / (E + m c^2) ].
///
/// Equals the expectation of the matrix-valued curvature taken in the
/// spinor whose polarization vector is S.
pub fn berry_curvature(p: &Vec3, s: &SpinVec, k: &PhysConstants) -> Vec3 {
    let e = k.energy(p);
    let sv = s.vec();
    (sv * k.m + p * (sv.dot(p) / (e + k.mc2()))) * (-k.c.powi(4) / (2.0 * e * e * e))
}

/// Magnetic interaction energy of spin plus intrinsic angular momentum:
/// Delta E = -(e hbar c / 2 E) S.H - (e c / E) L.H with
/// L = hbar c^2 p x (p x S) / (2 E (E + m c^2)).
pub fn delta_energy(p: &Vec3, s: &SpinVec, f: &FieldSample, k: &PhysConstants) -> f64 {
    let e = k.energy(p);
    let sv = s.vec();
    let zeeman = -(k.e * k.hbar * k.c / (2.0 * e)) * sv.dot(&f.h);
    // p x (p x S) . H = (p.S)(p.H) - p^2 (S.H)
    let g = p.dot(&sv) * p.dot(&f.h) - p.norm_squared() * sv.dot(&f.h);
    let orbital = -(k.e * k.hbar * k.c.powi(3) / (2.0 * e * e * (e + k.mc2()))) * g;
    zeeman + orbital
}

/// Interaction energy of the canonical Pauli-type model: Zeeman plus
/// spin-orbit, Delta E = -(e hbar c / 2 E) S.H
/// - (e hbar c^2 / (2 E (E + m c^2))) S.(E_field x p).
pub fn pauli_delta_energy(p: &Vec3, s: &SpinVec, f: &FieldSample, k: &PhysConstants) -> f64 {
    let e = k.energy(p);
    let sv = s.vec();
    let zeeman = -(k.e * k.hbar * k.c / (2.0 * e)) * sv.dot(&f.h);
    let so = -(k.e * k.hbar * k.c * k.c / (2.0 * e * (e + k.mc2()))) * sv.dot(&f.e.cross(p));
    zeeman + so
}

/// Gradients of the interaction energy in momentum and (through the local
/// field dependence) in position.
#[derive(Debug, Clone, Copy)]
pub struct EnergyGradients {
    pub dp: Vec3,
    pub dr: Vec3,
}

/// Analytic gradients of `delta_energy`.
pub fn grad_delta_energy(
    p: &Vec3,
    s: &SpinVec,
    cfg: &FieldConfig,
    r: &Vec3,
    t: f64,
    k: &PhysConstants,
) -> EnergyGradients {
    let f = cfg.sample(r, t);
    let e = k.energy(p);
    let sv = s.vec();
    let mc2 = k.mc2();
    let c2 = k.c * k.c;

    // momentum gradient
    let g = p.dot(&sv) * p.dot(&f.h) - p.norm_squared() * sv.dot(&f.h);
    let dg = sv * p.dot(&f.h) + f.h * p.dot(&sv) - p * (2.0 * sv.dot(&f.h));
    let h_of_e = 1.0 / (e * e * (e + mc2));
    let dh_de = -(3.0 * e + 2.0 * mc2) / (e.powi(3) * (e + mc2).powi(2));
    let zeeman_dp = p * (k.e * k.hbar * k.c.powi(3) / (2.0 * e.powi(3)) * sv.dot(&f.h));
    let orbital_dp =
        (dg * h_of_e + p * (g * dh_de * c2 / e)) * (-k.e * k.hbar * k.c.powi(3) / 2.0);
    let dp = zeeman_dp + orbital_dp;

    // position gradient through H(r, t)
    let (_, jh) = cfg.jacobians(r, t);
    let d_dh = sv * (-k.e * k.hbar * k.c / (2.0 * e))
        + (p * p.dot(&sv) - sv * p.norm_squared())
            * (-k.e * k.hbar * k.c.powi(3) / (2.0 * e * e * (e + mc2)));
    let dr = jh.transpose() * d_dh;

    EnergyGradients { dp, dr }
}

/// Analytic gradients of `pauli_delta_energy`.
pub fn grad_pauli_delta_energy(
    p: &Vec3,
    s: &SpinVec,
    cfg: &FieldConfig,
    r: &Vec3,
    t: f64,
    k: &PhysConstants,
) -> EnergyGradients {
    let f = cfg.sample(r, t);
    let e = k.energy(p);
    let sv = s.vec();
    let mc2 = k.mc2();
    let c2 = k.c * k.c;

    let zeeman_dp = p * (k.e * k.hbar * k.c.powi(3) / (2.0 * e.powi(3)) * sv.dot(&f.h));
    // S.(E_field x p) = p.(S x E_field)
    let sxe = sv.cross(&f.e);
    let q_of_e = 1.0 / (e * (e + mc2));
    let dq_de = -(2.0 * e + mc2) / (e * e * (e + mc2).powi(2));
    let so_dp = (sxe * q_of_e + p * (p.dot(&sxe) * dq_de * c2 / e))
        * (-k.e * k.hbar * k.c * k.c / 2.0);
    let dp = zeeman_dp + so_dp;

    let (je, jh) = cfg.jacobians(r, t);
    let d_dh = sv * (-k.e * k.hbar * k.c / (2.0 * e));
    let d_de = p.cross(&sv) * (-k.e * k.hbar * k.c * k.c / (2.0 * e * (e + mc2)));
    let dr = jh.transpose() * d_dh + je.transpose() * d_de;

    EnergyGradients { dp, dr }
}

/// Phase-space derivatives of the requested model at the given state.
///
/// With hbar = 0 the Berry and Pauli models evaluate the classical Lorentz
/// branch directly, so all three models coincide bit for bit.
pub fn rhs(state: &ParticleState, cfg: &FieldConfig, model: RhsModel, k: &PhysConstants) -> Derivatives {
    let f = cfg.sample(&state.r, state.t);
    let e = k.energy(&state.p);
    let sdot = precession_vector(&state.p, &f, k).cross(&state.s.vec());
    let classical = || Derivatives {
        rdot: state.p * (k.c * k.c / e),
        pdot: lorentz_force(&state.p, &f, k),
        sdot,
    };
    if k.hbar == 0.0 {
        return classical();
    }
    match model {
        RhsModel::ClassicalLorentz => {
            let mut d = classical();
            d.sdot = sdot;
            d
        }
        RhsModel::BerryFull => {
            let grads = grad_delta_energy(&state.p, &state.s, cfg, &state.r, state.t, k);
            let curv = berry_curvature(&state.p, &state.s, k);
            let rdot = state.p * (k.c * k.c / e)
                + grads.dp
                + curv.cross(&f.e) * (k.hbar * k.e)
                + curv.cross(&state.p.cross(&f.h)) * (k.hbar * k.e * k.c / e);
            let pdot = -grads.dr
                + f.e * k.e
                + state.p.cross(&f.h) * (k.e * k.c / e)
                + grads.dp.cross(&f.h) * (k.e / k.c)
                + curv.cross(&f.e).cross(&f.h) * (k.hbar * k.e * k.e / k.c)
                + state.p.cross(&f.h) * (k.hbar * k.e * k.e / e * curv.dot(&f.h));
            Derivatives { rdot, pdot, sdot }
        }
        RhsModel::PauliCanonical => {
            let grads = grad_pauli_delta_energy(&state.p, &state.s, cfg, &state.r, state.t, k);
            let rdot = state.p * (k.c * k.c / e) + grads.dp;
            let pdot = f.e * k.e + rdot.cross(&f.h) * (k.e / k.c) - grads.dr;
            Derivatives { rdot, pdot, sdot }
        }
    }
}

/// Residuals of the implicit ("Lorentz-force") form of the equations of
/// motion when explicit derivatives are substituted back:
///   rp = pdot - [ -dr Delta E + e E + (e/c) rdot x H ]
///   rr = rdot - [ p c^2 / E + dp Delta E - hbar pdot x F ]
/// Both are O(hbar^2) for `BerryFull` derivatives and identically zero when
/// H = 0 or hbar = 0.
#[derive(Debug, Clone, Copy)]
pub struct ImplicitResidual {
    pub rp: Vec3,
    pub rr: Vec3,
}

pub fn implicit_residual(
    state: &ParticleState,
    derivs: &Derivatives,
    cfg: &FieldConfig,
    k: &PhysConstants,
) -> ImplicitResidual {
    let f = cfg.sample(&state.r, state.t);
    let e = k.energy(&state.p);
    let (dp, dr) = if k.hbar == 0.0 {
        (Vec3::zeros(), Vec3::zeros())
    } else {
        let g = grad_delta_energy(&state.p, &state.s, cfg, &state.r, state.t, k);
        (g.dp, g.dr)
    };
    let curv = berry_curvature(&state.p, &state.s, k);
    let rp = derivs.pdot
        - (-dr + f.e * k.e + derivs.rdot.cross(&f.h) * (k.e / k.c));
    let rr = derivs.rdot
        - (state.p * (k.c * k.c / e) + dp - derivs.pdot.cross(&curv) * k.hbar);
    ImplicitResidual { rp, rr }
}

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Rk4Fixed { dt: f64 },
    Rk45Adaptive { rel_tol: f64, abs_tol: f64 },
}

/// Integrator settings. `output_every` is a time interval; samples are
/// emitted exactly at multiples of it (the integrator lands on those times)
/// plus the final time.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings {
    pub scheme: Scheme,
    pub t_final: f64,
    pub output_every: f64,
    /// Numerical hygiene knob for very long runs; off by default and in all
    /// acceptance runs.
    pub renormalize: bool,
}

impl IntegratorSettings {
    pub fn rk45(t_final: f64, output_every: f64) -> Self {
        Self {
            scheme: Scheme::Rk45Adaptive {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
            },
            t_final,
            output_every,
            renormalize: false,
        }
    }

    pub fn rk4(dt: f64, t_final: f64, output_every: f64) -> Self {
        Self {
            scheme: Scheme::Rk4Fixed { dt },
            t_final,
            output_every,
            renormalize: false,
        }
    }
}

/// One recorded trajectory point. `energy` is the monitor
/// E_p + Delta E + e Phi, present only when the field configuration
/// supplies a scalar potential.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub r: Vec3,
    pub p: Vec3,
    pub s: Vec3,
    pub chi: Option<Spinor2>,
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("non-empty trajectory")
    }
}

const STATE_DIM: usize = 13;
type StateVec = nalgebra::SVector<f64, STATE_DIM>;

fn pack(r: &Vec3, p: &Vec3, s: &Vec3, chi: Option<&Spinor2>) -> StateVec {
    let mut y = StateVec::zeros();
    y.fixed_rows_mut::<3>(0).copy_from(r);
    y.fixed_rows_mut::<3>(3).copy_from(p);
    y.fixed_rows_mut::<3>(6).copy_from(s);
    if let Some(c) = chi {
        y[9] = c.up.re;
        y[10] = c.up.im;
        y[11] = c.down.re;
        y[12] = c.down.im;
    }
    y
}

fn unpack_state(t: f64, y: &StateVec, with_chi: bool) -> ParticleState {
    let chi = with_chi.then(|| {
        Spinor2::new_unchecked(
            crate::algebra::C64::new(y[9], y[10]),
            crate::algebra::C64::new(y[11], y[12]),
        )
    });
    ParticleState {
        t,
        r: Vec3::new(y[0], y[1], y[2]),
        p: Vec3::new(y[3], y[4], y[5]),
        s: SpinVec::new_unchecked(Vec3::new(y[6], y[7], y[8])),
        chi,
    }
}

fn state_rhs(
    t: f64,
    y: &StateVec,
    cfg: &FieldConfig,
    model: RhsModel,
    k: &PhysConstants,
    with_chi: bool,
) -> StateVec {
    let st = unpack_state(t, y, with_chi);
    let d = rhs(&st, cfg, model, k);
    let mut dy = StateVec::zeros();
    dy.fixed_rows_mut::<3>(0).copy_from(&d.rdot);
    dy.fixed_rows_mut::<3>(3).copy_from(&d.pdot);
    dy.fixed_rows_mut::<3>(6).copy_from(&d.sdot);
    if with_chi {
        // generator per the transport convention: zeroth-order pdot
        let f = cfg.sample(&st.r, t);
        let pdot0 = lorentz_force(&st.p, &f, k);
        let g = spinor_generator(&st.p, &pdot0, &f, k);
        // chi' = (i/hbar) G chi; G carries one factor of hbar, divided out
        // analytically here so that hbar = 0 stays finite
        let e_p = k.energy(&st.p);
        let omega_mat = if k.hbar == 0.0 {
            let zeeman = crate::algebra::sigma_dot(&f.h) * crate::algebra::cr(k.e * k.c / (2.0 * e_p));
            let coef = k.e * k.c.powi(3) / (2.0 * e_p * e_p * (e_p + k.mc2()));
            let orbital = (crate::algebra::sigma_dot(&st.p) * crate::algebra::cr(st.p.dot(&f.h))
                - crate::algebra::sigma_dot(&f.h) * crate::algebra::cr(st.p.norm_squared()))
                * crate::algebra::cr(coef);
            let transport = crate::algebra::sigma_dot(&pdot0.cross(&st.p))
                * crate::algebra::cr(k.c * k.c / (2.0 * e_p * (e_p + k.mc2())));
            zeeman + orbital + transport
        } else {
            g * crate::algebra::cr(1.0 / k.hbar)
        };
        let chi = st.chi.expect("with_chi");
        let v = nalgebra::Vector2::new(chi.up, chi.down);
        let dv = omega_mat * v * crate::algebra::ci(1.0);
        dy[9] = dv[0].re;
        dy[10] = dv[0].im;
        dy[11] = dv[1].re;
        dy[12] = dv[1].im;
    }
    dy
}

fn rk4_step(
    t: f64,
    y: &StateVec,
    h: f64,
    cfg: &FieldConfig,
    model: RhsModel,
    k: &PhysConstants,
    with_chi: bool,
) -> StateVec {
    let f = |tt: f64, yy: &StateVec| state_rhs(tt, yy, cfg, model, k, with_chi);
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &(y + k1 * (h / 2.0)));
    let k3 = f(t + h / 2.0, &(y + k2 * (h / 2.0)));
    let k4 = f(t + h, &(y + k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate the chosen model from `state0` to `settings.t_final`.
///
/// Deterministic: identical inputs produce identical trajectories. Aborts
/// with a diagnostic on adaptive step underflow or non-finite state.
///
/// ```
/// use spindrift_core::algebra::Vec3;
/// use spindrift_core::dynamics::{integrate, IntegratorSettings, ParticleState, RhsModel};
/// use spindrift_core::fields::FieldConfig;
/// use spindrift_core::spin::SpinVec;
/// use spindrift_core::PhysConstants;
///
/// let k = PhysConstants::natural().with_hbar(0.01);
/// let cfg = FieldConfig::uniform(Vec3::new(1e-4, 0.0, 0.0), Vec3::zeros());
/// let state = ParticleState::new(
///     0.0,
///     Vec3::zeros(),
///     Vec3::new(0.1, 0.0, 0.0),
///     SpinVec::new(Vec3::new(0.0, 0.0, 1.0)).unwrap(),
/// );
/// let traj = integrate(&state, &cfg, RhsModel::BerryFull, &k,
///     &IntegratorSettings::rk45(10.0, 0.5)).unwrap();
/// assert_eq!(traj.len(), 21);
/// // the anomalous velocity drives a transverse drift ~ -e hbar E / 2 m^2 c^2
/// assert!(traj.last().r.y < 0.0);
/// ```
pub fn integrate(
    state0: &ParticleState,
    cfg: &FieldConfig,
    model: RhsModel,
    k: &PhysConstants,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    k.validate()?;
    if !(state0.r.iter().all(|v| v.is_finite()) && state0.p.iter().all(|v| v.is_finite())) {
        return Err(CoreError::Precondition(
            "initial position and momentum must be finite".into(),
        ));
    }
    if !(settings.t_final > state0.t) {
        return Err(CoreError::Precondition(format!(
            "t_final {} must exceed initial time {}",
            settings.t_final, state0.t
        )));
    }
    if !(settings.output_every > 0.0) {
        return Err(CoreError::Precondition(format!(
            "output_every must be > 0, got {}",
            settings.output_every
        )));
    }
    let with_chi = state0.chi.is_some();
    let t_final = settings.t_final;
    let span = t_final - state0.t;
    let dt_min = 1e-14 * span.max(1.0);

    let mut t = state0.t;
    let mut y = pack(&state0.r, &state0.p, &state0.s.vec(), state0.chi.as_ref());
    let mut traj = Trajectory::default();
    let monitor = |t: f64, y: &StateVec| -> Option<f64> {
        let st = unpack_state(t, y, false);
        cfg.scalar_potential(&st.r, t).map(|phi| {
            let f = cfg.sample(&st.r, t);
            let de = match model {
                RhsModel::BerryFull => delta_energy(&st.p, &st.s, &f, k),
                RhsModel::PauliCanonical => pauli_delta_energy(&st.p, &st.s, &f, k),
                RhsModel::ClassicalLorentz => 0.0,
            };
            k.energy(&st.p) + de + k.e * phi
        })
    };
    let record = |traj: &mut Trajectory, t: f64, y: &StateVec| {
        let st = unpack_state(t, y, with_chi);
        traj.samples.push(Sample {
            t,
            r: st.r,
            p: st.p,
            s: st.s.vec(),
            chi: st.chi,
            energy: monitor(t, y),
        });
    };
    record(&mut traj, t, &y);

    let mut next_output = state0.t + settings.output_every;
    let snap = 1e-9 * settings.output_every;

    let mut h = match settings.scheme {
        Scheme::Rk4Fixed { dt } => {
            if !(dt > 0.0) {
                return Err(CoreError::Precondition(format!("dt must be > 0, got {dt}")));
            }
            dt
        }
        Scheme::Rk45Adaptive { rel_tol, abs_tol } => {
            if !(rel_tol > 0.0 && abs_tol > 0.0) {
                return Err(CoreError::Precondition(
                    "tolerances must be positive".into(),
                ));
            }
            (span / 100.0).min(settings.output_every)
        }
    };

    // FSAL stage cache for the adaptive scheme
    let mut kstage: Option<StateVec> = None;

    while t < t_final - dt_min {
        let target = next_output.min(t_final);
        let h_try = h.min(target - t).max(dt_min);
        match settings.scheme {
            Scheme::Rk4Fixed { .. } => {
                y = rk4_step(t, &y, h_try, cfg, model, k, with_chi);
                t += h_try;
                if !y.iter().all(|v| v.is_finite()) {
                    return Err(CoreError::NanDetected { t });
                }
            }
            Scheme::Rk45Adaptive { rel_tol, abs_tol } => {
                let f = |tt: f64, yy: &StateVec| state_rhs(tt, yy, cfg, model, k, with_chi);
                let mut stages = [StateVec::zeros(); 7];
                stages[0] = match kstage {
                    Some(kv) => kv,
                    None => f(t, &y),
                };
                for i in 1..7 {
                    let mut yi = y;
                    for j in 0..i {
                        yi += stages[j] * (DP_A[i][j] * h_try);
                    }
                    stages[i] = f(t + DP_C[i] * h_try, &yi);
                }
                // assemble 5th and 4th order solutions
                let mut y5 = y;
                let mut y4 = y;
                for i in 0..7 {
                    y5 += stages[i] * (DP_B5[i] * h_try);
                    y4 += stages[i] * (DP_B4[i] * h_try);
                }
                if !y5.iter().all(|v| v.is_finite()) {
                    return Err(CoreError::NanDetected { t });
                }
                // weighted RMS error estimate
                let mut acc = 0.0;
                for i in 0..STATE_DIM {
                    let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
                    let e = (y5[i] - y4[i]) / scale;
                    acc += e * e;
                }
                let err = (acc / STATE_DIM as f64).sqrt();
                if err <= 1.0 {
                    let clipped = h_try < h;
                    t += h_try;
                    y = y5;
                    kstage = Some(stages[6]); // FSAL
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // a step shortened only to land on an output boundary
                    // does not shrink the controller's step size
                    h = if clipped {
                        h.max(h_try * factor)
                    } else {
                        (h_try * factor).max(dt_min)
                    };
                } else {
                    let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    let h_new = h_try * factor;
                    if h_new < dt_min {
                        return Err(CoreError::StepUnderflow {
                            t,
                            dt: h_new,
                            dt_min,
                        });
                    }
                    h = h_new;
                    kstage = Some(stages[0]);
                    continue;
                }
            }
        }
        if settings.renormalize {
            let sn = Vec3::new(y[6], y[7], y[8]).norm();
            if sn > 0.0 {
                y[6] /= sn;
                y[7] /= sn;
                y[8] /= sn;
            }
            if with_chi {
                let cn = (y[9] * y[9] + y[10] * y[10] + y[11] * y[11] + y[12] * y[12]).sqrt();
                if cn > 0.0 {
                    for i in 9..13 {
                        y[i] /= cn;
                    }
                }
            }
        }
        if (t - next_output).abs() <= snap && t < t_final - dt_min {
            record(&mut traj, t, &y);
            next_output += settings.output_every;
        } else if t >= next_output + snap {
            // fixed-step scheme may overshoot an output boundary; record the
            // step end and advance the boundary past it
            record(&mut traj, t, &y);
            while next_output <= t + snap {
                next_output += settings.output_every;
            }
        }
    }
    let t_end = if (t - t_final).abs() <= dt_min { t_final } else { t };
    record(&mut traj, t_end, &y);
    Ok(traj)
}
