//! Polarization dynamics: the classical unit spin vector precessing as
//! S' = Omega x S, and the equivalent SU(2) evolution of a 2-spinor driven
//! by the magnetic interaction energy and the Berry connection.
//!
//! The two descriptions are algebraically equivalent: the spinor generator
//! is traceless, so mapping chi -> <chi|sigma|chi> reproduces the vector
//! equation exactly (given the same zeroth-order momentum derivative). For
//! g = 2 the combined magnetic precession rate is e c H / E_p, i.e. the spin
//! of a non-relativistic electron precesses at the full cyclotron frequency
//! and helicity is conserved in a static magnetic field.

use num_complex::Complex64;

use crate::algebra::{cr, sigma_dot, C64, CMat2, Vec3};
use crate::constants::PhysConstants;
use crate::error::{CoreError, Result};
use crate::fields::FieldSample;

/// Unit classical spin vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinVec(Vec3);

impl SpinVec {
    /// Wraps a vector that is already unit length (within 1e-9).
    pub fn new(s: Vec3) -> Result<Self> {
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(CoreError::SpinNotNormalizable { norm });
        }
        Ok(Self(s))
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(s: Vec3) -> Result<Self> {
        let norm = s.norm();
        if !(norm.is_finite() && norm > 1e-12) {
            return Err(CoreError::SpinNotNormalizable { norm });
        }
        Ok(Self(s / norm))
    }

    /// Integrator-internal constructor; norm is preserved by the stepping
    /// scheme to its own tolerance.
    pub(crate) fn new_unchecked(s: Vec3) -> Self {
        Self(s)
    }

    #[inline]
    pub fn vec(&self) -> Vec3 {
        self.0
    }
}

impl From<SpinVec> for Vec3 {
    fn from(s: SpinVec) -> Vec3 {
        s.0
    }
}

/// Normalized 2-spinor (chi_1, chi_2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor2 {
    pub up: C64,
    pub down: C64,
}

impl Spinor2 {
    pub fn new(up: C64, down: C64) -> Result<Self> {
        let s = Self { up, down };
        let deviation = (s.norm_squared() - 1.0).abs();
        if deviation > 1e-9 {
            return Err(CoreError::SpinorNotNormalized {
                deviation,
                limit: 1e-9,
            });
        }
        Ok(s)
    }

    pub fn normalized(up: C64, down: C64) -> Result<Self> {
        let n = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 1e-12) {
            return Err(CoreError::SpinorNotNormalized {
                deviation: (n - 1.0).abs(),
                limit: 1e-9,
            });
        }
        Ok(Self {
            up: up / n,
            down: down / n,
        })
    }

    pub(crate) fn new_unchecked(up: C64, down: C64) -> Self {
        Self { up, down }
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// Spinor along +z.
    pub fn spin_up() -> Self {
        Self {
            up: cr(1.0),
            down: cr(0.0),
        }
    }

    /// The spinor (up to global phase) whose polarization vector is s.
    pub fn from_spin(s: &SpinVec) -> Self {
        let v = s.vec();
        let theta = v.z.clamp(-1.0, 1.0).acos();
        let phi = v.y.atan2(v.x);
        Self {
            up: cr((theta / 2.0).cos()),
            down: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }
}

/// Classical spin vector S = <chi|sigma|chi> of a 2-spinor. Rejects inputs
/// whose norm deviates from 1 by more than 1e-6; the returned vector is
/// computed from the normalized spinor, so |S| = 1 to machine precision.
pub fn spin_from_spinor(chi: &Spinor2) -> Result<SpinVec> {
    let n2 = chi.norm_squared();
    let deviation = (n2.sqrt() - 1.0).abs();
    if deviation > 1e-6 {
        return Err(CoreError::SpinorNotNormalized {
            deviation,
            limit: 1e-6,
        });
    }
    let cross = chi.up.conj() * chi.down;
    let s = Vec3::new(
        2.0 * cross.re,
        2.0 * cross.im,
        chi.up.norm_sqr() - chi.down.norm_sqr(),
    ) / n2;
    Ok(SpinVec::new_unchecked(s))
}

/// Precession vector Omega such that S' = Omega x S:
/// Omega = -[ (e c / E_p) H + (e c^2 / (E_p (E_p + m c^2))) E x p ].
///
/// The magnetic part reproduces the relativistic g = 2 rate e c H / E_p and
/// the electric part the Thomas-type term; both follow from the spinor
/// generator below, whose sigma-linear part is exactly Omega . sigma / 2.
pub fn precession_vector(p: &Vec3, f: &FieldSample, k: &PhysConstants) -> Vec3 {
    let e_p = k.energy(p);
    let magnetic = f.h * (k.e * k.c / e_p);
    let electric = f.e.cross(p) * (k.e * k.c * k.c / (e_p * (e_p + k.mc2())));
    -(magnetic + electric)
}

/// One fixed-step RK4 update of S' = Omega x S with Omega held constant.
/// The cross-product structure preserves |S| up to the scheme's own error.
pub fn step_spin(s: &SpinVec, omega: &Vec3, dt: f64) -> SpinVec {
    let f = |v: Vec3| omega.cross(&v);
    let y = s.vec();
    let k1 = f(y);
    let k2 = f(y + k1 * (dt / 2.0));
    let k3 = f(y + k2 * (dt / 2.0));
    let k4 = f(y + k3 * dt);
    SpinVec::new_unchecked(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Exact rotation of S about omega by |omega| dt (Rodrigues formula);
/// closed-form oracle for the stepped evolution.
pub fn rotate_spin_exact(s: &SpinVec, omega: &Vec3, dt: f64) -> SpinVec {
    let w = omega.norm();
    if w == 0.0 {
        return *s;
    }
    let axis = omega / w;
    let angle = w * dt;
    let v = s.vec();
    let rotated = v * angle.cos()
        + axis.cross(&v) * angle.sin()
        + axis * (axis.dot(&v) * (1.0 - angle.cos()));
    SpinVec::new_unchecked(rotated)
}

/// Magnetic interaction energy operator of the positive-energy block
/// (Zeeman plus intrinsic-angular-momentum coupling), as a 2x2 Hermitian
/// matrix:
///
///   -(e hbar c / 2 E) sigma.H
///   -(e hbar c^3 / (2 E^2 (E + m c^2))) [ (p.H)(sigma.p) - p^2 (sigma.H) ]
pub fn interaction_energy_matrix(p: &Vec3, h_field: &Vec3, k: &PhysConstants) -> CMat2 {
    let e_p = k.energy(p);
    let zeeman = sigma_dot(h_field) * cr(-k.e * k.hbar * k.c / (2.0 * e_p));
    let coef = -k.e * k.hbar * k.c.powi(3) / (2.0 * e_p * e_p * (e_p + k.mc2()));
    let orbital =
        (sigma_dot(p) * cr(p.dot(h_field)) - sigma_dot(h_field) * cr(p.norm_squared())) * cr(coef);
    zeeman + orbital
}

/// Hermitian generator G (energy units) of the SU(2) polarization
/// evolution chi' = (i / hbar) G chi: the negated interaction energy plus
/// the Berry-connection transport term hbar A.p' evaluated with the supplied
/// zeroth-order momentum derivative. The U(1) phase is dropped; G is
/// traceless.
pub fn spinor_generator(p: &Vec3, pdot: &Vec3, f: &FieldSample, k: &PhysConstants) -> CMat2 {
    let e_p = k.energy(p);
    let transport =
        sigma_dot(&pdot.cross(p)) * cr(k.hbar * k.c * k.c / (2.0 * e_p * (e_p + k.mc2())));
    -interaction_energy_matrix(p, &f.h, k) + transport
}

/// Time derivative of the spinor under a generator: chi' = (i/hbar) G chi.
pub fn spinor_rhs(chi: &Spinor2, g: &CMat2, k: &PhysConstants) -> (C64, C64) {
    let s = nalgebra::Vector2::new(chi.up, chi.down);
    let d = g * s * Complex64::new(0.0, 1.0 / k.hbar);
    (d[0], d[1])
}

/// One RK4 step of the spinor equation with G held constant.
pub fn step_spinor(chi: &Spinor2, g: &CMat2, k: &PhysConstants, dt: f64) -> Spinor2 {
    let add = |a: &Spinor2, d: (C64, C64), w: f64| {
        Spinor2::new_unchecked(a.up + d.0 * cr(w), a.down + d.1 * cr(w))
    };
    let k1 = spinor_rhs(chi, g, k);
    let k2 = spinor_rhs(&add(chi, k1, dt / 2.0), g, k);
    let k3 = spinor_rhs(&add(chi, k2, dt / 2.0), g, k);
    let k4 = spinor_rhs(&add(chi, k3, dt), g, k);
    Spinor2::new_unchecked(
        chi.up + (k1.0 + k2.0 * cr(2.0) + k3.0 * cr(2.0) + k4.0) * cr(dt / 6.0),
        chi.down + (k1.1 + k2.1 * cr(2.0) + k3.1 * cr(2.0) + k4.1) * cr(dt / 6.0),
    )
}

/// Exact step exp((i/hbar) G dt) chi for a constant Hermitian G, in closed
/// form. Building the chronologically ordered evolution as a product of
/// these short-step exponentials reproduces the ODE solution to second
/// order in the step.
pub fn step_spinor_exact(chi: &Spinor2, g: &CMat2, k: &PhysConstants, dt: f64) -> Spinor2 {

    let a = 0.5 * (g[(0, 0)].re + g[(1, 1)].re);
    let v = Vec3::new(
        g[(0, 1)].re,
        -g[(0, 1)].im,
        0.5 * (g[(0, 0)].re - g[(1, 1)].re),
    );
    let theta = dt / k.hbar;
    let phase = Complex64::from_polar(1.0, a * theta);
    let w = v.norm() * theta;
    let u = if w == 0.0 {
        CMat2::identity() * phase
    } else {
        let n = v / v.norm();
        let ns = sigma_dot(&n);
        (CMat2::identity() * cr(w.cos()) + ns * Complex64::new(0.0, w.sin())) * phase
    };
    let vec = nalgebra::Vector2::new(chi.up, chi.down);
    let out = u * vec;
    Spinor2::new_unchecked(out[0], out[1])
}
