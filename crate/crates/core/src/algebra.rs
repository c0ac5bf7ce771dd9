//! Small dense complex matrix algebra: Pauli matrices, Hermitian matrix
//! functions, block access on 4x4 matrices.
//!
//! Everything here is value-semantic over stack-allocated nalgebra types;
//! all functions are pure.

use nalgebra::{Matrix2, Matrix4, Vector3};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;
pub type Vec3 = Vector3<f64>;

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[inline]
pub fn ci(im: f64) -> C64 {
    C64::new(0.0, im)
}

/// The Pauli matrices (sigma_x, sigma_y, sigma_z).
pub fn pauli() -> [CMat2; 3] {
    [
        CMat2::new(cr(0.0), cr(1.0), cr(1.0), cr(0.0)),
        CMat2::new(cr(0.0), ci(-1.0), ci(1.0), cr(0.0)),
        CMat2::new(cr(1.0), cr(0.0), cr(0.0), cr(-1.0)),
    ]
}

/// sigma . v for a real 3-vector v.
pub fn sigma_dot(v: &Vec3) -> CMat2 {
    let s = pauli();
    s[0] * cr(v.x) + s[1] * cr(v.y) + s[2] * cr(v.z)
}

#[inline]
pub fn commutator2(a: &CMat2, b: &CMat2) -> CMat2 {
    a * b - b * a
}

#[inline]
pub fn anticommutator4(a: &CMat4, b: &CMat4) -> CMat4 {
    a * b + b * a
}

pub fn herm_deviation2(m: &CMat2) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn herm_deviation4(m: &CMat4) -> f64 {
    (m - m.adjoint()).norm()
}

/// Assemble a 4x4 matrix from 2x2 blocks [[ul, ur], [ll, lr]].
pub fn from_blocks(ul: &CMat2, ur: &CMat2, ll: &CMat2, lr: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(ul);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(ur);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(ll);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(lr);
    m
}

pub fn block_ul(m: &CMat4) -> CMat2 {
    m.fixed_view::<2, 2>(0, 0).into_owned()
}

pub fn block_ur(m: &CMat4) -> CMat2 {
    m.fixed_view::<2, 2>(0, 2).into_owned()
}

pub fn block_ll(m: &CMat4) -> CMat2 {
    m.fixed_view::<2, 2>(2, 0).into_owned()
}

pub fn block_lr(m: &CMat4) -> CMat2 {
    m.fixed_view::<2, 2>(2, 2).into_owned()
}

fn check_hermitian4(m: &CMat4) -> Result<CMat4> {
    let dev = herm_deviation4(m);
    if dev > 1e-12 * m.norm().max(1.0) {
        return Err(CoreError::NotHermitian { deviation: dev });
    }
    Ok((m + m.adjoint()) * cr(0.5))
}

/// Hermitian square root of a positive-definite 4x4 matrix, by
/// eigendecomposition.
pub fn hermitian_sqrt4(m: &CMat4) -> Result<CMat4> {
    let h = check_hermitian4(m)?;
    let se = h.symmetric_eigen();
    let min = se.eigenvalues.min();
    if min <= 0.0 {
        return Err(CoreError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let d = Matrix4::from_diagonal(&se.eigenvalues.map(|x| cr(x.sqrt())));
    let q = se.eigenvectors;
    Ok(q * d * q.adjoint())
}

/// Hermitian square root of a positive-definite 2x2 matrix, in closed form.
///
/// Writes X = a I + v . sigma (a real, v real since X is Hermitian) with
/// eigenvalues a +- |v|, and maps sqrt through the same decomposition.
pub fn hermitian_sqrt2(m: &CMat2) -> Result<CMat2> {
    let dev = herm_deviation2(m);
    if dev > 1e-12 * m.norm().max(1.0) {
        return Err(CoreError::NotHermitian { deviation: dev });
    }
    let a = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let v = Vec3::new(
        m[(0, 1)].re,
        -m[(0, 1)].im,
        0.5 * (m[(0, 0)].re - m[(1, 1)].re),
    );
    let r = v.norm();
    let (lo, hi) = (a - r, a + r);
    if lo <= 0.0 {
        return Err(CoreError::NotPositiveDefinite { min_eigenvalue: lo });
    }
    let b = 0.5 * (hi.sqrt() + lo.sqrt());
    let g = 0.5 * (hi.sqrt() - lo.sqrt());
    if r == 0.0 {
        return Ok(CMat2::identity() * cr(b));
    }
    Ok(CMat2::identity() * cr(b) + sigma_dot(&(v / r)) * cr(g))
}

/// Unitary polar factor U = N (N^dag N)^{-1/2} of an invertible matrix.
pub fn polar_unitary4(n: &CMat4) -> Result<CMat4> {
    let g = n.adjoint() * n;
    let h = (g + g.adjoint()) * cr(0.5);
    let se = h.symmetric_eigen();
    let min = se.eigenvalues.min();
    if min <= 1e-300 {
        return Err(CoreError::SingularFactor {
            min_eigenvalue: min,
        });
    }
    let d = Matrix4::from_diagonal(&se.eigenvalues.map(|x| cr(1.0 / x.sqrt())));
    let q = se.eigenvectors;
    let inv_sqrt = q * d * q.adjoint();
    Ok(n * inv_sqrt)
}
