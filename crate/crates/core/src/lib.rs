//! Semiclassical dynamics of a relativistic Dirac electron.
//!
//! The crate simulates the coupled spin-precession and trajectory equations
//! of a relativistic electron to first order in hbar, where the trajectory
//! picks up topological terms driven by the non-Abelian Berry curvature of
//! the positive-energy subspace. It also verifies, at the matrix level, the
//! magnetic-field-modified Foldy-Wouthuysen block-diagonalization together
//! with the closed-form Berry connection and curvature against
//! finite-difference oracles, and extracts limit-case observables
//! (spin Hall drift, momentum-space monopole, cyclotron shift, helicity
//! drift) from simulated trajectories.

pub mod algebra;
pub mod analysis;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod fw;
pub mod spin;
pub mod verify;

pub use algebra::{C64, CMat2, CMat4, Vec3};
pub use constants::PhysConstants;
pub use error::{CoreError, ErrorClass, Result};
pub use fields::{FieldConfig, FieldSample};
pub use spin::{SpinVec, Spinor2};
