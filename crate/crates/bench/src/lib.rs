//! Shared inputs for the pipeline benchmarks.

use spindrift_core::algebra::Vec3;
use spindrift_core::dynamics::{IntegratorSettings, ParticleState};
use spindrift_core::fields::FieldConfig;
use spindrift_core::spin::SpinVec;
use spindrift_core::PhysConstants;

pub fn constants() -> PhysConstants {
    PhysConstants::natural().with_hbar(0.01)
}

pub fn crossed_fields() -> FieldConfig {
    FieldConfig::uniform(Vec3::new(1e-3, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.05))
}

pub fn state() -> ParticleState {
    ParticleState::new(
        0.0,
        Vec3::zeros(),
        Vec3::new(0.3, 0.1, -0.2),
        SpinVec::normalized(Vec3::new(0.4, -0.3, 0.8)).unwrap(),
    )
}

pub fn short_run() -> IntegratorSettings {
    IntegratorSettings::rk45(20.0, 1.0)
}
