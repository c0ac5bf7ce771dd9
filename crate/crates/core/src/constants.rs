//! Physical constants of a scenario, in natural units.

use serde::{Deserialize, Serialize};

use crate::algebra::Vec3;
use crate::error::{CoreError, Result};

/// Scenario constants: mass, speed of light, signed charge, and the
/// semiclassical parameter hbar. Defaults are all 1; the charge sign is a
/// scenario choice, not hard-coded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysConstants {
    pub m: f64,
    pub c: f64,
    pub e: f64,
    pub hbar: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            m: 1.0,
            c: 1.0,
            e: 1.0,
            hbar: 1.0,
        }
    }
}

impl PhysConstants {
    pub fn new(m: f64, c: f64, e: f64, hbar: f64) -> Result<Self> {
        let k = Self { m, c, e, hbar };
        k.validate()?;
        Ok(k)
    }

    /// Natural units: m = c = e = hbar = 1.
    pub fn natural() -> Self {
        Self::default()
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(CoreError::InvalidConstants(format!("m must be > 0, got {}", self.m)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(CoreError::InvalidConstants(format!("c must be > 0, got {}", self.c)));
        }
        if !(self.hbar.is_finite() && self.hbar >= 0.0) {
            return Err(CoreError::InvalidConstants(format!(
                "hbar must be >= 0, got {}",
                self.hbar
            )));
        }
        if !self.e.is_finite() {
            return Err(CoreError::InvalidConstants(format!("e must be finite, got {}", self.e)));
        }
        Ok(())
    }

    /// Rest energy m c^2.
    #[inline]
    pub fn mc2(&self) -> f64 {
        self.m * self.c * self.c
    }

    /// Relativistic energy E_p = sqrt(m^2 c^4 + p^2 c^2).
    #[inline]
    pub fn energy(&self, p: &Vec3) -> f64 {
        self.c * (self.mc2() * self.m + p.norm_squared()).sqrt()
    }
}
