use thiserror::Error;

/// Coarse classification used by callers (e.g. the CLI) to map errors to
/// exit codes: precondition violations are scenario/physics problems, while
/// numerical failures arise during otherwise admissible computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Precondition,
    Numerical,
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid physical constants: {0}")]
    InvalidConstants(String),

    #[error(
        "field configuration inadmissible: |e hbar c| |H| = {zeeman_scale:.6e} \
         reaches m^2 c^4 + p^2 c^2 = {energy_scale:.6e}"
    )]
    InadmissibleField {
        zeeman_scale: f64,
        energy_scale: f64,
    },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("polar factor undefined: matrix is numerically singular (min eigenvalue {min_eigenvalue:.3e})")]
    SingularFactor { min_eigenvalue: f64 },

    #[error(
        "finite-difference step too large: step vs step/2 disagree by {disagreement:.3e} \
         (limit {limit:.1e})"
    )]
    FdStepTooLarge { disagreement: f64, limit: f64 },

    #[error("spin vector not normalizable (norm {norm:.3e})")]
    SpinNotNormalizable { norm: f64 },

    #[error("spinor not normalized (norm deviates by {deviation:.3e}, limit {limit:.1e})")]
    SpinorNotNormalized { deviation: f64, limit: f64 },

    #[error("adaptive step underflow at t = {t:.6e} (dt = {dt:.3e} below dt_min = {dt_min:.3e})")]
    StepUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("non-finite state detected at t = {t:.6e}")]
    NanDetected { t: f64 },

    #[error("insufficient data: {what} (need {needed}, got {got})")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("fit degenerate: signal {signal:.3e} below {factor} x noise {noise:.3e}")]
    FitDegenerate {
        signal: f64,
        noise: f64,
        factor: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl CoreError {
    pub fn class(&self) -> ErrorClass {
        use CoreError::*;
        match self {
            InvalidConstants(_)
            | InadmissibleField { .. }
            | NotHermitian { .. }
            | NotPositiveDefinite { .. }
            | SpinNotNormalizable { .. }
            | SpinorNotNormalized { .. }
            | InsufficientData { .. }
            | Precondition(_) => ErrorClass::Precondition,
            SingularFactor { .. }
            | FdStepTooLarge { .. }
            | StepUnderflow { .. }
            | NanDetected { .. }
            | FitDegenerate { .. } => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
