use thiserror::Error;

/// Errors produced by the analytic, simulation and chain routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// `delta2 = mu2 * beta2 * lambda` vanishes, so the eigenvector slopes
    /// and the limiting ratio are undefined.
    #[error("degenerate mutation regime: mu2 * beta2 * lambda = 0, eigenvector slopes and R are undefined")]
    DegenerateMutation,

    #[error("sensitivities are singular: eigenvalue gap is zero")]
    SingularSensitivity,

    #[error("generator is reducible: not every type communicates with every other")]
    ReducibleGenerator,

    #[error("generator has {0} types, dense solve supports at most {max}", max = crate::model::MAX_TYPES)]
    TooManyTypes(usize),

    #[error("initial population must be non-empty")]
    InvalidInit,

    #[error("population cap {cap} must exceed the initial total {initial}")]
    InvalidCap { cap: u64, initial: u64 },

    #[error("process is not supercritical (sigma+ = {sigma_plus})")]
    NotSupercritical { sigma_plus: f64 },

    #[error("horizon {horizon} too short: exp(-gap * horizon) = {residual} must be below {limit}")]
    HorizonTooShort { horizon: f64, residual: f64, limit: f64 },

    #[error("no replicate survived to the horizon with z1 > 0")]
    AllExtinct,

    #[error("path did not finish before the time limit {0}")]
    MaxTimeExceeded(f64),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("regression design is degenerate: {0}")]
    DegenerateDesign(&'static str),

    #[error("sigma+ stays non-negative up to level {0}")]
    NeverSubcritical(usize),

    #[error("level 0 is already subcritical: no epidemic (k* = 0)")]
    AlreadySubcritical,

    #[error("linear system is singular")]
    Singular,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
