use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("flat map is singular at {point:?} (|det B| = {det:e}); contact condition violated")]
    SingularFlat { point: Vec<f64>, det: f64 },
    #[error("symplectic form is degenerate at {point:?} (|det omega| = {det:e})")]
    SingularOmega { point: Vec<f64>, det: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("conformal factor vanishes or changes sign near {point:?}")]
    VanishingConformalFactor { point: Vec<f64> },
    #[error("integration step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("exceeded the limit of {0} integration steps")]
    MaxSteps(usize),
    #[error("flow left its domain at t = {t}")]
    DomainExit { t: f64, point: Vec<f64> },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point {point:?} is not on the ray preimage (residual {residual:e})")]
    NotOnRay { point: Vec<f64>, residual: f64 },
    #[error("point {point:?} lies outside the admissible region")]
    OutsideRegion { point: Vec<f64> },
    #[error("invalid section: {0}")]
    InvalidSection(String),
    #[error("all action values vanish at {point:?}")]
    VanishingActions { point: Vec<f64> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
