use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ShadowError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("chart domain exceeded: |v| = {norm} must be below {limit}")]
    ChartDomainExceeded { norm: f64, limit: f64 },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("not partially hyperbolic: {0}")]
    NotPartiallyHyperbolic(String),

    #[error("point is not on the expected leaf (transversal residual {residual:e})")]
    NotOnLeaf { residual: f64 },

    #[error("points too far apart for a local leaf intersection: dist = {dist} >= {limit}")]
    TooFarApart { dist: f64, limit: f64 },

    #[error("degenerate splitting frame (condition number {cond:e})")]
    DegenerateFrame { cond: f64 },

    #[error("constants infeasible: {0}")]
    ConstantsInfeasible(String),

    #[error("correction bound violated at step {k}: |z| = {norm:e} > L*d = {bound:e}")]
    Lemma1Violation { k: usize, norm: f64, bound: f64 },

    #[error("pseudotrajectory step d = {d:e} exceeds the admissible d0 = {d0:e}")]
    StepTooLarge { d: f64, d0: f64 },
}

pub type Result<T> = std::result::Result<T, ShadowError>;
