use thiserror::Error;

/// Errors surfaced by the queueing and value-function machinery.
#[derive(Debug, Error)]
pub enum WfError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("stability violation: utilization rho = {rho} >= 1")]
    StabilityViolation { rho: f64 },

    #[error("evaluation at a pole of the transform: {0}")]
    PoleEvaluation(String),

    #[error("singular series expansion: {0}")]
    SingularExpansion(String),

    #[error("cost term not admissible: {0}")]
    Admissibility(String),

    #[error("unsupported model for this operation: {0}")]
    UnsupportedModel(String),

    #[error("divergent series: {reason}; |partial sums| over trailing indices: {witness:?}")]
    DivergentSeries { reason: String, witness: Vec<f64> },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("cell order overflow: mu(u) = {mu} exceeds the cap {cap}")]
    CellOverflow { mu: usize, cap: usize },

    #[error("unsupported cost family: {0}")]
    UnsupportedCost(String),
}
