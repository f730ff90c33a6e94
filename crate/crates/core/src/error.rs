use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QiopaError {
    #[error("truncation deficit {deficit:.3e} exceeds tolerance {tolerance:.1e} at cutoff {n_max}")]
    CutoffOverflow {
        deficit: f64,
        tolerance: f64,
        n_max: usize,
    },
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("unsupported injection: {0} photons (expected 1 or 2)")]
    UnsupportedInjection(u32),
    #[error("grid has no nodes")]
    EmptyGrid,
    #[error("every record was discarded")]
    AllDiscarded,
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("Bell outcome {0} is not resolvable by a beamsplitter analyzer")]
    NotResolvable(&'static str),
}

pub type Result<T> = std::result::Result<T, QiopaError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> QiopaError {
    QiopaError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
