use std::fmt;

/// Constraint of the relay problem that made an instance infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `p_R <= P_R`
    RelayPower,
    /// `Q >= Q_bar`
    Harvest,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::RelayPower => f.write_str("relay power"),
            Constraint::Harvest => f.write_str("energy harvesting"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate projection basis (norm {norm:e})")]
    DegenerateBasis { norm: f64 },

    #[error("zero channel vector: {0}")]
    ZeroChannel(&'static str),

    #[error("both reduced forward channels vanish; objective is identically zero")]
    ZeroGain,

    #[error("infeasible: {binding} constraint cannot be met ({detail})")]
    Infeasible { binding: Constraint, detail: String },

    #[error("solver invariant violated: {0}")]
    SolverInvariant(String),
}

impl Error {
    pub(crate) fn infeasible(binding: Constraint, detail: impl Into<String>) -> Self {
        Error::Infeasible {
            binding,
            detail: detail.into(),
        }
    }

    /// Binding constraint, when this is an infeasibility error.
    pub fn binding(&self) -> Option<Constraint> {
        match self {
            Error::Infeasible { binding, .. } => Some(*binding),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
