use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `E[exp(-s T)]` diverges for the requested negative argument.
    #[error("Laplace transform diverges at s = {s}: {reason}")]
    DivergentTransform { s: f64, reason: String },

    #[error("numerical routine did not converge after {evaluations} evaluations")]
    NonConvergent { evaluations: usize },

    #[error("non-finite value encountered at {at}")]
    NonFinite { at: f64 },

    #[error("series division by a jet with zero constant term")]
    ZeroConstantTermDivision,

    #[error("density queried at the atom {value} of a deterministic law")]
    AtomDensity { value: f64 },

    /// Success probability per attempt is zero, so the mean service time is infinite.
    #[error("service never completes: {0}")]
    NonCompleting(String),

    #[error("queue is unstable: utilization {rho} >= 1")]
    Unstable { rho: f64 },

    #[error("series coefficient {index} is {value}, truncation too aggressive")]
    SeriesIllConditioned { index: usize, value: f64 },

    #[error("service attempt budget of {budget} exceeded")]
    AttemptBudgetExceeded { budget: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Variant name, as printed by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DivergentTransform { .. } => "DivergentTransform",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::NonFinite { .. } => "NonFinite",
            Error::ZeroConstantTermDivision => "ZeroConstantTermDivision",
            Error::AtomDensity { .. } => "AtomDensity",
            Error::NonCompleting(_) => "NonCompleting",
            Error::Unstable { .. } => "Unstable",
            Error::SeriesIllConditioned { .. } => "SeriesIllConditioned",
            Error::AttemptBudgetExceeded { .. } => "AttemptBudgetExceeded",
            Error::Unsupported(_) => "Unsupported",
        }
    }

    /// True for errors that describe the model rather than the request.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Unstable { .. }
                | Error::DivergentTransform { .. }
                | Error::NonCompleting(_)
                | Error::NonConvergent { .. }
                | Error::NonFinite { .. }
                | Error::SeriesIllConditioned { .. }
                | Error::AttemptBudgetExceeded { .. }
                | Error::ZeroConstantTermDivision
        )
    }
}
