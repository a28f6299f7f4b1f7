use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver error: {0}")]
    Solver(String),

    /// The grid is too coarse to resolve a feature (e.g. bracket a zero).
    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("eigenvalue search failed: {0}")]
    Search(String),

    #[error("numeric failure at lambda = {lambda}: {reason}")]
    Numeric { lambda: f64, reason: String },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    /// The truncated eigenfunction expansion is not accurate at the requested time.
    #[error("expansion tail bound exceeded at t = {t_min}; minimal admissible t_min is {admissible}")]
    TailBound { t_min: f64, admissible: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario '{scenario}': {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn in_scenario(self, scenario: &str) -> Self {
        Error::Scenario {
            scenario: scenario.to_owned(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the caller's input rather than by a solver.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Mismatch(_) | Error::TailBound { .. } => true,
            Error::Scenario { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
