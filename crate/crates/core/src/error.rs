use crate::norm::NormResult;
use crate::params::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter tuple failed the admissibility checks of the requested inequality.
    #[error("inadmissible parameters: {}", join_violations(.0))]
    Inadmissible(Vec<Violation>),

    /// Quadrature did not reach the requested tolerance; carries the best estimate found.
    #[error("accuracy error: {message} (best estimate {} ± {})", .best.value, .best.err_estimate)]
    Accuracy { message: String, best: NormResult },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
