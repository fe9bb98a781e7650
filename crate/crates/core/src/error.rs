use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("assembly failed on element {element} at t = {time}: {what}")]
    Assembly {
        element: usize,
        time: f64,
        what: String,
    },

    #[error("linear solver failed after {iterations} iterations (relative residual {residual:.3e}): {reason}")]
    SolverFailure {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("projected Gauss-Seidel did not converge in {sweeps} sweeps (complementarity residual {residual:.3e})")]
    PgsFailure { sweeps: usize, residual: f64 },

    #[error("eigenvalue iteration failed: {0}")]
    Eigen(String),

    #[error("time step {step}: {source}")]
    TimeStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("family index n = {index}: {source}")]
    FamilyMember {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("energy estimate violated at node {node}: lhs {lhs:.6e} > rhs {rhs:.6e}")]
    EnergyViolation { node: usize, lhs: f64, rhs: f64 },

    #[error("parse error at line {line}: {what}")]
    Parse { line: usize, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::TimeStep {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_index(self, index: usize) -> Self {
        Error::FamilyMember {
            index,
            source: Box::new(self),
        }
    }

    /// Whether the failure is numerical (solver breakdown, non-convergence)
    /// as opposed to a malformed input or configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SolverFailure { .. }
            | Error::PgsFailure { .. }
            | Error::Eigen(_)
            | Error::Assembly { .. }
            | Error::EnergyViolation { .. } => true,
            Error::TimeStep { source, .. } | Error::FamilyMember { source, .. } => {
                source.is_numerical()
            }
            _ => false,
        }
    }
}
