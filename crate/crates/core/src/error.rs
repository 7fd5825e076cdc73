use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or solver parameter violates its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate generator row at node {node} (x = {x}): zero drift and zero volatility")]
    DegenerateRow { node: usize, x: f64 },

    #[error("field has {got} entries but the grid has {expected} nodes")]
    GridMismatch { expected: usize, got: usize },

    #[error("field contains a non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("sub-problem index set is empty")]
    EmptySubgrid,

    #[error("singular linear system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("root of {name} not bracketed on ({lo}, {hi})")]
    NoBracket { name: &'static str, lo: f64, hi: f64 },

    #[error("more than {cap} interventions at time {time} (state {state}); strategies ping-pong")]
    InterventionLoop { time: f64, state: f64, cap: usize },

    #[error("no admissible perturbation after {0} draws")]
    PerturbationFailed(usize),

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// True for errors caused by the user's input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => true,
            Error::Context { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
