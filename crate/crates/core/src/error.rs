use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} out of range for graph with {len} vertices")]
    VertexOutOfRange { vertex: usize, len: usize },

    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid site measure: {0}")]
    InvalidMeasure(String),

    #[error("constraint family violates {hypothesis} at vertex {vertex}")]
    Hypothesis { hypothesis: &'static str, vertex: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("models are not comparable: {0}")]
    Mismatch(String),

    #[error("operation requires a binary (0-1) state space")]
    NonBinary,

    #[error("{what} has {got} vertices; the exact-analysis cap is {cap}")]
    CapExceeded { what: &'static str, got: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("boundary collar too thin: site {0:?} is needed but not provided")]
    CollarTooThin(Vec<i64>),

    #[error("invalid interaction: {0}")]
    InvalidInteraction(String),

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
