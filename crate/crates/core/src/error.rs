use std::path::PathBuf;

/// Errors produced by every stage of the optimization pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("deformation tangles the mesh: element {element} on level {level} has signed area {area:e}")]
    Tangling {
        level: usize,
        element: usize,
        area: f64,
    },

    #[error("degenerate element (det = {det:e})")]
    DegenerateElement { det: f64 },

    #[error("assembly produced non-finite values in element {element}")]
    Assembly { element: usize },

    #[error("singular configuration: element {element} has det(I + Du) = {det:e}")]
    SingularConfiguration { element: usize, det: f64 },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("Schur complement is rank deficient (pivot {pivot:e} in column {column})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
