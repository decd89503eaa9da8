use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("entry ({row}, {col}) = {value} is outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("community label {label} at node {node} is outside 1..={communities}")]
    LabelOutOfRange {
        node: usize,
        label: usize,
        communities: usize,
    },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    Asymmetric { row: usize, col: usize, gap: f64 },

    #[error("degenerate scenario: {0}")]
    DegenerateScenario(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("sequence too short: need at least {needed} snapshots, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("index order violated: need s < t < e <= {len}, got s={s}, t={t}, e={e}")]
    IndexOrder {
        s: usize,
        t: usize,
        e: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid trimming fraction {0}; must lie in (0, 1/2)")]
    InvalidTrim(f64),

    #[error("infeasible interval length cap {0}; must be at least 1")]
    InfeasibleCap(usize),

    #[error("symmetric eigensolver did not converge for a {0}x{0} matrix")]
    EigenFailure(usize),

    #[error("refinement interval for estimate {estimate} is empty after trimming (s={s}, e={e})")]
    EmptyInterval { estimate: usize, s: usize, e: usize },

    #[error("preliminary estimates must be strictly increasing inside (0, {horizon}): {detail}")]
    PrelimOutOfRange { horizon: usize, detail: String },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
