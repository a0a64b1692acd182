use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("observable is not real: coefficient at ({n1},{n2}) has no conjugate partner (defect {defect:e})")]
    NotReal { n1: i64, n2: i64, defect: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("parity condition violated for [[{a},{b}],[{c},{d}]]: a*b and c*d must both be even")]
    Parity { a: i64, b: i64, c: i64, d: i64 },

    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("time {t} exceeds the configured limit {t_max}")]
    TimeLimit { t: i64, t_max: i64 },

    #[error("correlation value missing at t = {0}")]
    MissingSeries(i64),

    #[error("invalid window: {0}")]
    Window(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("linear algebra solver failure: {0}")]
    Solver(String),

    #[error("numerical invariant violated: {what} = {value:e} exceeds tolerance {tol:e}")]
    Invariant { what: String, value: f64, tol: f64 },

    #[error("refused: {0}")]
    Refused(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    At {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invariant(what: impl Into<String>, value: f64, tol: f64) -> Self {
        Error::Invariant { what: what.into(), value, tol }
    }

    /// Attach experiment coordinates such as `N = 233, t = 4`.
    pub fn at(self, context: impl Into<String>) -> Self {
        Error::At { context: context.into(), source: Box::new(self) }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::At { source, .. } => source.exit_code(),
            Error::Config(_) | Error::Parse { .. } => 2,
            Error::Invariant { .. } | Error::NotHermitian(_) | Error::NotReal { .. } => 3,
            Error::Solver(_) | Error::Integrator(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
