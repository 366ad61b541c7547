use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian (max residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is identically zero")]
    ZeroOperator,

    #[error("support condition violated{}: leakage {leakage:.3e} outside supp(sigma)", node_suffix(*.node))]
    SupportViolation { leakage: f64, node: Option<usize> },

    #[error("relative entropy is infinite; arithmetic on it is not permitted")]
    InfiniteRelativeEntropy,

    #[error("map is not linear (superposition residual {residual:.3e})")]
    NonLinearMap { residual: f64 },

    #[error("integration step failed at t = {t}: min eigenvalue {min_eigenvalue:.3e}")]
    StepFailure { t: f64, min_eigenvalue: f64 },

    #[error("t = {t} with step {h} leaves the domain [{lo}, {hi}]")]
    OutsideDomain { t: f64, h: f64, lo: f64, hi: f64 },

    #[error("pure-state bound requested on a mixed state (purity {purity:.12})")]
    NotPure { purity: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn node_suffix(node: Option<usize>) -> String {
    match node {
        Some(i) => format!(" at node {i}"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
