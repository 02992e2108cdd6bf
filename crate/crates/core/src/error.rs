use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("measurement g[{index}] = {value:e} is too close to zero to divide by")]
    VanishingMeasurement { index: usize, value: f64 },

    #[error(
        "Newton derivative underflow at time index {index}, iteration {iteration}: \
         p = {p:e}, F = {residual:e}, F' = {derivative:e}"
    )]
    DerivativeUnderflow {
        index: usize,
        iteration: usize,
        p: f64,
        residual: f64,
        derivative: f64,
    },

    #[error(
        "Newton did not converge at time index {index} after {iterations} iterations: \
         p = {p:e}, F = {residual:e}"
    )]
    NoConvergence {
        index: usize,
        iterations: usize,
        p: f64,
        residual: f64,
    },

    #[error("invalid Newton configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid smoothing parameters: {0}")]
    InvalidSmoothing(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("time step to index {index} failed: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Bundle { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_step(index: usize, source: Error) -> Self {
        match source {
            // Newton errors already carry their time index.
            e @ (Error::DerivativeUnderflow { .. } | Error::NoConvergence { .. }) => e,
            e => Error::AtStep {
                index,
                source: Box::new(e),
            },
        }
    }

    /// True for the two ways a Newton solve can give up.
    pub fn is_newton_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::DerivativeUnderflow { .. } | Error::NoConvergence { .. }
        )
    }

    /// Strips `AtStep` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}
