use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The CLI maps [`Error::Config`] to exit code 2 and everything numerical to 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("curve profile is not C2: {0}")]
    NotC2(String),

    #[error("arclength {s} outside sampled range [{min}, {max}]")]
    OutOfRange { s: f64, min: f64, max: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, error {error:e}")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("operator failed the Hermitian check: relative defect {0:e}")]
    NotHermitian(f64),

    #[error("eigensolver did not converge after {iterations} iterations; best Ritz values {ritz:?}, residuals {residuals:?}")]
    NoConvergence {
        iterations: usize,
        ritz: Vec<f64>,
        residuals: Vec<f64>,
    },

    #[error("shift-invert inner solve broke down at shift {0}")]
    ShiftBreakdown(f64),

    #[error("dense fallback refused: dimension {0} exceeds {1}")]
    TooLarge(usize, usize),

    #[error("no bound state at this discretization: lowest eigenvalue {0} is not negative")]
    NoBoundState(f64),

    #[error("ground state is not simple: lowest two eigenvalues {0} and {1}")]
    DegenerateGroundState(f64, f64),

    #[error("ground state is not positive: {0}")]
    NotPositive(String),

    #[error("angular cutoff too small: minimizing mode {m} sits at the edge of [-{max}, {max}]")]
    AngularCutoff { m: i64, max: i64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("asymptotic regime not reached: {0}")]
    NotAsymptotic(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
