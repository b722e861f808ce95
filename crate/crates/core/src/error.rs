use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter that must be strictly positive was not.
    NonPositive(&'static str),
    /// A parameter that must be non-negative was negative.
    Negative(&'static str),
    /// A parameter was NaN or infinite.
    NotFinite(&'static str),
    /// A structural argument (grid size, truncation order, index) is invalid.
    Invalid(&'static str),
    /// Argument outside the domain of a special function.
    Domain { function: &'static str, x: f64 },
    /// An array had the wrong length for the grid it was paired with.
    ShapeMismatch { expected: usize, found: usize },
    /// The adaptive time step fell below the configured floor.
    TimeStepUnderflow { dt: f64, dt_min: f64, step: u64 },
    /// A non-finite value appeared in the solution.
    NonFinite { step: u64, time: f64 },
    /// An iterative eigensolver hit its iteration cap.
    EigenNoConvergence { iterations: usize, residual: f64 },
    /// Bisection bracket does not contain a sign change.
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// A linear system was numerically singular.
    Singular,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositive(name) => write!(f, "{name} must be positive"),
            Error::Negative(name) => write!(f, "{name} must be non-negative"),
            Error::NotFinite(name) => write!(f, "{name} must be finite"),
            Error::Invalid(what) => write!(f, "invalid argument: {what}"),
            Error::Domain { function, x } => {
                write!(f, "{function}({x}) is outside the function domain")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::TimeStepUnderflow { dt, dt_min, step } => write!(
                f,
                "time step {dt:e} fell below dt_min = {dt_min:e} at step {step}"
            ),
            Error::NonFinite { step, time } => {
                write!(f, "non-finite value at step {step} (t = {time})")
            }
            Error::EigenNoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "eigensolver did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::NoSignChange { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e}); widen the bracket"
            ),
            Error::Singular => write!(f, "linear system is singular"),
        }
    }
}

impl core::error::Error for Error {}
