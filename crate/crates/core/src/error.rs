use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented domain (non power of two, odd sharpness, ...).
    Parameter(String),
    /// Two operands live on different grids.
    Dimension {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A brute-force diagnostic would exceed its work budget.
    ScaleGuard { work: u64, budget: u64 },
    /// The residual grew instead of shrinking; carries the offending growth factor.
    Diverged { iteration: usize, growth: f64 },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Dimension { expected, found } => write!(
                f,
                "grid mismatch: expected n={} d={}, found n={} d={}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::ScaleGuard { work, budget } => {
                write!(f, "diagnostic needs {work} operations, budget is {budget}")
            }
            Error::Diverged { iteration, growth } => write!(
                f,
                "residual estimate grew by {growth:.1}x at iteration {iteration}"
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn display_is_readable() {
        let e = Error::Dimension {
            expected: (8, 1),
            found: (16, 2),
        };
        assert_eq!(
            e.to_string(),
            "grid mismatch: expected n=8 d=1, found n=16 d=2"
        );
        assert!(Error::param("F must be even")
            .to_string()
            .contains("F must be even"));
    }
}
