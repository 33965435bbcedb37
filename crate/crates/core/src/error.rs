use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes surfaced by the command line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Contract,
    WellPosedness,
    Recognizability,
    Realization,
    Input,
}

impl std::fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ErrorCategory::Contract => "contract",
            ErrorCategory::WellPosedness => "well-posedness",
            ErrorCategory::Recognizability => "recognizability",
            ErrorCategory::Realization => "realization",
            ErrorCategory::Input => "input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    Shape {
        what: String,
        expected: String,
        found: String,
    },
    #[error("letter {letter} outside alphabet 1..={size}")]
    Alphabet { letter: usize, size: usize },
    #[error("word products are only defined for non-empty words")]
    EmptyWord,
    #[error("loop matrix I - A*Delta is not invertible (reciprocal condition {rcond:.3e}{})", step_suffix(*.step))]
    WellPosedness { rcond: f64, step: Option<usize> },
    #[error("word of length {len} exceeds series depth {depth}")]
    Truncation { len: usize, depth: usize },
    #[error("series depth {depth} is below the 2n+1 = {required} needed for order bound {order}")]
    DepthTooSmall {
        depth: usize,
        order: usize,
        required: usize,
    },
    #[error("Hankel rank did not stabilize within order bound {order} (rank {rank}, sub-block ranks {sub_ranks:?})")]
    OrderBoundTooSmall {
        order: usize,
        rank: usize,
        sub_ranks: (usize, usize),
    },
    #[error("numerically ambiguous rank: singular value {sigma:.3e} within a factor 10 of tolerance {tol:.3e}")]
    IllConditioned { sigma: f64, tol: f64 },
    #[error("invalid fast-path factorization: {0}")]
    InvalidFactor(String),
    #[error("psi is not recognizable with the supplied data: {0}")]
    Recognizability(String),
    #[error("affine system too ill-conditioned (condition {cond:.3e}); psi components look linearly dependent")]
    DependenceSuspected { cond: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn step_suffix(step: Option<usize>) -> String {
    match step {
        Some(t) => format!(" at step {t}"),
        None => String::new(),
    }
}

impl Error {
    pub fn shape(what: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            what: what.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Shape { .. }
            | Error::Alphabet { .. }
            | Error::EmptyWord
            | Error::Truncation { .. }
            | Error::InvalidFactor(_)
            | Error::Precondition(_) => ErrorCategory::Contract,
            Error::WellPosedness { .. } => ErrorCategory::WellPosedness,
            Error::Recognizability(_) | Error::DependenceSuspected { .. } => {
                ErrorCategory::Recognizability
            }
            Error::DepthTooSmall { .. }
            | Error::OrderBoundTooSmall { .. }
            | Error::IllConditioned { .. } => ErrorCategory::Realization,
            Error::Parse(_) | Error::Io(_) => ErrorCategory::Input,
        }
    }
}
