use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Dimension,
    DegenerateGrid,
    AssumptionViolation,
    IllConditioned,
    Identifiability,
    Data,
    InvalidInput,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("operator is not strictly diagonally dominant (row {row})")]
    IllConditioned { row: usize },

    #[error("source is not identifiable: {0}")]
    Identifiability(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step {step} (t = {time}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the time level at which a failure happened.
    pub fn at_step(self, step: usize, time: f64) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                step,
                time,
                source: Box::new(e),
            },
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension { .. } => ErrorKind::Dimension,
            Error::DegenerateGrid(_) => ErrorKind::DegenerateGrid,
            Error::AssumptionViolation(_) => ErrorKind::AssumptionViolation,
            Error::IllConditioned { .. } => ErrorKind::IllConditioned,
            Error::Identifiability(_) => ErrorKind::Identifiability,
            Error::Data(_) => ErrorKind::Data,
            Error::InvalidInput(_) => ErrorKind::InvalidInput,
            Error::AtStep { source, .. } => source.kind(),
        }
    }

    /// Step index carried by the error, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::AtStep { step, .. } => Some(*step),
            _ => None,
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
