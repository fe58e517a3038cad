use thiserror::Error;

use crate::pathindex::Crossing;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("eigenvalue cluster near {re:.6}{im:+.6}i of size {size} cannot be classified")]
    Degeneracy { re: f64, im: f64, size: usize },

    #[error("phase jump of {jump:.4} rad between samples {index} and {next}; refine the sampling", next = index + 1)]
    UnwrapAmbiguity { index: usize, jump: f64 },

    #[error("degenerate crossing at t = {}", .0.tau)]
    DegenerateCrossing(Crossing),

    #[error("crossing isolation failed near t = {0}")]
    RootIsolation(f64),

    #[error("endpoint is degenerate (unit block dimension {0})")]
    DegenerateEndpoint(usize),

    #[error("non-finite value during integration at t = {0}")]
    NonFinite(f64),

    #[error("iterate k = 0 is not defined")]
    ZeroIterate,

    #[error("near resonance: {0}")]
    NearResonance(String),

    #[error("iterate {k} is degenerate: rational blocks {rational_blocks:?}, degenerate block present: {degenerate_block}")]
    DegenerateIterate {
        k: i64,
        rational_blocks: Vec<(i64, i64)>,
        degenerate_block: bool,
    },

    #[error("invalid orbit model: {0}")]
    InvalidModel(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("boundary does not square to zero")]
    BoundarySquare,

    #[error("filtration violation: {0}")]
    Filtration(String),

    #[error("inconsistent pages: {0}")]
    InconsistentPages(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Numerical failures (exit code 4) as opposed to bad input (exit code 1).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degeneracy { .. }
                | Error::UnwrapAmbiguity { .. }
                | Error::DegenerateCrossing(_)
                | Error::RootIsolation(_)
                | Error::DegenerateEndpoint(_)
                | Error::NonFinite(_)
                | Error::NearResonance(_)
                | Error::DegenerateIterate { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
