use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid field setup: {0}")]
    InvalidSetup(String),

    #[error("orbit is not regular semisimple or is inconsistent: {0}")]
    InvalidOrbit(String),

    #[error("invalid test function: {0}")]
    InvalidFunction(String),

    #[error("orbital integral diverges: support along the orbit is not compact ({0})")]
    Divergent(String),

    #[error("test function does not vanish on B0; the germ expansion needs f|B0 = 0 (the number of monomials grows without bound near the diagonal)")]
    NotVanishingOnB0,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid germ data: {0}")]
    InvalidGerm(String),

    #[error("fourth-case fraction is not an integer: (l - (i+j-1)) * e_max = {numerator} is odd")]
    ParityInadmissible { numerator: i128 },

    #[error("class height {l} is not attainable for levels ({i}, {j})")]
    HeightNotAttainable { i: u32, j: u32, l: u32 },

    #[error("invalid deformation query: {0}")]
    InvalidQuery(String),

    #[error("invalid matching context: {0}")]
    InvalidContext(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
