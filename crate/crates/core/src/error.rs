use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid irrep label: 2j = {0} must be a non-negative integer")]
    InvalidIrrep(f64),
    #[error("invalid Fock truncation: n_max = {0} (need n_max >= 1)")]
    InvalidTruncation(usize),
    #[error("dimension mismatch: operator is {op}x{op}, state has {state} amplitudes")]
    DimensionMismatch { op: usize, state: usize },
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("operator expectation has imaginary residue {0}; operator is not Hermitian")]
    ImaginaryResidue(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncation insufficient: discarded tail probability {tail:e} at n_max = {n_max}")]
    TruncationInsufficient { n_max: usize, tail: f64 },
    #[error("degenerate intelligent-state spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("eigen-solver failed: {0}")]
    EigenSolver(String),
    #[error("derivative vanishes: |d<O>/dphi| = {derivative:e} at phi = {phi}")]
    DerivativeVanishes { phi: f64, derivative: f64 },
    #[error("zero fringe derivative: <Jz> = {0:e}; use the squared-difference scheme")]
    ZeroFringeDerivative(f64),
    #[error("degenerate ports: nbar1 = nbar2 = {0}")]
    DegeneratePorts(f64),
    #[error("optimizer bracket failure: {0}")]
    BracketFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
