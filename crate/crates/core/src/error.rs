use thiserror::Error;

/// A single failed density-matrix invariant together with the measured deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateViolation {
    /// Frobenius norm of `rho - rho^dagger`.
    NotHermitian(f64),
    /// `|Tr rho - 1|`.
    NotUnitTrace(f64),
    /// The most negative eigenvalue.
    NotPositive(f64),
}

impl std::fmt::Display for StateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateViolation::NotHermitian(d) => {
                write!(f, "not Hermitian (||rho - rho^+||_F = {d:e})")
            }
            StateViolation::NotUnitTrace(d) => write!(f, "trace differs from 1 by {d:e}"),
            StateViolation::NotPositive(e) => write!(f, "not positive (min eigenvalue {e:e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (||A - A^+||_F = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid density matrix: {}", join(.violations))]
    InvalidState { violations: Vec<StateViolation> },
    #[error("state vector not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },
    #[error("matrix is not a projector (||P^2 - P||_F = {deviation:e})")]
    NotProjector { deviation: f64 },
    #[error("matrix is not unitary (||U^+U - I||_F = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("rank {rank} out of range 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("partition has no sectors")]
    EmptyPartition,
    #[error("sector dimension must be at least 1")]
    ZeroSectorDim,
    #[error("sector {sector} out of range for a {count}-sector partition")]
    SectorOutOfRange { sector: usize, count: usize },
    #[error("{what} not orthogonal (overlap {overlap:e})")]
    NotOrthogonal { what: String, overlap: f64 },
    #[error("block dimensions sum to {sum}, space has dimension {total}")]
    DimensionSumMismatch { sum: usize, total: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("Tr(P rho) has imaginary part {imag:e}")]
    NonRealTrace { imag: f64 },
    #[error("probability {value} outside [0, 1] beyond tolerance")]
    InvalidProbability { value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalizedDistribution { sum: f64 },
    #[error(
        "context {context} spans a different subspace (max sin of principal angle {sin_angle:e})"
    )]
    ContextSpanMismatch { context: usize, sin_angle: f64 },
    #[error("operation leaks block {block} (leakage norm {leakage:e})")]
    NotBlockInvariant { block: usize, leakage: f64 },
    #[error("Kraus operators are not trace preserving (||sum K^+K - I||_F = {deviation:e})")]
    NotTracePreserving { deviation: f64 },
    #[error("instrument has no elements")]
    EmptyInstrument,
    #[error("both instruments act on sector {sector}")]
    SameSector { sector: usize },
    #[error("expected an instrument on sector {expected}, got sector {got}")]
    WrongSector { expected: usize, got: usize },
    #[error("eigenvalues a and b coincide ({value}); X would not split the space")]
    DegenerateSplit { value: f64 },
    #[error(
        "particle always reaches Alice (|beta_0|^2 = {alice_prob}); Bob's conditional is undefined"
    )]
    BobUnreachable { alice_prob: f64 },
    #[error("invalid box: {reason}")]
    InvalidBox { reason: String },
    #[error("CHSH needs binary inputs and outputs, box has inputs ({x},{y}) outputs ({a},{b})")]
    WrongArity {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
    },
    #[error("instrument must be projective with binary outcomes")]
    NotBinaryProjective,
}

fn join(v: &[StateViolation]) -> String {
    v.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
