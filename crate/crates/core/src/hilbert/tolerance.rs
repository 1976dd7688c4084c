use serde::{Deserialize, Serialize};

/// Numerical tolerances used by the validating constructors and checks.
///
/// All norms are Frobenius norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `||A - A^+||_F` bound for Hermiticity.
    pub hermitian: f64,
    /// `|Tr rho - 1|`, and `|Tr P - rank|` for projectors.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a state.
    pub psd: f64,
    /// `||P^2 - P||_F` bound for projectors.
    pub idempotent: f64,
    /// Resolution of the identity and orthogonality residues.
    pub resolution: f64,
    /// `||U^+U - I||_F` bound for unitaries.
    pub unitary: f64,
    /// `| ||psi|| - 1 |` for state vectors.
    pub norm: f64,
    /// Slack around `[0, 1]` for probabilities; values inside are clamped.
    pub probability: f64,
    /// Eigenvalues closer than this are treated as one degenerate eigenvalue.
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT_TOLERANCES
    }
}

/// Default tolerances as a `const` for use in signatures and tests.
pub const DEFAULT_TOLERANCES: Tolerances = Tolerances {
    hermitian: 1e-10,
    trace: 1e-10,
    psd: 1e-9,
    idempotent: 1e-10,
    resolution: 1e-10,
    unitary: 1e-10,
    norm: 1e-10,
    probability: 1e-10,
    cluster: 1e-8,
};
