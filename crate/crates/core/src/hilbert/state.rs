use nalgebra::DMatrix;

use super::matrix::{outer, trace_of, vector_norm, ComplexMatrix, C64};
use super::operator::hermitian_eigh;
use super::tolerance::{Tolerances, DEFAULT_TOLERANCES};
use crate::error::{Error, Result, StateViolation};

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` against the default tolerances.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &DEFAULT_TOLERANCES)
    }

    /// Validates `matrix`, reporting every violated invariant at once.
    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let mut violations = Vec::new();
        let herm = matrix.hermiticity_deviation();
        if herm > tol.hermitian {
            violations.push(StateViolation::NotHermitian(herm));
        }
        let trace_dev = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        if trace_dev > tol.trace {
            violations.push(StateViolation::NotUnitTrace(trace_dev));
        }
        let sym = (matrix.as_dmatrix() + matrix.adjoint().as_dmatrix()) * C64::new(0.5, 0.0);
        let (eigs, _) = hermitian_eigh(&sym);
        let min = eigs.first().copied().unwrap_or(0.0);
        if min < -tol.psd {
            violations.push(StateViolation::NotPositive(min));
        }
        if violations.is_empty() {
            Ok(Self { matrix })
        } else {
            Err(Error::InvalidState { violations })
        }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = DMatrix::<C64>::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Self {
            matrix: ComplexMatrix::wrap(m),
        }
    }

    /// `rho_1 (x) rho_2`, first factor slowest.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub(crate) fn dmatrix(&self) -> &DMatrix<C64> {
        self.matrix.as_dmatrix()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigh(self.matrix.as_dmatrix()).0
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let m = self.matrix.as_dmatrix();
        trace_of(&(m * m)).re
    }
}

/// Validates a density matrix with the default tolerances.
pub fn make_density(matrix: ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(matrix)
}

/// `|psi><psi|` for the given amplitudes.
///
/// With `normalize` unset the amplitudes must already have unit norm.
pub fn pure_state(amplitudes: &[C64], normalize: bool) -> Result<DensityMatrix> {
    pure_state_with(amplitudes, normalize, &DEFAULT_TOLERANCES)
}

pub fn pure_state_with(
    amplitudes: &[C64],
    normalize: bool,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    let norm = vector_norm(amplitudes);
    if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
        return Err(Error::NotNormalized { norm });
    }
    let psi: Vec<C64> = if normalize {
        amplitudes.iter().map(|z| z / norm).collect()
    } else {
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.to_vec()
    };
    DensityMatrix::with_tolerances(ComplexMatrix::wrap(outer(&psi, &psi)), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn maximally_mixed_qutrit_is_accepted() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0 / 3.0; 3]);
        let rho = make_density(m).unwrap();
        assert_eq!(rho.dim(), 3);
        assert!((rho.purity() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn basis_projector_is_accepted() {
        let rho = make_density(ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0])).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_eigenvalue_is_rejected_with_its_value() {
        // trace of diag(0.6, 0.6, -0.2) is exactly 1, so positivity is the only violation
        let err = make_density(ComplexMatrix::from_real_diagonal(&[0.6, 0.6, -0.2])).unwrap_err();
        let Error::InvalidState { violations } = err else {
            panic!("unexpected error {err:?}");
        };
        assert_eq!(violations.len(), 1);
        assert!(matches!(violations[0], StateViolation::NotPositive(e) if (e + 0.2).abs() < 1e-12));
    }

    #[test]
    fn reports_every_violation_at_once() {
        let err = make_density(ComplexMatrix::from_real_diagonal(&[0.7, 0.6, -0.2])).unwrap_err();
        let Error::InvalidState { violations } = err else {
            panic!("unexpected error {err:?}");
        };
        assert_eq!(violations.len(), 2);
        assert!(
            matches!(violations[0], StateViolation::NotUnitTrace(d) if (d - 0.1).abs() < 1e-12)
        );
        assert!(matches!(violations[1], StateViolation::NotPositive(e) if (e + 0.2).abs() < 1e-12));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.5), c(0.3)], vec![c(0.0), c(0.5)]]).unwrap();
        let err = make_density(m).unwrap_err();
        assert!(matches!(err, Error::InvalidState { ref violations }
            if matches!(violations[0], StateViolation::NotHermitian(d) if (d - 0.3 * 2f64.sqrt()).abs() < 1e-12)));
    }

    #[test]
    fn pure_basis_state() {
        let rho = pure_state(&[c(1.0), c(0.0), c(0.0)], false).unwrap();
        assert_eq!(
            rho.matrix(),
            &ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn uniform_superposition_has_all_entries_one_third() {
        let s = 1.0 / 3f64.sqrt();
        let rho = pure_state(&[c(s), c(s), c(s)], false).unwrap();
        for z in rho.matrix().iter() {
            assert!((z - c(1.0 / 3.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_vector_needs_flag() {
        let err = pure_state(&[c(1.0), c(1.0)], false).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { norm } if (norm - 2f64.sqrt()).abs() < 1e-15));
        let rho = pure_state(&[c(1.0), c(1.0)], true).unwrap();
        assert!((rho.matrix()[(0, 1)] - c(0.5)).norm() < 1e-15);
    }
}
