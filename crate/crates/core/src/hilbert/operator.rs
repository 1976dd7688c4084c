use nalgebra::DMatrix;

use super::matrix::{frobenius, outer, span_projector, unitarity_deviation, ComplexMatrix, C64};
use super::tolerance::{Tolerances, DEFAULT_TOLERANCES};
use crate::error::{Error, Result};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending with
/// eigenvectors as matching columns.
pub(crate) fn hermitian_eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `f(A)` for Hermitian `A`, applied through the spectrum.
pub(crate) fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigh(m);
    let n = values.len();
    let diag = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(f(values[r]), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &vectors * diag * vectors.adjoint()
}

/// An orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &DEFAULT_TOLERANCES)
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let herm = matrix.hermiticity_deviation();
        if herm > tol.hermitian {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let m = matrix.as_dmatrix();
        let idem = frobenius(&(m * m - m));
        if idem > tol.idempotent {
            return Err(Error::NotProjector { deviation: idem });
        }
        let tr = matrix.trace().re;
        let rank = tr.round().max(0.0) as usize;
        if (tr - rank as f64).abs() > tol.trace {
            return Err(Error::NotProjector {
                deviation: (tr - rank as f64).abs(),
            });
        }
        Ok(Self { matrix, rank })
    }

    /// `V V^+` for a matrix `V` with orthonormal columns.
    pub fn from_orthonormal_columns(columns: &ComplexMatrix) -> Result<Self> {
        check_orthonormal_columns(columns, DEFAULT_TOLERANCES.resolution)?;
        Ok(Self {
            matrix: ComplexMatrix::wrap(span_projector(columns.as_dmatrix())),
            rank: columns.cols(),
        })
    }

    /// Projector onto the span of the listed standard basis vectors.
    pub fn onto_basis_states(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, dim);
        for &i in indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Self::new(ComplexMatrix::wrap(m))
    }

    /// `|v><v| / <v|v>`.
    pub fn onto_vector(v: &[C64]) -> Result<Self> {
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if n2 == 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        let m = outer(v, v) / C64::new(n2, 0.0);
        Ok(Self {
            matrix: ComplexMatrix::from_dmatrix(m)?,
            rank: 1,
        })
    }

    pub(crate) fn from_trusted(matrix: DMatrix<C64>, rank: usize) -> Self {
        Self {
            matrix: ComplexMatrix::wrap(matrix),
            rank,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

pub(crate) fn check_orthonormal_columns(v: &ComplexMatrix, tol: f64) -> Result<()> {
    let gram = v.adjoint().as_dmatrix() * v.as_dmatrix();
    let k = v.cols();
    let dev = frobenius(&(gram - DMatrix::<C64>::identity(k, k)));
    if dev > tol {
        return Err(Error::NotOrthogonal {
            what: "basis columns".into(),
            overlap: dev,
        });
    }
    Ok(())
}

/// One eigenvalue of an observable with the projector onto its eigenspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// A Hermitian operator together with its clustered spectral decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    spectrum: Vec<SpectralComponent>,
}

impl Observable {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Components in ascending eigenvalue order.
    pub fn spectrum(&self) -> &[SpectralComponent] {
        &self.spectrum
    }

    pub fn projector_for(&self, eigenvalue: f64, tol: f64) -> Option<&Projector> {
        self.spectrum
            .iter()
            .find(|c| (c.eigenvalue - eigenvalue).abs() <= tol)
            .map(|c| &c.projector)
    }

    /// `||sum_k P_k - I||_F`.
    pub fn resolution_residual(&self) -> f64 {
        let n = self.dim();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for c in &self.spectrum {
            sum += c.projector.matrix().as_dmatrix();
        }
        frobenius(&(sum - DMatrix::<C64>::identity(n, n)))
    }

    /// Largest `||P_k P_l||_F` over distinct components.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.spectrum.iter().enumerate() {
            for b in &self.spectrum[i + 1..] {
                let prod = a.projector.matrix().as_dmatrix() * b.projector.matrix().as_dmatrix();
                worst = worst.max(frobenius(&prod));
            }
        }
        worst
    }
}

/// Spectral decomposition with eigenvalues closer than `cluster_tol` merged
/// into a single degenerate eigenvalue (reported as projector rank).
pub fn spectral_decompose(matrix: &ComplexMatrix, cluster_tol: f64) -> Result<Observable> {
    spectral_decompose_with(matrix, cluster_tol, &DEFAULT_TOLERANCES)
}

pub fn spectral_decompose_with(
    matrix: &ComplexMatrix,
    cluster_tol: f64,
    tol: &Tolerances,
) -> Result<Observable> {
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let herm = matrix.hermiticity_deviation();
    if herm > tol.hermitian {
        return Err(Error::NotHermitian { deviation: herm });
    }
    let (values, vectors) = hermitian_eigh(matrix.as_dmatrix());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..values.len() {
        match groups.last_mut() {
            Some(g) if values[i] - values[*g.last().unwrap()] < cluster_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let spectrum = groups
        .into_iter()
        .map(|g| {
            let eigenvalue = g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64;
            let cols = vectors.select_columns(g.iter());
            SpectralComponent {
                eigenvalue,
                projector: Projector::from_trusted(span_projector(&cols), g.len()),
            }
        })
        .collect();
    Ok(Observable {
        matrix: matrix.clone(),
        spectrum,
    })
}

/// A unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    matrix: ComplexMatrix,
}

impl Unitary {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &DEFAULT_TOLERANCES)
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let dev = unitarity_deviation(matrix.as_dmatrix());
        if dev > tol.unitary {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_trusted(matrix: DMatrix<C64>) -> Self {
        Self {
            matrix: ComplexMatrix::wrap(matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `||U^+U - I||_F`.
    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(self.matrix.as_dmatrix())
    }
}

/// Frobenius norm of `AB - BA`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.rows(),
        });
    }
    let (a, b) = (a.as_dmatrix(), b.as_dmatrix());
    Ok(frobenius(&(a * b - b * a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn degenerate_x_splits_into_rank_one_and_rank_two() {
        let x = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 2.0]);
        let obs = spectral_decompose(&x, 1e-8).unwrap();
        let s = obs.spectrum();
        assert_eq!(s.len(), 2);
        assert!((s[0].eigenvalue - 1.0).abs() < 1e-14);
        assert_eq!(s[0].projector.rank(), 1);
        assert!(
            frobenius(
                &(s[0].projector.matrix().as_dmatrix()
                    - ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]).as_dmatrix())
            ) < 1e-12
        );
        assert!((s[1].eigenvalue - 2.0).abs() < 1e-14);
        assert_eq!(s[1].projector.rank(), 2);
        assert!(
            frobenius(
                &(s[1].projector.matrix().as_dmatrix()
                    - ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0]).as_dmatrix())
            ) < 1e-12
        );
    }

    #[test]
    fn identity_has_single_full_rank_component() {
        let obs = spectral_decompose(&ComplexMatrix::identity(4), 1e-8).unwrap();
        assert_eq!(obs.spectrum().len(), 1);
        assert_eq!(obs.spectrum()[0].projector.rank(), 4);
        assert!((obs.spectrum()[0].eigenvalue - 1.0).abs() < 1e-14);
    }

    #[test]
    fn near_degenerate_eigenvalues_are_clustered() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 1.0 + 1e-10, 3.0]);
        let obs = spectral_decompose(&m, 1e-8).unwrap();
        let ranks: Vec<usize> = obs.spectrum().iter().map(|c| c.projector.rank()).collect();
        assert_eq!(ranks, vec![2, 1]);
        assert!(obs.resolution_residual() < 1e-12);
        assert!(obs.orthogonality_residual() < 1e-12);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0)]]).unwrap();
        assert!(matches!(
            spectral_decompose(&m, 1e-8),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn x_commutes_with_its_eigenspace_projectors() {
        let x = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 2.0]);
        let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0]);
        assert_eq!(commutator_norm(&x, &p1).unwrap(), 0.0);
        assert_eq!(commutator_norm(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn basis_and_plus_projectors_commutator() {
        // [|1><1|, |+><+|] with |+> = (|1> + |2>)/sqrt2; explicit matrix arithmetic gives
        // (1/2)(|1><2| - |2><1|), whose Frobenius norm is 1/sqrt2
        let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0]);
        let plus = Projector::onto_vector(&[c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), c(0.5)],
            vec![c(0.0), c(-0.5), c(0.0)],
        ])
        .unwrap();
        let comm = p1.as_dmatrix() * plus.matrix().as_dmatrix()
            - plus.matrix().as_dmatrix() * p1.as_dmatrix();
        assert!(frobenius(&(comm - expected.as_dmatrix())) < 1e-15);
        let n = commutator_norm(&p1, plus.matrix()).unwrap();
        assert!((n - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let r = commutator_norm(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projector_validation() {
        assert_eq!(Projector::onto_basis_states(3, &[1, 2]).unwrap().rank(), 2);
        let not_idem = ComplexMatrix::from_real_diagonal(&[0.5, 1.0]);
        assert!(matches!(
            Projector::new(not_idem),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn unitary_validation() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
            vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
        ])
        .unwrap();
        assert!(Unitary::new(h).is_ok());
        assert!(matches!(
            Unitary::new(ComplexMatrix::from_real_diagonal(&[1.0, 2.0])),
            Err(Error::NotUnitary { .. })
        ));
    }
}
