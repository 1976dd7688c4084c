use std::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: C64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix with finite entries.
///
/// Dereferences to the underlying [`DMatrix`] so the usual nalgebra
/// arithmetic is available; constructors reject NaN and infinite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::ShapeMismatch {
                    rows: rows.len(),
                    cols: ncols,
                    expected: rows.len() * ncols,
                    got: rows.iter().map(Vec::len).sum(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), ncols, entries)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let nrows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(Error::ShapeMismatch {
                rows: nrows,
                cols: columns.len(),
                expected: nrows * columns.len(),
                got: columns.iter().map(Vec::len).sum(),
            });
        }
        Self::from_dmatrix(DMatrix::from_fn(nrows, columns.len(), |r, c| columns[c][r]))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let z = m[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps the result of arithmetic on already validated matrices.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(diag[r], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// The `n x 1` column holding `v`.
    pub fn column_vector(v: &[C64]) -> Result<Self> {
        Self::from_row_major(v.len(), 1, v.to_vec())
    }

    /// Standard basis vector `|index>` in dimension `dim`, as a column.
    pub fn basis_vector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut m = DMatrix::zeros(dim, 1);
        m[(index, 0)] = ONE;
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: other.rows(),
            });
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    /// `||A - A^+||_F`, zero for Hermitian matrices.
    pub fn hermiticity_deviation(&self) -> f64 {
        frobenius(&(&self.0 - self.0.adjoint()))
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        self.0.column(c).iter().copied().collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols()).map(|c| self.column(c)).collect()
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<C64>;

    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl From<ComplexMatrix> for DMatrix<C64> {
    fn from(m: ComplexMatrix) -> Self {
        m.0
    }
}

pub(crate) fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn trace_of(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `||A^+A - I||_F`.
pub(crate) fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.ncols();
    frobenius(&(m.adjoint() * m - DMatrix::<C64>::identity(n, n)))
}

pub(crate) fn outer(u: &[C64], v: &[C64]) -> DMatrix<C64> {
    DMatrix::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
}

/// Projector `V V^+` onto the span of the (orthonormal) columns of `v`.
pub(crate) fn span_projector(v: &DMatrix<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

pub(crate) fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_entries() {
        let err =
            ComplexMatrix::from_row_major(1, 2, vec![ONE, C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn rejects_wrong_entry_count() {
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, vec![ONE; 3]),
            Err(Error::ShapeMismatch {
                expected: 4,
                got: 3,
                ..
            })
        ));
    }

    #[test]
    fn row_major_layout_round_trips() {
        let entries: Vec<C64> = (0..6).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let m = ComplexMatrix::from_row_major(2, 3, entries.clone()).unwrap();
        assert_eq!(m[(0, 2)], entries[2]);
        assert_eq!(m[(1, 0)], entries[3]);
        assert_eq!(m.row_major_entries(), entries);
    }

    #[test]
    fn kron_places_first_factor_slowest() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diagonal(&[1.0, 10.0, 100.0]);
        let k = a.kron(&b);
        let diag: Vec<f64> = (0..6).map(|i| k[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 10.0, 100.0, 2.0, 20.0, 200.0]);
    }
}
