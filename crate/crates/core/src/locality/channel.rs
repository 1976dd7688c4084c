use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::matrix::{frobenius, ComplexMatrix, C64};
use crate::hilbert::{DensityMatrix, Unitary, DEFAULT_TOLERANCES};

/// A trace-preserving quantum channel in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::unchecked(kraus)?;
        let dev = ch.trace_preservation_deviation();
        if dev > DEFAULT_TOLERANCES.resolution {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(ch)
    }

    /// Shape checks only.
    pub(crate) fn unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus.first().ok_or(Error::EmptyInstrument)?.rows();
        for k in &kraus {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.rows(),
                });
            }
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn unitary(u: &Unitary) -> Self {
        Self {
            dim: u.dim(),
            kraus: vec![u.matrix().clone()],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `||sum_k K_k^+ K_k - I||_F`.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let mut sum = DMatrix::<C64>::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum += k.adjoint().as_dmatrix() * k.as_dmatrix();
        }
        frobenius(&(sum - DMatrix::<C64>::identity(self.dim, self.dim)))
    }

    pub(crate) fn apply_raw(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for k in &self.kraus {
            let k = k.as_dmatrix();
            out += k * rho * k.adjoint();
        }
        out
    }
}

/// `sum_k K_k rho K_k^+`.
pub fn apply_channel(rho: &DensityMatrix, ch: &Channel) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: ch.dim(),
        });
    }
    let dev = ch.trace_preservation_deviation();
    if dev > DEFAULT_TOLERANCES.resolution {
        return Err(Error::NotTracePreserving { deviation: dev });
    }
    let out = ch.apply_raw(rho.dmatrix());
    DensityMatrix::new(ComplexMatrix::wrap(
        (&out + out.adjoint()) * C64::new(0.5, 0.0),
    ))
}
