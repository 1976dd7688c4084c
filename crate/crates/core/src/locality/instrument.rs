use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Channel;
use crate::error::{Error, Result};
use crate::hilbert::matrix::{frobenius, outer, ComplexMatrix, C64};
use crate::hilbert::operator::check_orthonormal_columns;
use crate::hilbert::{Projector, DEFAULT_TOLERANCES};
use crate::partitions::{embed_on_sector, ProductPartition, Sector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentMode {
    /// Elements are mutually orthogonal projectors.
    Projective,
    /// Elements are general Kraus operators.
    Kraus,
}

/// Outcome-labelled measurement on a single product sector.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalInstrument {
    sector: Sector,
    labels: Vec<String>,
    elements: Vec<ComplexMatrix>,
    mode: InstrumentMode,
    name: String,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl LocalInstrument {
    /// Projective measurement from mutually orthogonal projectors summing to
    /// the identity.
    pub fn projective(sector: Sector, projectors: Vec<Projector>) -> Result<Self> {
        let tol = DEFAULT_TOLERANCES.resolution;
        let dim = projectors.first().ok_or(Error::EmptyInstrument)?.dim();
        if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        for i in 0..projectors.len() {
            for j in i + 1..projectors.len() {
                let overlap = frobenius(
                    &(projectors[i].matrix().as_dmatrix() * projectors[j].matrix().as_dmatrix()),
                );
                if overlap > tol {
                    return Err(Error::NotOrthogonal {
                        what: format!("projectors {i} and {j}"),
                        overlap,
                    });
                }
            }
        }
        let n = projectors.len();
        let elements: Vec<ComplexMatrix> =
            projectors.into_iter().map(|p| p.matrix().clone()).collect();
        let instr = Self::from_trusted(
            sector,
            default_labels(n),
            elements,
            InstrumentMode::Projective,
            format!("projective({n})"),
        );
        instr.check_trace_preserving()?;
        Ok(instr)
    }

    /// Instrument with one Kraus operator per outcome.
    pub fn kraus(sector: Sector, ops: Vec<ComplexMatrix>) -> Result<Self> {
        let instr = Self::kraus_unchecked(sector, ops)?;
        instr.check_trace_preserving()?;
        Ok(instr)
    }

    /// Like [`LocalInstrument::kraus`] but without the trace-preservation
    /// check. Only meant for planting deliberate violations in tests.
    pub fn kraus_unchecked(sector: Sector, ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = ops.first().ok_or(Error::EmptyInstrument)?.rows();
        if let Some(m) = ops.iter().find(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.rows(),
            });
        }
        let n = ops.len();
        Ok(Self::from_trusted(
            sector,
            default_labels(n),
            ops,
            InstrumentMode::Kraus,
            format!("kraus({n})"),
        ))
    }

    /// Rank-one projective measurement in the basis given by the columns.
    pub fn from_basis(sector: Sector, basis: &ComplexMatrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::NotSquare {
                rows: basis.rows(),
                cols: basis.cols(),
            });
        }
        check_orthonormal_columns(basis, DEFAULT_TOLERANCES.resolution)?;
        let elements = (0..basis.cols())
            .map(|c| {
                let v = basis.column(c);
                ComplexMatrix::wrap(outer(&v, &v))
            })
            .collect::<Vec<_>>();
        let n = elements.len();
        Ok(Self::from_trusted(
            sector,
            default_labels(n),
            elements,
            InstrumentMode::Projective,
            format!("basis({n})"),
        ))
    }

    /// A single outcome whose element is the identity: no action.
    pub fn trivial(sector: Sector, dim: usize) -> Self {
        Self::from_trusted(
            sector,
            vec!["0".into()],
            vec![ComplexMatrix::identity(dim)],
            InstrumentMode::Projective,
            "trivial".into(),
        )
    }

    pub(crate) fn from_trusted(
        sector: Sector,
        labels: Vec<String>,
        elements: Vec<ComplexMatrix>,
        mode: InstrumentMode,
        name: String,
    ) -> Self {
        Self {
            sector,
            labels,
            elements,
            mode,
            name,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.elements.len() {
            return Err(Error::DimensionMismatch {
                expected: self.elements.len(),
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn mode(&self) -> InstrumentMode {
        self.mode
    }

    pub fn is_projective(&self) -> bool {
        self.mode == InstrumentMode::Projective
    }

    pub fn outcome_count(&self) -> usize {
        self.elements.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `||sum_a M_a^+ M_a - I||_F`.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let d = self.dim();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for m in &self.elements {
            sum += m.adjoint().as_dmatrix() * m.as_dmatrix();
        }
        frobenius(&(sum - DMatrix::<C64>::identity(d, d)))
    }

    fn check_trace_preserving(&self) -> Result<()> {
        let dev = self.trace_preservation_deviation();
        if dev > DEFAULT_TOLERANCES.resolution {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(())
    }

    /// The non-selective channel `{M_a (x) I}` on the full space.
    pub fn embed(&self, pp: &ProductPartition) -> Result<Channel> {
        let kraus = self
            .elements
            .iter()
            .map(|m| embed_on_sector(m, pp, self.sector))
            .collect::<Result<Vec<_>>>()?;
        Channel::unchecked(kraus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_requires_orthogonality() {
        let p0 = Projector::onto_basis_states(2, &[0]).unwrap();
        let p01 = Projector::onto_basis_states(2, &[0, 1]).unwrap();
        assert!(matches!(
            LocalInstrument::projective(Sector::A, vec![p0, p01]),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn projective_requires_completeness() {
        let p0 = Projector::onto_basis_states(3, &[0]).unwrap();
        let p1 = Projector::onto_basis_states(3, &[1]).unwrap();
        assert!(matches!(
            LocalInstrument::projective(Sector::A, vec![p0, p1]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn kraus_checks_trace_preservation() {
        let half = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(LocalInstrument::kraus(Sector::A, vec![half.clone()]).is_err());
        let ok = LocalInstrument::kraus(
            Sector::A,
            vec![half.clone(), half.clone(), half.clone(), half.clone()],
        )
        .unwrap();
        assert_eq!(ok.outcome_count(), 4);
        assert!(LocalInstrument::kraus_unchecked(Sector::A, vec![half]).is_ok());
    }

    #[test]
    fn embedding_places_elements_on_the_sector() {
        let pp = ProductPartition::bipartite(2, 3).unwrap();
        let e = LocalInstrument::from_basis(Sector::B, &ComplexMatrix::identity(3)).unwrap();
        let ch = e.embed(&pp).unwrap();
        assert_eq!(ch.dim(), 6);
        assert!(ch.trace_preservation_deviation() < 1e-15);
        // element 1 on B is |1><1|, so globals 1 and 4 carry it
        let k = &ch.kraus()[1];
        let diag: Vec<f64> = (0..6).map(|i| k[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    }
}
