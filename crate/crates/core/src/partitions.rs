//! Tensor-product and tensor-sum partitions of a Hilbert space.
//!
//! Product sectors use a row-major index convention with the first sector
//! varying slowest: for two sectors the global index of `|a>|b>` is
//! `a * dim_B + b`. Partitions with more than two sectors are handled by
//! grouping them into a bipartite split (see [`ProductPartition::group`]).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::matrix::{frobenius, span_projector, ComplexMatrix, C64};
use crate::hilbert::operator::check_orthonormal_columns;
use crate::hilbert::{Projector, DEFAULT_TOLERANCES};

/// Index of a product sector. `Sector::A` and `Sector::B` name the two
/// halves of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector(pub usize);

impl Sector {
    pub const A: Sector = Sector(0);
    pub const B: Sector = Sector(1);
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            0 => f.write_str("A"),
            1 => f.write_str("B"),
            n => write!(f, "#{n}"),
        }
    }
}

/// `H_S = J_0 (x) J_1 (x) ...`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductPartition {
    sector_dims: Vec<usize>,
    total_dim: usize,
}

impl ProductPartition {
    pub fn new(sector_dims: &[usize]) -> Result<Self> {
        if sector_dims.is_empty() {
            return Err(Error::EmptyPartition);
        }
        if sector_dims.contains(&0) {
            return Err(Error::ZeroSectorDim);
        }
        Ok(Self {
            sector_dims: sector_dims.to_vec(),
            total_dim: sector_dims.iter().product(),
        })
    }

    pub fn bipartite(dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(&[dim_a, dim_b])
    }

    pub fn sector_dims(&self) -> &[usize] {
        &self.sector_dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn sector_count(&self) -> usize {
        self.sector_dims.len()
    }

    /// A single sector, or any one-dimensional sector.
    pub fn is_trivial(&self) -> bool {
        self.sector_dims.len() < 2 || self.sector_dims.contains(&1)
    }

    pub fn sector_dim(&self, sector: Sector) -> Result<usize> {
        self.sector_dims
            .get(sector.0)
            .copied()
            .ok_or(Error::SectorOutOfRange {
                sector: sector.0,
                count: self.sector_dims.len(),
            })
    }

    /// Bipartite view: sectors `[0, split)` become A, `[split, n)` become B.
    pub fn group(&self, split: usize) -> Result<ProductPartition> {
        if split == 0 || split >= self.sector_dims.len() {
            return Err(Error::SectorOutOfRange {
                sector: split,
                count: self.sector_dims.len(),
            });
        }
        let a = self.sector_dims[..split].iter().product();
        let b = self.sector_dims[split..].iter().product();
        Self::bipartite(a, b)
    }

    /// Dimensions of the first sector and of everything after it.
    pub(crate) fn ab_dims(&self) -> Result<(usize, usize)> {
        if self.sector_dims.len() < 2 {
            return Err(Error::SectorOutOfRange {
                sector: 1,
                count: self.sector_dims.len(),
            });
        }
        Ok((self.sector_dims[0], self.sector_dims[1..].iter().product()))
    }

    pub fn index_map(&self) -> SectorIndexMap {
        SectorIndexMap::new(&self.sector_dims)
    }
}

pub fn make_product_partition(sector_dims: &[usize]) -> Result<ProductPartition> {
    ProductPartition::new(sector_dims)
}

/// Bijection between per-sector index tuples and global basis indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorIndexMap {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl SectorIndexMap {
    fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Self {
            dims: dims.to_vec(),
            strides,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_global(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                got: tuple.len(),
            });
        }
        let mut g = 0;
        for ((&t, &d), &s) in tuple.iter().zip(&self.dims).zip(&self.strides) {
            if t >= d {
                return Err(Error::IndexOutOfRange { index: t, dim: d });
            }
            g += t * s;
        }
        Ok(g)
    }

    pub fn to_tuple(&self, global: usize) -> Result<Vec<usize>> {
        if global >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: global,
                dim: self.len(),
            });
        }
        Ok(self
            .dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (global / s) % d)
            .collect())
    }
}

/// One sector `K_j` of a tensor-sum partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SumBlock {
    label: usize,
    basis: ComplexMatrix,
    indices: Option<Vec<usize>>,
}

impl SumBlock {
    pub fn label(&self) -> usize {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Orthonormal basis of the block as columns.
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Global basis indices spanning the block, present only when every
    /// basis column is a standard basis vector (up to phase).
    pub fn indices(&self) -> Option<&[usize]> {
        self.indices.as_deref()
    }

    pub fn projector(&self) -> Projector {
        Projector::from_trusted(self.projector_matrix(), self.dim())
    }

    pub(crate) fn projector_matrix(&self) -> DMatrix<C64> {
        span_projector(self.basis.as_dmatrix())
    }
}

/// `H_S = K_0 (+) K_1 (+) ...` with mutually orthogonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SumPartition {
    total_dim: usize,
    blocks: Vec<SumBlock>,
}

impl SumPartition {
    /// Validates blocks given as basis-column matrices; labels follow the
    /// order of `blocks`.
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let tol = DEFAULT_TOLERANCES.resolution;
        let total_dim = blocks.first().ok_or(Error::EmptyPartition)?.rows();
        for b in &blocks {
            if b.rows() != total_dim {
                return Err(Error::DimensionMismatch {
                    expected: total_dim,
                    got: b.rows(),
                });
            }
        }
        for (j, b) in blocks.iter().enumerate() {
            check_orthonormal_columns(b, tol).map_err(|e| match e {
                Error::NotOrthogonal { overlap, .. } => Error::NotOrthogonal {
                    what: format!("columns of block {j}"),
                    overlap,
                },
                e => e,
            })?;
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                let overlap =
                    frobenius(&(blocks[i].adjoint().as_dmatrix() * blocks[j].as_dmatrix()));
                if overlap > tol {
                    return Err(Error::NotOrthogonal {
                        what: format!("blocks {i} and {j}"),
                        overlap,
                    });
                }
            }
        }
        let sum: usize = blocks.iter().map(|b| b.cols()).sum();
        if sum != total_dim {
            return Err(Error::DimensionSumMismatch {
                sum,
                total: total_dim,
            });
        }
        Ok(Self::from_trusted_blocks(total_dim, blocks))
    }

    /// Axis-aligned partition from sets of global basis indices.
    pub fn from_index_sets(total_dim: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let blocks = sets
            .iter()
            .map(|set| {
                let mut m = DMatrix::zeros(total_dim, set.len());
                for (c, &i) in set.iter().enumerate() {
                    if i >= total_dim {
                        return Err(Error::IndexOutOfRange {
                            index: i,
                            dim: total_dim,
                        });
                    }
                    m[(i, c)] = C64::new(1.0, 0.0);
                }
                Ok(ComplexMatrix::wrap(m))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }

    /// One block per basis vector.
    pub fn singletons(total_dim: usize) -> Self {
        let sets: Vec<Vec<usize>> = (0..total_dim).map(|i| vec![i]).collect();
        Self::from_index_sets(total_dim, &sets).expect("singleton split is valid")
    }

    /// The whole space as one block.
    pub fn whole(total_dim: usize) -> Self {
        Self::from_index_sets(total_dim, &[(0..total_dim).collect()])
            .expect("single block is valid")
    }

    fn from_trusted_blocks(total_dim: usize, blocks: Vec<ComplexMatrix>) -> Self {
        let blocks = blocks
            .into_iter()
            .enumerate()
            .map(|(label, basis)| {
                let indices = axis_indices(&basis);
                SumBlock {
                    label,
                    basis,
                    indices,
                }
            })
            .collect();
        Self { total_dim, blocks }
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn blocks(&self) -> &[SumBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(SumBlock::dim).collect()
    }
}

pub fn make_sum_partition(blocks: Vec<ComplexMatrix>) -> Result<SumPartition> {
    SumPartition::new(blocks)
}

fn axis_indices(basis: &ComplexMatrix) -> Option<Vec<usize>> {
    const EPS: f64 = 1e-12;
    let mut out = Vec::with_capacity(basis.cols());
    for c in 0..basis.cols() {
        let mut hit = None;
        for r in 0..basis.rows() {
            let z = basis[(r, c)].norm();
            if z > EPS {
                if hit.is_some() || (z - 1.0).abs() > EPS {
                    return None;
                }
                hit = Some(r);
            }
        }
        out.push(hit?);
    }
    out.sort_unstable();
    Some(out)
}

/// Lifts a split `H_B = (+)_j B_j` to `H_S = (+)_j H_A (x) B_j`.
///
/// Sector 0 of `pp` is A; any further sectors are grouped into B.
pub fn induced_sum_partition(
    pp: &ProductPartition,
    b_blocks: &SumPartition,
) -> Result<SumPartition> {
    let (dim_a, dim_b) = pp.ab_dims()?;
    if b_blocks.total_dim() != dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_b,
            got: b_blocks.total_dim(),
        });
    }
    let total = dim_a * dim_b;
    let blocks = b_blocks
        .blocks()
        .iter()
        .map(|blk| {
            let bb = blk.basis();
            let k = bb.cols();
            let mut m = DMatrix::zeros(total, dim_a * k);
            for a in 0..dim_a {
                for v in 0..k {
                    let col = a * k + v;
                    for b in 0..dim_b {
                        m[(a * dim_b + b, col)] = bb[(b, v)];
                    }
                }
            }
            let indices = blk.indices().map(|delta| {
                let mut idx: Vec<usize> = (0..dim_a)
                    .flat_map(|a| delta.iter().map(move |&b| a * dim_b + b))
                    .collect();
                idx.sort_unstable();
                idx
            });
            SumBlock {
                label: blk.label(),
                basis: ComplexMatrix::wrap(m),
                indices,
            }
        })
        .collect();
    Ok(SumPartition {
        total_dim: total,
        blocks,
    })
}

/// All `(d_A, d_B)` with `d_A * d_B = dim` and `2 <= d_A <= d_B`; empty
/// exactly when `dim` is prime.
pub fn factorizations(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut a = 2;
    while a * a <= dim {
        if dim.is_multiple_of(a) {
            out.push((a, dim / a));
        }
        a += 1;
    }
    out
}

/// `op (x) I_B`, with `op` acting on sector A.
pub fn embed_local(op: &ComplexMatrix, pp: &ProductPartition) -> Result<ComplexMatrix> {
    embed_on_sector(op, pp, Sector::A)
}

/// `I (x) ... (x) op (x) ... (x) I` with `op` in the slot of `sector`.
pub fn embed_on_sector(
    op: &ComplexMatrix,
    pp: &ProductPartition,
    sector: Sector,
) -> Result<ComplexMatrix> {
    let d = pp.sector_dim(sector)?;
    if !op.is_square() || op.rows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: op.rows(),
        });
    }
    let before: usize = pp.sector_dims()[..sector.0].iter().product();
    let after: usize = pp.sector_dims()[sector.0 + 1..].iter().product();
    let m = DMatrix::<C64>::identity(before, before)
        .kronecker(op.as_dmatrix())
        .kronecker(&DMatrix::<C64>::identity(after, after));
    Ok(ComplexMatrix::wrap(m))
}
