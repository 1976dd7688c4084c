//! Local operations on product sectors, joint outcome tables, Bob's
//! marginals and the no-signaling check.
//!
//! A local operation is a trace-preserving instrument: a Kraus operator per
//! outcome, `sum_a M_a^+ M_a = I`. Unitaries, projective measurements and
//! POVMs are all special cases. Bob's marginals are always taken from the
//! non-selective state, i.e. summed over Alice's outcomes.

mod channel;
mod instrument;
pub mod random;
mod search;

pub use channel::{apply_channel, Channel};
pub use instrument::{InstrumentMode, LocalInstrument};
pub use search::{
    adversarial_signal_search, adversarial_signal_search_with, SearchConfig, SearchOutcome,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gleason::{labels, measure_under_context, Distribution};
use crate::hilbert::matrix::{ComplexMatrix, C64};
use crate::hilbert::{DensityMatrix, DEFAULT_TOLERANCES};
use crate::partitions::{
    embed_on_sector, induced_sum_partition, ProductPartition, Sector, SumPartition,
};

/// `P(A = a, B = k)` with rows indexed by Alice's outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub probabilities: Vec<Vec<f64>>,
}

impl JointTable {
    fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        mut probabilities: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let tol = DEFAULT_TOLERANCES.probability;
        for row in probabilities.iter_mut() {
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -tol {
                    return Err(Error::InvalidProbability { value: *v });
                }
                *v = v.max(0.0);
            }
        }
        let t = Self {
            row_labels,
            col_labels,
            probabilities,
        };
        let sum = t.total();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalizedDistribution { sum });
        }
        Ok(t)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().flatten().sum()
    }

    /// Marginal over Bob's outcomes: Alice's distribution.
    pub fn row_sums(&self) -> Vec<f64> {
        self.probabilities.iter().map(|r| r.iter().sum()).collect()
    }

    /// Marginal over Alice's outcomes: Bob's distribution.
    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.col_labels.len();
        let mut out = vec![0.0; n];
        for row in &self.probabilities {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }
}

/// Reduced state on `keep`, tracing out every other sector.
pub fn partial_trace(
    rho: &DensityMatrix,
    pp: &ProductPartition,
    keep: Sector,
) -> Result<DensityMatrix> {
    if rho.dim() != pp.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: pp.total_dim(),
            got: rho.dim(),
        });
    }
    let dk = pp.sector_dim(keep)?;
    let stride: usize = pp.sector_dims()[keep.0 + 1..].iter().product();
    let m = rho.dmatrix();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for g in 0..pp.total_dim() {
        let i = (g / stride) % dk;
        let base = g - i * stride;
        for j in 0..dk {
            out[(i, j)] += m[(g, base + j * stride)];
        }
    }
    DensityMatrix::new(ComplexMatrix::wrap(out))
}

/// Raw `P(a, k) = Tr[(M_a (x) N_k) rho (M_a (x) N_k)^+]`, unvalidated.
pub(crate) fn joint_raw(
    rho: &DMatrix<C64>,
    pp: &ProductPartition,
    a: (&[ComplexMatrix], Sector),
    b: (&[ComplexMatrix], Sector),
) -> Result<Vec<Vec<f64>>> {
    let embed = |ops: &[ComplexMatrix], s: Sector| -> Result<Vec<DMatrix<C64>>> {
        ops.iter()
            .map(|m| embed_on_sector(m, pp, s).map(ComplexMatrix::into_dmatrix))
            .collect()
    };
    let ea = embed(a.0, a.1)?;
    let eb = embed(b.0, b.1)?;
    // rho_a = M_a rho M_a^+ once per Alice outcome, then Bob's elements
    let mut table = Vec::with_capacity(ea.len());
    for ma in &ea {
        let rho_a = ma * rho * ma.adjoint();
        let row = eb
            .iter()
            .map(|nk| {
                let mut acc = 0.0;
                // Tr(N rho_a N^+) = sum_{r} (N rho_a N^+)_{rr}
                let t = nk * &rho_a;
                for r in 0..t.nrows() {
                    for s in 0..t.ncols() {
                        acc += (t[(r, s)] * nk[(r, s)].conj()).re;
                    }
                }
                acc
            })
            .collect();
        table.push(row);
    }
    Ok(table)
}

fn check_state_dim(rho: &DensityMatrix, pp: &ProductPartition) -> Result<()> {
    if rho.dim() != pp.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: pp.total_dim(),
            got: rho.dim(),
        });
    }
    Ok(())
}

/// Joint outcome table of two instruments on distinct sectors.
pub fn joint_distribution(
    rho: &DensityMatrix,
    instr_a: &LocalInstrument,
    instr_b: &LocalInstrument,
    pp: &ProductPartition,
) -> Result<JointTable> {
    if instr_a.sector() == instr_b.sector() {
        return Err(Error::SameSector {
            sector: instr_a.sector().0,
        });
    }
    check_state_dim(rho, pp)?;
    let raw = joint_raw(
        rho.dmatrix(),
        pp,
        (instr_a.elements(), instr_a.sector()),
        (instr_b.elements(), instr_b.sector()),
    )?;
    JointTable::new(instr_a.labels().to_vec(), instr_b.labels().to_vec(), raw)
}

/// The finest projective measurement on B refining `sp_b`: one rank-one
/// projector per basis column, in block order.
pub fn finest_b_instrument(sp_b: &SumPartition) -> LocalInstrument {
    let mut elements = Vec::with_capacity(sp_b.total_dim());
    let mut names = Vec::with_capacity(sp_b.total_dim());
    for blk in sp_b.blocks() {
        for v in 0..blk.dim() {
            let col = blk.basis().column(v);
            elements.push(ComplexMatrix::wrap(crate::hilbert::matrix::outer(
                &col, &col,
            )));
            names.push(format!("j{}k{}", blk.label(), v));
        }
    }
    LocalInstrument::from_trusted(
        Sector::B,
        names,
        elements,
        InstrumentMode::Projective,
        "finest B".into(),
    )
}

/// Bob's block probabilities from Alice's raw elements; no normalization checks.
pub(crate) fn bob_marginal_raw(
    rho: &DMatrix<C64>,
    elements_a: &[ComplexMatrix],
    sp_b: &SumPartition,
    pp: &ProductPartition,
) -> Result<Vec<f64>> {
    let finest = finest_b_instrument(sp_b);
    let table = joint_raw(
        rho,
        pp,
        (elements_a, Sector::A),
        (finest.elements(), Sector::B),
    )?;
    let mut out = vec![0.0; sp_b.len()];
    for row in &table {
        let mut k = 0;
        for (j, blk) in sp_b.blocks().iter().enumerate() {
            for _ in 0..blk.dim() {
                out[j] += row[k];
                k += 1;
            }
        }
    }
    Ok(out)
}

fn bipartite_view(pp: &ProductPartition) -> Result<ProductPartition> {
    match pp.sector_count() {
        2 => Ok(pp.clone()),
        n if n > 2 => pp.group(1),
        _ => Err(Error::SectorOutOfRange {
            sector: 1,
            count: 1,
        }),
    }
}

fn require_sector_a(instr: &LocalInstrument) -> Result<()> {
    if instr.sector() != Sector::A {
        return Err(Error::WrongSector {
            expected: 0,
            got: instr.sector().0,
        });
    }
    Ok(())
}

/// `Prob_B(j | E) = sum_a sum_{k in block j} P(a, k)`.
///
/// Sector 0 of `pp` is Alice; further sectors are grouped into Bob.
pub fn bob_marginal(
    rho: &DensityMatrix,
    instr_a: &LocalInstrument,
    sp_b: &SumPartition,
    pp: &ProductPartition,
) -> Result<Distribution> {
    require_sector_a(instr_a)?;
    let pp = bipartite_view(pp)?;
    check_state_dim(rho, &pp)?;
    let dim_b = pp.sector_dim(Sector::B)?;
    if sp_b.total_dim() != dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_b,
            got: sp_b.total_dim(),
        });
    }
    let finest = finest_b_instrument(sp_b);
    let table = joint_distribution(rho, instr_a, &finest, &pp)?;
    let cols = table.col_sums();
    let mut probs = vec![0.0; sp_b.len()];
    let mut k = 0;
    for (j, blk) in sp_b.blocks().iter().enumerate() {
        for _ in 0..blk.dim() {
            probs[j] += cols[k];
            k += 1;
        }
    }
    Distribution::new(
        labels("j", probs.len()),
        probs,
        DEFAULT_TOLERANCES.probability,
    )
}

/// One block's entry in a [`SignalReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDeviation {
    pub label: String,
    pub first: f64,
    pub second: f64,
    pub deviation: f64,
    /// The same block's subspace measure under each context, computed
    /// independently through the induced tensor-sum partition.
    pub linked_measures: Option<(f64, f64)>,
}

/// Comparison of outcome probabilities under two contexts. `pass` means
/// no signaling was detected at `tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalReport {
    pub contexts: [String; 2],
    pub blocks: Vec<BlockDeviation>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

impl SignalReport {
    pub fn new(contexts: [String; 2], blocks: Vec<BlockDeviation>, tol: f64) -> Self {
        let max_deviation = blocks.iter().map(|b| b.deviation).fold(0.0, f64::max);
        Self {
            contexts,
            blocks,
            max_deviation,
            tol,
            pass: max_deviation <= tol,
        }
    }
}

/// Compares Bob's block marginals under two instruments on Alice's side.
///
/// Each deviation is cross-linked to the pair of measures
/// `mu(H_A (x) B_j | E)` and `mu(H_A (x) B_j | E')`, so a signaling finding
/// is reported together with the subspace measure it would make contextual.
pub fn check_nosignaling(
    rho: &DensityMatrix,
    instr: &LocalInstrument,
    instr_alt: &LocalInstrument,
    sp_b: &SumPartition,
    pp: &ProductPartition,
    tol: f64,
) -> Result<SignalReport> {
    require_sector_a(instr)?;
    require_sector_a(instr_alt)?;
    let pp = bipartite_view(pp)?;
    let p1 = bob_marginal(rho, instr, sp_b, &pp)?;
    let p2 = bob_marginal(rho, instr_alt, sp_b, &pp)?;
    let induced = induced_sum_partition(&pp, sp_b)?;
    let q1 = measure_under_context(rho, &induced, &instr.embed(&pp)?)?;
    let q2 = measure_under_context(rho, &induced, &instr_alt.embed(&pp)?)?;
    let blocks = (0..sp_b.len())
        .map(|j| {
            let (a, b) = (p1.probabilities()[j], p2.probabilities()[j]);
            BlockDeviation {
                label: format!("j{j}"),
                first: a,
                second: b,
                deviation: (a - b).abs(),
                linked_measures: Some((q1.probabilities()[j], q2.probabilities()[j])),
            }
        })
        .collect();
    Ok(SignalReport::new(
        [instr.name().to_string(), instr_alt.name().to_string()],
        blocks,
        tol,
    ))
}
