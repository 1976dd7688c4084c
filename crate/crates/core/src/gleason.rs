//! Born-form subspace measures and the basis-independence (non-contextuality)
//! check.
//!
//! Every measure here is `Tr(P rho)`. Gleason's theorem forces that form in
//! dimension 3 and above; dimension 2 is computed the same way, the theorem
//! simply does not single it out there.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::matrix::{frobenius, span_projector, trace_product, ComplexMatrix, C64};
use crate::hilbert::operator::check_orthonormal_columns;
use crate::hilbert::{DensityMatrix, Projector, Tolerances, DEFAULT_TOLERANCES};
use crate::locality::Channel;
use crate::partitions::SumPartition;

/// Principal-angle threshold for deciding two bases span the same subspace.
pub const CONTEXT_SPAN_TOL: f64 = 1e-8;

/// Normalized (or explicitly sub-normalized) table of outcome probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    labels: Vec<String>,
    probabilities: Vec<f64>,
    complete: bool,
}

impl Distribution {
    /// A complete distribution: entries in `[0, 1]` and summing to 1, both
    /// up to `tol`. Entries within `tol` outside `[0, 1]` are clamped.
    pub fn new(labels: Vec<String>, probabilities: Vec<f64>, tol: f64) -> Result<Self> {
        let probabilities = clamp_probabilities(probabilities, tol)?;
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalizedDistribution { sum });
        }
        Ok(Self {
            labels,
            probabilities,
            complete: true,
        })
    }

    /// A conditional or partial table whose entries may sum to less than 1.
    pub fn sub_normalized(labels: Vec<String>, probabilities: Vec<f64>, tol: f64) -> Result<Self> {
        let probabilities = clamp_probabilities(probabilities, tol)?;
        let sum: f64 = probabilities.iter().sum();
        if sum > 1.0 + tol {
            return Err(Error::NotNormalizedDistribution { sum });
        }
        Ok(Self {
            labels,
            probabilities,
            complete: false,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn clamp_probabilities(mut p: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    for v in p.iter_mut() {
        if !v.is_finite() || *v < -tol || *v > 1.0 + tol {
            return Err(Error::InvalidProbability { value: *v });
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(p)
}

pub(crate) fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Measure of one subspace under several contexts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub subspace: String,
    pub values: Vec<(String, f64)>,
    pub max_pairwise_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

impl MeasureReport {
    pub(crate) fn from_values(subspace: String, values: Vec<(String, f64)>, tol: f64) -> Self {
        let max_pairwise_deviation = max_pairwise_deviation(&values);
        Self {
            subspace,
            values,
            max_pairwise_deviation,
            tol,
            pass: max_pairwise_deviation <= tol,
        }
    }
}

pub(crate) fn max_pairwise_deviation(values: &[(String, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for (i, (_, a)) in values.iter().enumerate() {
        for (_, b) in &values[i + 1..] {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// `Tr(P rho)`.
pub fn born_measure(rho: &DensityMatrix, p: &Projector) -> Result<f64> {
    born_measure_with(rho, p, &DEFAULT_TOLERANCES)
}

pub fn born_measure_with(rho: &DensityMatrix, p: &Projector, tol: &Tolerances) -> Result<f64> {
    if p.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: p.dim(),
        });
    }
    real_probability(trace_product(p.matrix().as_dmatrix(), rho.dmatrix()), tol)
}

fn real_probability(z: C64, tol: &Tolerances) -> Result<f64> {
    if z.im.abs() > tol.hermitian {
        return Err(Error::NonRealTrace { imag: z.im });
    }
    let v = z.re;
    if v < -tol.probability || v > 1.0 + tol.probability {
        return Err(Error::InvalidProbability { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// `<e_j| rho |e_j>` for each column `e_j` of `basis`.
///
/// The basis may span a proper subspace, in which case the result is
/// sub-normalized and sums to the measure of that subspace.
pub fn frame_distribution(rho: &DensityMatrix, basis: &ComplexMatrix) -> Result<Distribution> {
    let tol = DEFAULT_TOLERANCES;
    if basis.rows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: basis.rows(),
        });
    }
    check_orthonormal_columns(basis, tol.resolution)?;
    let rho_m = rho.dmatrix();
    let probs = (0..basis.cols())
        .map(|c| {
            let e = basis.column(c);
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..e.len() {
                for s in 0..e.len() {
                    acc += e[r].conj() * rho_m[(r, s)] * e[s];
                }
            }
            real_probability(acc, &tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let names = labels("e", basis.cols());
    if basis.cols() == rho.dim() {
        Distribution::new(names, probs, tol.probability)
    } else {
        Distribution::sub_normalized(names, probs, tol.probability)
    }
}

/// Largest sine of the principal angles between `span(subspace)` and
/// `span(context)`, both given by orthonormal columns of equal count.
pub(crate) fn max_principal_sine(subspace: &DMatrix<C64>, context: &DMatrix<C64>) -> f64 {
    let n = subspace.nrows();
    let resid = (DMatrix::<C64>::identity(n, n) - span_projector(subspace)) * context;
    resid
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Computes the measure of `span(subspace)` through each context (an
/// orthonormal basis of the same subspace) and compares them.
pub fn check_noncontextuality(
    rho: &DensityMatrix,
    subspace: &ComplexMatrix,
    contexts: &[ComplexMatrix],
    tol: f64,
) -> Result<MeasureReport> {
    if subspace.rows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: subspace.rows(),
        });
    }
    check_orthonormal_columns(subspace, DEFAULT_TOLERANCES.resolution)?;
    let mut values = Vec::with_capacity(contexts.len());
    for (i, ctx) in contexts.iter().enumerate() {
        if ctx.rows() != subspace.rows() {
            return Err(Error::DimensionMismatch {
                expected: subspace.rows(),
                got: ctx.rows(),
            });
        }
        if ctx.cols() != subspace.cols() {
            return Err(Error::ContextSpanMismatch {
                context: i,
                sin_angle: 1.0,
            });
        }
        let sin_angle = max_principal_sine(subspace.as_dmatrix(), ctx.as_dmatrix());
        if sin_angle > CONTEXT_SPAN_TOL {
            return Err(Error::ContextSpanMismatch {
                context: i,
                sin_angle,
            });
        }
        let frame = frame_distribution(rho, ctx)?;
        values.push((format!("context {i}"), frame.total()));
    }
    Ok(MeasureReport::from_values(
        format!("span of {} vectors", subspace.cols()),
        values,
        tol,
    ))
}

/// `q_j = Tr(P_j rho')` with `rho'` the state after the (non-selective)
/// channel, which must leave every block of `sp` invariant.
pub fn measure_under_context(
    rho: &DensityMatrix,
    sp: &SumPartition,
    channel: &Channel,
) -> Result<Distribution> {
    let tol = DEFAULT_TOLERANCES;
    if sp.total_dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sp.total_dim(),
        });
    }
    if channel.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: channel.dim(),
        });
    }
    let n = rho.dim();
    let projectors: Vec<DMatrix<C64>> = sp.blocks().iter().map(|b| b.projector_matrix()).collect();
    for (j, p) in projectors.iter().enumerate() {
        let complement = DMatrix::<C64>::identity(n, n) - p;
        for k in channel.kraus() {
            let leakage = frobenius(&(&complement * k.as_dmatrix() * p));
            if leakage > tol.resolution {
                return Err(Error::NotBlockInvariant { block: j, leakage });
            }
        }
    }
    let evolved = channel.apply_raw(rho.dmatrix());
    let probs = projectors
        .iter()
        .map(|p| real_probability(trace_product(p, &evolved), &tol))
        .collect::<Result<Vec<_>>>()?;
    Distribution::new(labels("K", probs.len()), probs, tol.probability)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{haar_random_unitary, pure_state, random_density};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn cols(v: &[Vec<C64>]) -> ComplexMatrix {
        ComplexMatrix::from_columns(v).unwrap()
    }

    #[test]
    fn eigenstate_has_measure_one() {
        let rho = pure_state(&[c(1.0), c(0.0), c(0.0)], false).unwrap();
        let p = Projector::onto_basis_states(3, &[0]).unwrap();
        assert_eq!(born_measure(&rho, &p).unwrap(), 1.0);
    }

    #[test]
    fn maximally_mixed_gives_one_over_d_for_any_rank_one() {
        let rho = DensityMatrix::maximally_mixed(3);
        for seed in 0..10 {
            let u = haar_random_unitary(3, seed);
            let p = Projector::onto_vector(&u.matrix().column(0)).unwrap();
            assert!((born_measure(&rho, &p).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn measure_of_b_eigenspace_is_sum_of_squared_amplitudes() {
        let beta = [C64::new(0.5, 0.1), C64::new(-0.3, 0.6), C64::new(0.2, -0.4)];
        let n = beta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let beta: Vec<C64> = beta.iter().map(|z| z / n).collect();
        let rho = pure_state(&beta, false).unwrap();
        let p = Projector::onto_basis_states(3, &[1, 2]).unwrap();
        let want = beta[1].norm_sqr() + beta[2].norm_sqr();
        assert!((born_measure(&rho, &p).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn born_measure_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(2);
        let p = Projector::onto_basis_states(3, &[0]).unwrap();
        assert!(matches!(
            born_measure(&rho, &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn frame_in_eigenbasis_returns_spectrum() {
        let rho = random_density(4, 4, 11).unwrap();
        let (vals, vecs) = crate::hilbert::operator::hermitian_eigh(rho.dmatrix());
        let d = frame_distribution(&rho, &ComplexMatrix::wrap(vecs)).unwrap();
        for (p, v) in d.probabilities().iter().zip(&vals) {
            assert!((p - v).abs() < 1e-12);
        }
        assert!(d.is_complete());
    }

    #[test]
    fn plus_state_in_computational_basis_is_fair() {
        let rho = pure_state(&[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], false).unwrap();
        let d = frame_distribution(&rho, &ComplexMatrix::identity(2)).unwrap();
        assert!((d.probabilities()[0] - 0.5).abs() < 1e-15);
        assert!((d.probabilities()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_frame_is_uniform() {
        let rho = DensityMatrix::maximally_mixed(5);
        let d = frame_distribution(&rho, haar_random_unitary(5, 3).matrix()).unwrap();
        assert!(d.probabilities().iter().all(|p| (p - 0.2).abs() < 1e-14));
    }

    #[test]
    fn non_orthonormal_frame_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        let b = cols(&[vec![c(1.0), c(0.0)], vec![c(1.0), c(1.0)]]);
        assert!(matches!(
            frame_distribution(&rho, &b),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn qutrit_b_subspace_two_contexts() {
        let rho = random_density(3, 2, 4).unwrap();
        let y1 = cols(&[vec![c(0.0), c(1.0), c(0.0)], vec![c(0.0), c(0.0), c(1.0)]]);
        let y2 = cols(&[
            vec![c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
            vec![c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
        ]);
        let r = check_noncontextuality(&rho, &y1, &[y1.clone(), y2], 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.values.len(), 2);
    }

    #[test]
    fn full_space_contexts_measure_one() {
        let rho = random_density(4, 3, 9).unwrap();
        let a = haar_random_unitary(4, 1).matrix().clone();
        let b = haar_random_unitary(4, 2).matrix().clone();
        let r = check_noncontextuality(&rho, &ComplexMatrix::identity(4), &[a, b], 1e-12).unwrap();
        assert!(r.pass);
        assert!(r.values.iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn context_spanning_other_subspace_is_an_input_error() {
        let rho = DensityMatrix::maximally_mixed(3);
        let y1 = cols(&[vec![c(0.0), c(1.0), c(0.0)], vec![c(0.0), c(0.0), c(1.0)]]);
        let wrong = cols(&[vec![c(1.0), c(0.0), c(0.0)], vec![c(0.0), c(1.0), c(0.0)]]);
        let err = check_noncontextuality(&rho, &y1, &[wrong], 1e-10).unwrap_err();
        assert!(matches!(err, Error::ContextSpanMismatch { context: 0, .. }));
    }

    #[test]
    fn report_deviation_is_recomputable() {
        let values = vec![
            ("a".to_string(), 0.3),
            ("b".to_string(), 0.5),
            ("c".to_string(), 0.45),
        ];
        let r = MeasureReport::from_values("s".into(), values, 0.1);
        assert!((r.max_pairwise_deviation - 0.2).abs() < 1e-15);
        assert!(!r.pass);
    }

    #[test]
    fn identity_channel_gives_plain_block_measures() {
        let rho = random_density(3, 3, 21).unwrap();
        let sp = SumPartition::from_index_sets(3, &[vec![0], vec![1, 2]]).unwrap();
        let q = measure_under_context(&rho, &sp, &Channel::identity(3)).unwrap();
        for (j, blk) in sp.blocks().iter().enumerate() {
            let want = born_measure(&rho, &blk.projector()).unwrap();
            assert!((q.probabilities()[j] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn block_diagonal_unitary_leaves_block_measures_unchanged() {
        // oracle: for U = 1 (+) V, Tr(P_j U rho U^+) = Tr(U^+ P_j U rho) = Tr(P_j rho)
        let rho = random_density(3, 2, 5).unwrap();
        let v = haar_random_unitary(2, 8);
        let mut u = DMatrix::<C64>::zeros(3, 3);
        u[(0, 0)] = C64::new(0.0, 1.0);
        u.view_mut((1, 1), (2, 2))
            .copy_from(v.matrix().as_dmatrix());
        let ch = Channel::new(vec![ComplexMatrix::wrap(u)]).unwrap();
        let sp = SumPartition::from_index_sets(3, &[vec![0], vec![1, 2]]).unwrap();
        let before = measure_under_context(&rho, &sp, &Channel::identity(3)).unwrap();
        let after = measure_under_context(&rho, &sp, &ch).unwrap();
        assert!(before.max_abs_diff(&after) < 1e-14);
    }

    #[test]
    fn mixing_unitary_is_not_block_invariant() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)],
            vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)],
            vec![c(0.0), c(0.0), c(1.0)],
        ])
        .unwrap();
        let sp = SumPartition::from_index_sets(3, &[vec![0], vec![1, 2]]).unwrap();
        let err = measure_under_context(
            &DensityMatrix::maximally_mixed(3),
            &sp,
            &Channel::new(vec![h]).unwrap(),
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::NotBlockInvariant { block: 0, leakage } if (leakage - FRAC_1_SQRT_2).abs() < 1e-12)
        );
    }

    #[test]
    fn distribution_clamps_noise_and_rejects_real_negatives() {
        let d = Distribution::new(labels("x", 2), vec![-1e-12, 1.0 + 1e-12], 1e-10).unwrap();
        assert_eq!(d.probabilities(), &[0.0, 1.0]);
        assert!(matches!(
            Distribution::new(labels("x", 2), vec![-0.1, 1.1], 1e-10),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(matches!(
            Distribution::new(labels("x", 2), vec![0.2, 0.3], 1e-10),
            Err(Error::NotNormalizedDistribution { .. })
        ));
        assert!(
            !Distribution::sub_normalized(labels("x", 2), vec![0.2, 0.3], 1e-10)
                .unwrap()
                .is_complete()
        );
    }
}
