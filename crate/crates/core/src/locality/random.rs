//! Seeded random instruments, channels and B-splits for property sweeps
//! and the adversarial search.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{Channel, InstrumentMode, LocalInstrument};
use crate::hilbert::matrix::{ComplexMatrix, C64};
use crate::hilbert::operator::hermitian_function;
use crate::hilbert::random::{gaussian_matrix, haar_unitary_with, unitary_from_gaussian};
use crate::partitions::{Sector, SumPartition};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Family {
    /// Rank-`|g|` projectors onto groups of columns of a random unitary.
    Projective { groups: Vec<usize> },
    /// Random unitary followed by a coarse-grained computational-basis measurement.
    RotateThenMeasure { groups: Vec<usize> },
    /// Normalized random PSD decomposition of the identity.
    Povm,
}

/// Real parameters behind a random instrument: one or more complex Gaussian
/// matrices plus the instrument family.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct InstrumentParams {
    pub family: Family,
    pub params: Vec<DMatrix<C64>>,
}

fn random_groups<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<usize> {
    if dim == 1 {
        return vec![1];
    }
    let outcomes = rng.random_range(2..=dim);
    // split 0..dim into `outcomes` non-empty contiguous runs
    let mut cuts: Vec<usize> = (1..dim).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(outcomes - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(outcomes);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(dim)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

impl InstrumentParams {
    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        match rng.random_range(0..3) {
            0 => Self {
                family: Family::Projective {
                    groups: random_groups(dim, rng),
                },
                params: vec![gaussian_matrix(dim, dim, rng)],
            },
            1 => Self {
                family: Family::RotateThenMeasure {
                    groups: random_groups(dim, rng),
                },
                params: vec![gaussian_matrix(dim, dim, rng)],
            },
            _ => {
                let outcomes = rng.random_range(2..=dim + 1);
                Self {
                    family: Family::Povm,
                    params: (0..outcomes)
                        .map(|_| gaussian_matrix(dim, dim, rng))
                        .collect(),
                }
            }
        }
    }

    /// Builds the instrument. With `normalize` unset, POVM elements skip the
    /// `S^{-1/2}` normalization and are generally not trace preserving.
    pub fn build(&self, sector: Sector, normalize: bool) -> LocalInstrument {
        let dim = self.params[0].nrows();
        let (elements, mode, name): (Vec<ComplexMatrix>, _, _) = match &self.family {
            Family::Projective { groups } => {
                let u = unitary_from_gaussian(&self.params[0]);
                let mut start = 0;
                let els = groups
                    .iter()
                    .map(|&g| {
                        let cols = u.columns(start, g);
                        start += g;
                        ComplexMatrix::wrap(cols * cols.adjoint())
                    })
                    .collect();
                (
                    els,
                    InstrumentMode::Projective,
                    format!("projective{groups:?}"),
                )
            }
            Family::RotateThenMeasure { groups } => {
                let u = unitary_from_gaussian(&self.params[0]);
                let mut start = 0;
                let els = groups
                    .iter()
                    .map(|&g| {
                        let mut m = DMatrix::<C64>::zeros(dim, dim);
                        m.rows_mut(start, g).copy_from(&u.rows(start, g));
                        start += g;
                        ComplexMatrix::wrap(m)
                    })
                    .collect();
                (
                    els,
                    InstrumentMode::Kraus,
                    format!("unitary+measure{groups:?}"),
                )
            }
            Family::Povm => {
                let els = if normalize {
                    let mut s = DMatrix::<C64>::zeros(dim, dim);
                    for a in &self.params {
                        s += a.adjoint() * a;
                    }
                    let inv_sqrt = hermitian_function(&s, |x| 1.0 / x.sqrt());
                    self.params
                        .iter()
                        .map(|a| ComplexMatrix::wrap(a * &inv_sqrt))
                        .collect()
                } else {
                    self.params
                        .iter()
                        .map(|a| ComplexMatrix::wrap(a.clone()))
                        .collect()
                };
                (
                    els,
                    InstrumentMode::Kraus,
                    format!("povm({})", self.params.len()),
                )
            }
        };
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        LocalInstrument::from_trusted(sector, labels, elements, mode, name)
    }

    pub fn coordinate_count(&self) -> usize {
        self.params.iter().map(|p| 2 * p.len()).sum()
    }

    /// Shifts one real coordinate (real or imaginary part of one entry).
    pub fn perturb(&mut self, coordinate: usize, delta: f64) {
        let mut k = coordinate;
        for p in self.params.iter_mut() {
            if k < 2 * p.len() {
                let entry = &mut p.as_mut_slice()[k / 2];
                if k.is_multiple_of(2) {
                    entry.re += delta;
                } else {
                    entry.im += delta;
                }
                return;
            }
            k -= 2 * p.len();
        }
    }
}

/// A random trace-preserving instrument from one of three families:
/// rotated projective, unitary-then-measure, or POVM.
pub fn random_instrument<R: Rng + ?Sized>(
    sector: Sector,
    dim: usize,
    rng: &mut R,
) -> LocalInstrument {
    InstrumentParams::sample(dim, rng).build(sector, true)
}

/// A random channel with between one and four Kraus operators.
pub fn random_channel<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Channel {
    let n = rng.random_range(1..=4);
    let raw: Vec<DMatrix<C64>> = (0..n).map(|_| gaussian_matrix(dim, dim, rng)).collect();
    let mut s = DMatrix::<C64>::zeros(dim, dim);
    for a in &raw {
        s += a.adjoint() * a;
    }
    let inv_sqrt = hermitian_function(&s, |x| 1.0 / x.sqrt());
    Channel::unchecked(
        raw.iter()
            .map(|a| ComplexMatrix::wrap(a * &inv_sqrt))
            .collect(),
    )
    .expect("non-empty square Kraus set")
}

/// A random split of `H_B` into between one and `dim_b` blocks. Half of the
/// splits are axis-aligned, the rest are rotated by a Haar-random unitary.
pub fn random_b_split<R: Rng + ?Sized>(dim_b: usize, rng: &mut R) -> SumPartition {
    let blocks = rng.random_range(1..=dim_b);
    let mut order: Vec<usize> = (0..dim_b).collect();
    order.shuffle(rng);
    // first `blocks` indices seed the blocks so none is empty
    let mut sets: Vec<Vec<usize>> = order[..blocks].iter().map(|&i| vec![i]).collect();
    for &i in &order[blocks..] {
        let j = rng.random_range(0..blocks);
        sets[j].push(i);
    }
    for s in sets.iter_mut() {
        s.sort_unstable();
    }
    if rng.random_bool(0.5) {
        SumPartition::from_index_sets(dim_b, &sets).expect("index sets cover the space")
    } else {
        let v = haar_unitary_with(dim_b, rng);
        let vm = v.matrix().as_dmatrix();
        let bases = sets
            .iter()
            .map(|s| ComplexMatrix::wrap(vm.select_columns(s.iter())))
            .collect();
        SumPartition::new(bases).expect("columns of a unitary are orthonormal")
    }
}
