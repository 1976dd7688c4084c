//! Seeded random unitaries and states.
//!
//! Every generator takes either an explicit `u64` seed or a caller-owned
//! RNG; there is no global randomness.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{trace_of, ComplexMatrix, C64};
use super::operator::Unitary;
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// The RNG used for every seeded routine in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    // fill row by row so the draw order matches the row-major convention
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// Unitary factor of the QR decomposition of `g`, with the phases of `R`'s
/// diagonal moved into `Q` so the factorization is unique.
///
/// For `g` with i.i.d. standard complex Gaussian entries the result is
/// Haar distributed.
pub fn unitary_from_gaussian(g: &DMatrix<C64>) -> DMatrix<C64> {
    let qr = g.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..q.ncols() {
        let d = r[(c, c)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for row in 0..q.nrows() {
            q[(row, c)] *= phase;
        }
    }
    q
}

pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Unitary {
    Unitary::from_trusted(unitary_from_gaussian(&gaussian_matrix(dim, dim, rng)))
}

/// Haar-random `dim x dim` unitary, deterministic in `seed`.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Unitary {
    haar_unitary_with(dim, &mut rng_from_seed(seed))
}

/// Random state from the induced measure: a Haar-random pure state on
/// `dim x rank` with the `rank`-dimensional ancilla traced out.
pub fn random_density_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    // the amplitudes of |psi> on dim x rank, reshaped as a dim x rank matrix G;
    // tracing out the ancilla gives G G^+ / ||G||^2
    let g = gaussian_matrix(dim, rank, rng);
    let rho = &g * g.adjoint();
    let tr = trace_of(&rho).re;
    let mut rho = rho / C64::new(tr, 0.0);
    // remove rounding asymmetry
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(ComplexMatrix::wrap(rho))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}
