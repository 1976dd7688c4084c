//! Validated finite-dimensional complex linear algebra: matrices, states,
//! projectors, observables, unitaries and seeded random generation.

pub mod matrix;
pub mod operator;
pub mod random;
pub mod state;
pub mod tolerance;

pub use matrix::{ComplexMatrix, C64};
pub use operator::{
    commutator_norm, spectral_decompose, spectral_decompose_with, Observable, Projector,
    SpectralComponent, Unitary,
};
pub use random::{haar_random_unitary, random_density, rng_from_seed, SeededRng};
pub use state::{make_density, pure_state, pure_state_with, DensityMatrix};
pub use tolerance::{Tolerances, DEFAULT_TOLERANCES};
