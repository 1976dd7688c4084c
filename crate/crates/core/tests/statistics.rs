//! Monte-Carlo checks of the random samplers against closed-form moments.

use nosig_core::hilbert::DEFAULT_TOLERANCES;
use nosig_core::{haar_random_unitary, random_density};

const SAMPLES: u64 = 10_000;

/// Mean and standard error of `f(seed)` over `SAMPLES` seeds.
fn sample_mean(f: impl Fn(u64) -> f64) -> f64 {
    (0..SAMPLES).map(f).sum::<f64>() / SAMPLES as f64
}

#[test]
fn haar_first_entry_has_beta_one_three_moments() {
    // |U00|^2 for Haar U in dimension 4 is Beta(1, 3): mean 1/4, variance 3/80
    let mean = sample_mean(|s| haar_random_unitary(4, s).matrix()[(0, 0)].norm_sqr());
    let sigma = (3.0 / 80.0 / SAMPLES as f64).sqrt();
    assert!(
        (mean - 0.25).abs() <= 3.0 * sigma,
        "mean {mean}, 3 sigma {}",
        3.0 * sigma
    );
}

#[test]
fn induced_qubit_states_fill_the_bloch_ball_uniformly() {
    // rank-2 induced measure on a qubit is uniform in the Bloch ball; the
    // eigenvalue gap is the Bloch radius r with density 3 r^2, so E[r] = 3/4
    // and Var[r] = 3/5 - 9/16 = 3/80
    let mean = sample_mean(|s| {
        let ev = random_density(2, 2, s).unwrap().eigenvalues();
        ev[1] - ev[0]
    });
    let sigma = (3.0 / 80.0 / SAMPLES as f64).sqrt();
    assert!(
        (mean - 0.75).abs() <= 3.0 * sigma,
        "mean {mean}, 3 sigma {}",
        3.0 * sigma
    );
}

#[test]
fn random_states_are_valid_in_every_small_dimension() {
    let tol = DEFAULT_TOLERANCES;
    for d in 2..=6 {
        for s in 0..1000u64 {
            let rank = 1 + (s as usize) % d;
            let rho = random_density(d, rank, s).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() <= tol.trace);
            assert!(rho.eigenvalues()[0] >= -tol.psd);
            if rank == 1 {
                let m = rho.matrix().as_dmatrix();
                assert!((m * m - m).norm() <= tol.idempotent);
            }
        }
    }
}

#[test]
fn haar_unitaries_are_unitary() {
    for d in 1..=8 {
        for s in 0..200u64 {
            assert!(haar_random_unitary(d, s).unitarity_deviation() <= DEFAULT_TOLERANCES.unitary);
        }
    }
    let u = haar_random_unitary(1, 5).matrix()[(0, 0)];
    assert!((u.norm() - 1.0).abs() < 1e-15);
    assert_eq!(haar_random_unitary(3, 42), haar_random_unitary(3, 42));
}
