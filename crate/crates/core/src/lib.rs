//! Numerical toolkit for Born-rule subspace measures, tensor-product and
//! tensor-sum partitions, local instruments, and no-signaling checks.
//!
//! The central check: for a bipartite state and two trace-preserving
//! instruments `E`, `E'` on Alice's sector, Bob's block marginals
//! `Prob_B(j | E)` coincide, because each induced block `H_A (x) B_j` is an
//! invariant subspace of `E (x) I` and its Born measure cannot depend on
//! the local context.

pub mod boxes;
pub mod error;
pub mod gleason;
pub mod hilbert;
pub mod locality;
pub mod partitions;
pub mod qutrit;

pub use boxes::{box_from_quantum, check_box_nosignaling, chsh_value, pr_box, BoxReport, NsBox};
pub use error::{Error, Result, StateViolation};
pub use gleason::{
    born_measure, check_noncontextuality, frame_distribution, measure_under_context, Distribution,
    MeasureReport,
};
pub use hilbert::{
    commutator_norm, haar_random_unitary, make_density, pure_state, random_density, rng_from_seed,
    spectral_decompose, ComplexMatrix, DensityMatrix, Observable, Projector, Tolerances, Unitary,
    C64,
};
pub use locality::{
    adversarial_signal_search, apply_channel, bob_marginal, check_nosignaling, joint_distribution,
    partial_trace, Channel, JointTable, LocalInstrument, SignalReport,
};
pub use partitions::{
    embed_local, factorizations, induced_sum_partition, make_product_partition, make_sum_partition,
    ProductPartition, Sector, SumPartition,
};
pub use qutrit::{
    build_x, check_nodisturbance, check_signal_free, run_routing, ContextChoice,
    NoDisturbanceReport, QutritScenario,
};
