//! A hand-computed qutrit example: beta = (0.6, 0.64, 0.48), X = diag(1, 2, 2).
//!
//! Alice sees |0> with probability 0.36. After X reports b = 2 the state is
//! (0, 0.8, 0.6), which Y1 splits as (0.64, 0.36) and Y2 as
//! ((0.8 + 0.6)^2 / 2, (0.8 - 0.6)^2 / 2) = (0.98, 0.02).

use nosig_core::qutrit::{eigenspace_partition, ContextChoice};
use nosig_core::{
    build_x, check_noncontextuality, check_signal_free, measure_under_context, run_routing,
    Channel, QutritScenario, C64,
};

const TOL: f64 = 1e-12;

fn scenario() -> QutritScenario {
    let beta = [C64::new(0.6, 0.0), C64::new(0.64, 0.0), C64::new(0.48, 0.0)];
    QutritScenario::new(beta, 1.0, 2.0).unwrap()
}

#[test]
fn routing_matches_hand_computation() {
    let sc = scenario();
    let expected = [
        (ContextChoice::Y1, [0.64, 0.36]),
        (ContextChoice::Y2, [0.98, 0.02]),
    ];
    for (ctx, bob) in expected {
        let out = run_routing(&sc, ctx).unwrap();
        assert!(
            (out.alice_prob - 0.36).abs() <= TOL,
            "{ctx:?}: {}",
            out.alice_prob
        );
        for (got, want) in out.bob_conditional.probabilities().iter().zip(bob) {
            assert!((got - want).abs() <= TOL, "{ctx:?}: {got} vs {want}");
        }
    }
}

#[test]
fn eigenspace_blocks_carry_the_same_weights() {
    let sc = scenario();
    let rho = sc.state();
    let x = build_x(sc.a(), sc.b()).unwrap();
    let sp = eigenspace_partition();
    assert_eq!(sp.block_dims(), vec![1, 2]);

    // The blocks agree with X's own spectral projectors.
    for (block, eigenvalue) in sp.blocks().iter().zip([1.0, 2.0]) {
        let p = x.projector_for(eigenvalue, 1e-9).unwrap();
        let gap = (block.projector().matrix().as_dmatrix() - p.matrix().as_dmatrix()).norm();
        assert!(gap <= TOL);
    }

    let q = measure_under_context(&rho, &sp, &Channel::identity(3)).unwrap();
    assert!((q.probabilities()[0] - 0.36).abs() <= TOL);
    assert!((q.probabilities()[1] - 0.64).abs() <= TOL);
}

#[test]
fn generic_subspace_check_sees_both_contexts_agree() {
    let sc = scenario();
    let rho = sc.state();
    let block = eigenspace_partition().blocks()[1].basis().clone();
    let contexts = [ContextChoice::Y1.basis(), ContextChoice::Y2.basis()];
    let report = check_noncontextuality(&rho, &block, &contexts, TOL).unwrap();
    assert!(report.pass);
    for (_, v) in &report.values {
        assert!((v - 0.64).abs() <= TOL);
    }
}

#[test]
fn signal_report_is_clean() {
    let report = check_signal_free(&scenario(), TOL);
    assert!(report.pass, "{report:?}");
    assert_eq!(report.blocks.len(), 1);
    let b = &report.blocks[0];
    assert!((b.first - 0.36).abs() <= TOL && (b.second - 0.36).abs() <= TOL);
}
