//! Single-particle routing on a qutrit.
//!
//! A degenerate observable `X = a|0><0| + b(|1><1| + |2><2|)` routes the
//! particle: outcome `a` sends it to Alice, outcome `b` to Bob, who then
//! measures in `Y1 = {|1>, |2>}` or `Y2 = {|+>, |->}` with
//! `|+-> = (|1> +- |2>)/sqrt2`. Alice's detection probability is
//! `1 - mu(span{|1>,|2>})`, evaluated through Bob's chosen basis, so any
//! dependence on that basis would be both contextual and a signal.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gleason::Distribution;
use crate::hilbert::matrix::{frobenius, outer, vector_norm, ComplexMatrix, C64};
use crate::hilbert::random::random_density_with;
use crate::hilbert::{
    commutator_norm, rng_from_seed, spectral_decompose, DensityMatrix, Observable,
    DEFAULT_TOLERANCES,
};
use crate::locality::{BlockDeviation, SignalReport};
use crate::partitions::SumPartition;

const Z: C64 = C64::new(0.0, 0.0);
const O: C64 = C64::new(1.0, 0.0);
const H: C64 = C64::new(FRAC_1_SQRT_2, 0.0);

pub const KET_0: [C64; 3] = [O, Z, Z];
pub const KET_1: [C64; 3] = [Z, O, Z];
pub const KET_2: [C64; 3] = [Z, Z, O];
/// `(|1> + |2>)/sqrt2`
pub const KET_PLUS: [C64; 3] = [Z, H, H];
/// `(|1> - |2>)/sqrt2`
pub const KET_MINUS: [C64; 3] = [Z, H, C64::new(-FRAC_1_SQRT_2, 0.0)];

/// Bob's measurement basis on the `b`-eigenspace of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContextChoice {
    Y1,
    Y2,
}

impl ContextChoice {
    pub const ALL: [ContextChoice; 2] = [ContextChoice::Y1, ContextChoice::Y2];

    pub fn vectors(self) -> [[C64; 3]; 2] {
        match self {
            ContextChoice::Y1 => [KET_1, KET_2],
            ContextChoice::Y2 => [KET_PLUS, KET_MINUS],
        }
    }

    pub fn outcome_labels(self) -> [&'static str; 2] {
        match self {
            ContextChoice::Y1 => ["|1>", "|2>"],
            ContextChoice::Y2 => ["|+>", "|->"],
        }
    }

    /// The two basis vectors as columns of a `3 x 2` matrix.
    pub fn basis(self) -> ComplexMatrix {
        let [u, v] = self.vectors();
        ComplexMatrix::from_columns(&[u.to_vec(), v.to_vec()]).expect("finite constants")
    }

    /// `Y+ = {|0>} u Y` as a full basis.
    pub fn completed(self) -> [[C64; 3]; 3] {
        let [u, v] = self.vectors();
        [KET_0, u, v]
    }

    pub fn label(self) -> &'static str {
        match self {
            ContextChoice::Y1 => "Y1",
            ContextChoice::Y2 => "Y2",
        }
    }
}

/// State `sum_j beta_j |j>` and the eigenvalues of `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct QutritScenario {
    beta: [C64; 3],
    a: f64,
    b: f64,
}

impl QutritScenario {
    pub fn new(beta: [C64; 3], a: f64, b: f64) -> Result<Self> {
        let norm = vector_norm(&beta);
        if (norm - 1.0).abs() > DEFAULT_TOLERANCES.norm {
            return Err(Error::NotNormalized { norm });
        }
        if a == b {
            return Err(Error::DegenerateSplit { value: a });
        }
        Ok(Self { beta, a, b })
    }

    pub fn beta(&self) -> &[C64; 3] {
        &self.beta
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::wrap(outer(&self.beta, &self.beta)))
            .expect("normalized amplitudes give a valid state")
    }
}

/// `X = a|0><0| + b(|1><1| + |2><2|)`.
pub fn build_x(a: f64, b: f64) -> Result<Observable> {
    if a == b {
        return Err(Error::DegenerateSplit { value: a });
    }
    spectral_decompose(
        &ComplexMatrix::from_real_diagonal(&[a, b, b]),
        DEFAULT_TOLERANCES.cluster,
    )
}

/// `{|0>} (+) span{|1>, |2>}`: the eigenspaces of `X` as a tensor-sum partition.
pub fn eigenspace_partition() -> SumPartition {
    SumPartition::from_index_sets(3, &[vec![0], vec![1, 2]]).expect("valid split")
}

/// Probability weight a measure assigns to the ray `e` when it is measured
/// as part of context `ctx`. The Born rule ignores `ctx`; test doubles need not.
pub trait ContextMeasure {
    fn weight(&self, rho: &DensityMatrix, e: &[C64], ctx: ContextChoice) -> f64;
}

/// `<e| rho |e>`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BornWeights;

impl ContextMeasure for BornWeights {
    fn weight(&self, rho: &DensityMatrix, e: &[C64], _ctx: ContextChoice) -> f64 {
        expectation(rho.matrix().as_dmatrix(), e)
    }
}

fn expectation(m: &DMatrix<C64>, e: &[C64]) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..e.len() {
        for s in 0..e.len() {
            acc += e[r].conj() * m[(r, s)] * e[s];
        }
    }
    acc.re
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingOutcome {
    pub alice_prob: f64,
    /// Bob's outcome distribution given that `X` returned `b`.
    pub bob_conditional: Distribution,
}

/// `1 - sum_{e in ctx} mu(e)`: Alice's probability read off the completed context.
fn alice_probability(rho: &DensityMatrix, ctx: ContextChoice, measure: &dyn ContextMeasure) -> f64 {
    1.0 - ctx
        .vectors()
        .iter()
        .map(|e| measure.weight(rho, e, ctx))
        .sum::<f64>()
}

pub fn run_routing(sc: &QutritScenario, ctx: ContextChoice) -> Result<RoutingOutcome> {
    run_routing_with(sc, ctx, &BornWeights)
}

/// Alice's detection probability and Bob's conditional distribution. Bob's
/// state is the Lüders update `P_b rho P_b / Tr(P_b rho)`.
pub fn run_routing_with(
    sc: &QutritScenario,
    ctx: ContextChoice,
    measure: &dyn ContextMeasure,
) -> Result<RoutingOutcome> {
    let tol = DEFAULT_TOLERANCES.probability;
    let rho = sc.state();
    let alice_prob = alice_probability(&rho, ctx, measure);
    if alice_prob < -tol || alice_prob > 1.0 + tol {
        return Err(Error::InvalidProbability { value: alice_prob });
    }
    let alice_prob = alice_prob.clamp(0.0, 1.0);
    let pb = DMatrix::from_fn(3, 3, |r, c| if r == c && r > 0 { O } else { Z });
    let reach_bob = (&pb * rho.matrix().as_dmatrix()).trace().re;
    if reach_bob <= tol {
        return Err(Error::BobUnreachable { alice_prob });
    }
    let luders = &pb * rho.matrix().as_dmatrix() * &pb / C64::new(reach_bob, 0.0);
    let luders = DensityMatrix::new(ComplexMatrix::wrap(luders))?;
    let weights: Vec<f64> = ctx
        .vectors()
        .iter()
        .map(|e| measure.weight(&luders, e, ctx))
        .collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    let names = ctx.outcome_labels().iter().map(|s| s.to_string()).collect();
    Ok(RoutingOutcome {
        alice_prob,
        bob_conditional: Distribution::new(names, probs, tol)?,
    })
}

pub fn check_signal_free(sc: &QutritScenario, tol: f64) -> SignalReport {
    check_signal_free_with(sc, tol, &BornWeights)
}

/// Compares Alice's probability under `Y1` and `Y2`. The linked measures are
/// `mu(span{|1>,|2>})` under each context, whose difference is exactly the
/// signal.
pub fn check_signal_free_with(
    sc: &QutritScenario,
    tol: f64,
    measure: &dyn ContextMeasure,
) -> SignalReport {
    let rho = sc.state();
    let [p1, p2] = ContextChoice::ALL.map(|c| alice_probability(&rho, c, measure));
    let block = BlockDeviation {
        label: "|0>".into(),
        first: p1,
        second: p2,
        deviation: (p1 - p2).abs(),
        linked_measures: Some((1.0 - p1, 1.0 - p2)),
    };
    SignalReport::new(["Y1".into(), "Y2".into()], vec![block], tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoDisturbanceReport {
    /// `||[X, P]||_F` for every projector of `Y1+` and `Y2+`.
    pub x_commutators: Vec<(String, f64)>,
    pub commuting_pass: bool,
    /// Largest `||[P, Q]||_F` with `P` from `Y1+` and `Q` from `Y2+`.
    pub max_cross_commutator: f64,
    pub contexts_incompatible: bool,
    /// Largest `|sum_i P(X=x, Y1+=i) - sum_j P(X=x, Y2+=j)|` over the sampled states.
    pub max_marginal_deviation: f64,
    pub marginals_pass: bool,
    pub tol: f64,
    pub pass: bool,
}

/// Threshold separating "non-commuting" from "commuting up to noise" for the
/// two completed contexts.
pub const INCOMPATIBILITY_THRESHOLD: f64 = 0.1;
const NODISTURBANCE_STATES: usize = 100;

pub fn check_nodisturbance(a: f64, b: f64, tol: f64) -> Result<NoDisturbanceReport> {
    let x = build_x(a, b)?;
    Ok(check_nodisturbance_with_observable(&x, tol, 0))
}

/// No-disturbance check for an arbitrary qutrit observable standing in for
/// `X`; `seed` drives the sampled states of the marginal comparison.
pub fn check_nodisturbance_with_observable(
    x: &Observable,
    tol: f64,
    seed: u64,
) -> NoDisturbanceReport {
    let ray = |v: &[C64; 3]| ComplexMatrix::wrap(outer(v, v));
    let named = |ctx: ContextChoice| -> Vec<(String, ComplexMatrix)> {
        let labels = ["|0>", ctx.outcome_labels()[0], ctx.outcome_labels()[1]];
        ctx.completed()
            .iter()
            .zip(labels)
            .map(|(v, l)| (format!("{}+:{}", ctx.label(), l), ray(v)))
            .collect()
    };
    let y1 = named(ContextChoice::Y1);
    let y2 = named(ContextChoice::Y2);

    let x_commutators: Vec<(String, f64)> = y1
        .iter()
        .chain(&y2)
        .map(|(l, p)| {
            (
                l.clone(),
                commutator_norm(x.matrix(), p).expect("3x3 operands"),
            )
        })
        .collect();
    let commuting_pass = x_commutators.iter().all(|(_, n)| *n <= tol);

    let mut max_cross_commutator = 0.0f64;
    for (_, p) in &y1 {
        for (_, q) in &y2 {
            max_cross_commutator =
                max_cross_commutator.max(commutator_norm(p, q).expect("3x3 operands"));
        }
    }

    // P(X = x, Y = i) with Y measured first: Tr(Px Pi rho Pi Px)
    let marginal =
        |rho: &DMatrix<C64>, px: &DMatrix<C64>, ctx: &[(String, ComplexMatrix)]| -> f64 {
            ctx.iter()
                .map(|(_, pi)| {
                    let k = px * pi.as_dmatrix();
                    (&k * rho * k.adjoint()).trace().re
                })
                .sum()
        };
    let mut rng = rng_from_seed(seed);
    let mut max_marginal_deviation = 0.0f64;
    for _ in 0..NODISTURBANCE_STATES {
        let rank = rng.random_range(1..=3);
        let rho = random_density_with(3, rank, &mut rng).expect("rank in range");
        for comp in x.spectrum() {
            let px = comp.projector.matrix().as_dmatrix();
            let d = (marginal(rho.matrix().as_dmatrix(), px, &y1)
                - marginal(rho.matrix().as_dmatrix(), px, &y2))
            .abs();
            max_marginal_deviation = max_marginal_deviation.max(d);
        }
    }
    let marginals_pass = max_marginal_deviation <= tol;
    let contexts_incompatible = max_cross_commutator > INCOMPATIBILITY_THRESHOLD;
    NoDisturbanceReport {
        x_commutators,
        commuting_pass,
        max_cross_commutator,
        contexts_incompatible,
        max_marginal_deviation,
        marginals_pass,
        tol,
        pass: commuting_pass && contexts_incompatible && marginals_pass,
    }
}

/// Largest sine of the principal angles between `span(Y1)` and `span(Y2)`.
pub fn context_span_gap() -> f64 {
    crate::gleason::max_principal_sine(
        ContextChoice::Y1.basis().as_dmatrix(),
        ContextChoice::Y2.basis().as_dmatrix(),
    )
}

/// Frobenius distance between the projectors of `X`'s `b`-eigenspace and
/// `span(Y)`, for both contexts.
pub fn eigenspace_mismatch(x: &Observable, b: f64) -> Option<f64> {
    let pb = x
        .projector_for(b, DEFAULT_TOLERANCES.cluster)?
        .matrix()
        .as_dmatrix()
        .clone();
    Some(
        ContextChoice::ALL
            .iter()
            .map(|c| {
                let y = c.basis();
                frobenius(&(y.as_dmatrix() * y.adjoint().as_dmatrix() - &pb))
            })
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gleason::check_noncontextuality;
    use crate::hilbert::random::random_pure_vector;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn uniform() -> QutritScenario {
        let s = 1.0 / 3f64.sqrt();
        QutritScenario::new([c(s), c(s), c(s)], 1.0, 2.0).unwrap()
    }

    #[test]
    fn x_spectrum() {
        let x = build_x(1.0, 2.0).unwrap();
        let ranks: Vec<(f64, usize)> = x
            .spectrum()
            .iter()
            .map(|s| (s.eigenvalue, s.projector.rank()))
            .collect();
        assert_eq!(ranks.len(), 2);
        assert!((ranks[0].0 - 1.0).abs() < 1e-14 && ranks[0].1 == 1);
        assert!((ranks[1].0 - 2.0).abs() < 1e-14 && ranks[1].1 == 2);
        assert!(eigenspace_mismatch(&x, 2.0).unwrap() < 1e-12);
    }

    #[test]
    fn indicator_observable() {
        let x = build_x(0.0, 1.0).unwrap();
        let p = x.projector_for(1.0, 1e-8).unwrap();
        assert_eq!(p.rank(), 2);
        assert!(frobenius(&(p.matrix().as_dmatrix() - x.matrix().as_dmatrix())) < 1e-12);
    }

    #[test]
    fn equal_eigenvalues_rejected() {
        assert_eq!(
            build_x(1.0, 1.0).unwrap_err(),
            Error::DegenerateSplit { value: 1.0 }
        );
        assert!(matches!(
            check_nodisturbance(2.0, 2.0, 1e-12),
            Err(Error::DegenerateSplit { .. })
        ));
    }

    #[test]
    fn plus_minus_are_the_stored_constants() {
        assert_eq!(KET_PLUS[1].re, FRAC_1_SQRT_2);
        assert_eq!(KET_PLUS[2].re, FRAC_1_SQRT_2);
        assert_eq!(KET_MINUS[2].re, -FRAC_1_SQRT_2);
        assert!(context_span_gap() <= 1e-12);
    }

    #[test]
    fn uniform_state_alice_gets_one_third() {
        for ctx in ContextChoice::ALL {
            let out = run_routing(&uniform(), ctx).unwrap();
            assert!((out.alice_prob - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bob_sees_fair_plus_minus_for_ket_one() {
        let sc = QutritScenario::new([c(0.0), c(1.0), c(0.0)], 1.0, 2.0).unwrap();
        let out = run_routing(&sc, ContextChoice::Y2).unwrap();
        assert_eq!(out.alice_prob, 0.0);
        assert!((out.bob_conditional.probabilities()[0] - 0.5).abs() < 1e-15);
        assert!((out.bob_conditional.probabilities()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn particle_always_at_alice() {
        let sc = QutritScenario::new([c(1.0), c(0.0), c(0.0)], 1.0, 2.0).unwrap();
        for ctx in ContextChoice::ALL {
            assert!(matches!(
                run_routing(&sc, ctx),
                Err(Error::BobUnreachable { .. })
            ));
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(matches!(
            QutritScenario::new([c(1.0), c(1.0), c(0.0)], 1.0, 2.0),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            QutritScenario::new([c(1.0), c(0.0), c(0.0)], 3.0, 3.0),
            Err(Error::DegenerateSplit { .. })
        ));
    }

    #[test]
    fn random_states_do_not_signal() {
        let mut rng = rng_from_seed(12);
        for _ in 0..100 {
            let v = random_pure_vector(3, &mut rng);
            let sc = QutritScenario::new([v[0], v[1], v[2]], 1.0, 2.0).unwrap();
            let r = check_signal_free(&sc, 1e-12);
            assert!(r.pass, "{r:?}");
            assert!((r.blocks[0].first - v[0].norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn half_amplitudes_give_zero_deviation() {
        let sc = QutritScenario::new([c(FRAC_1_SQRT_2), c(0.5), c(0.5)], 1.0, 2.0).unwrap();
        let r = check_signal_free(&sc, 1e-15);
        assert!(r.max_deviation <= 1e-15, "{}", r.max_deviation);
    }

    struct BiasedY2;

    impl ContextMeasure for BiasedY2 {
        fn weight(&self, rho: &DensityMatrix, e: &[C64], ctx: ContextChoice) -> f64 {
            let w = BornWeights.weight(rho, e, ctx);
            match ctx {
                ContextChoice::Y1 => w,
                ContextChoice::Y2 => 0.8 * w,
            }
        }
    }

    #[test]
    fn context_dependent_measure_is_caught() {
        let r = check_signal_free_with(&uniform(), 1e-12, &BiasedY2);
        assert!(!r.pass);
        // Born mass of span{|1>,|2>} is 2/3; the double removes 20% of it under Y2
        assert!((r.max_deviation - 0.2 * 2.0 / 3.0).abs() < 1e-12);
        let (m1, m2) = r.blocks[0].linked_measures.unwrap();
        assert!(((m1 - m2).abs() - r.max_deviation).abs() < 1e-15);
    }

    #[test]
    fn linked_measures_agree_with_generic_check() {
        let sc = uniform();
        let r = check_signal_free(&sc, 1e-12);
        let generic = check_noncontextuality(
            &sc.state(),
            &ContextChoice::Y1.basis(),
            &[ContextChoice::Y1.basis(), ContextChoice::Y2.basis()],
            1e-12,
        )
        .unwrap();
        let (m1, m2) = r.blocks[0].linked_measures.unwrap();
        assert!((m1 - generic.values[0].1).abs() < 1e-15);
        assert!((m2 - generic.values[1].1).abs() < 1e-15);
    }

    #[test]
    fn routing_probabilities_are_complete() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let v = random_pure_vector(3, &mut rng);
            let sc = QutritScenario::new([v[0], v[1], v[2]], -1.0, 4.0).unwrap();
            for ctx in ContextChoice::ALL {
                let out = run_routing(&sc, ctx).unwrap();
                let total = out.alice_prob + (1.0 - out.alice_prob) * out.bob_conditional.total();
                assert!((total - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn nodisturbance_for_the_degenerate_x() {
        let r = check_nodisturbance(1.0, 2.0, 1e-12).unwrap();
        assert!(
            r.x_commutators.iter().all(|(_, n)| *n == 0.0),
            "{:?}",
            r.x_commutators
        );
        assert!((r.max_cross_commutator - FRAC_1_SQRT_2).abs() < 1e-10);
        assert!(r.max_marginal_deviation <= 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn non_degenerate_x_breaks_commutation() {
        let x =
            spectral_decompose(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]), 1e-8).unwrap();
        let r = check_nodisturbance_with_observable(&x, 1e-12, 0);
        assert!(!r.commuting_pass);
        assert!(!r.pass);
    }
}
