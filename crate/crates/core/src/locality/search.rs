//! Randomized search for a pair of Alice-side instruments that changes
//! Bob's block marginals.
//!
//! The schedule alternates random restarts with short coordinate-descent
//! refinements. Every random draw comes from a single seeded stream that
//! does not depend on the budget, so a larger budget replays the smaller
//! run as a prefix and the best deviation is monotone in the budget.

use rand::Rng;

use super::random::InstrumentParams;
use super::{bipartite_view, bob_marginal_raw, check_state_dim, LocalInstrument};
use crate::error::{Error, Result};
use crate::hilbert::{rng_from_seed, DensityMatrix};
use crate::partitions::{ProductPartition, Sector, SumPartition};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Number of instrument-pair evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Refinement evaluations after each random restart.
    pub refine_steps: usize,
    /// Initial coordinate step; halved after every rejected move.
    pub initial_step: f64,
    /// Test hook: let POVM candidates skip normalization, producing
    /// non-trace-preserving instruments that do signal.
    pub allow_non_trace_preserving: bool,
}

impl SearchConfig {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            refine_steps: 24,
            initial_step: 0.5,
            allow_non_trace_preserving: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best_deviation: f64,
    pub best_pair: (LocalInstrument, LocalInstrument),
    pub evaluations: usize,
}

/// Searches `budget` instrument pairs for the largest
/// `max_j |Prob_B(j|E) - Prob_B(j|E')|`.
pub fn adversarial_signal_search(
    rho: &DensityMatrix,
    pp: &ProductPartition,
    sp_b: &SumPartition,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    adversarial_signal_search_with(rho, pp, sp_b, &SearchConfig::new(budget, seed))
}

pub fn adversarial_signal_search_with(
    rho: &DensityMatrix,
    pp: &ProductPartition,
    sp_b: &SumPartition,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let pp = bipartite_view(pp)?;
    check_state_dim(rho, &pp)?;
    let (dim_a, dim_b) = (pp.sector_dim(Sector::A)?, pp.sector_dim(Sector::B)?);
    if sp_b.total_dim() != dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_b,
            got: sp_b.total_dim(),
        });
    }
    let normalize = !cfg.allow_non_trace_preserving;
    let budget = cfg.budget.max(1);
    let mut rng = rng_from_seed(cfg.seed);

    let evaluate = |pair: &(InstrumentParams, InstrumentParams)| -> Result<f64> {
        let e1 = pair.0.build(Sector::A, normalize);
        let e2 = pair.1.build(Sector::A, normalize);
        let p1 = bob_marginal_raw(rho.dmatrix(), e1.elements(), sp_b, &pp)?;
        let p2 = bob_marginal_raw(rho.dmatrix(), e2.elements(), sp_b, &pp)?;
        Ok(p1
            .iter()
            .zip(&p2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    };

    let mut evaluations = 0;
    let mut best: Option<(f64, (InstrumentParams, InstrumentParams))> = None;
    let record =
        |d: f64, pair: &(InstrumentParams, InstrumentParams), best: &mut Option<(f64, _)>| {
            if best.as_ref().is_none_or(|(b, _)| d > *b) {
                *best = Some((d, pair.clone()));
            }
        };

    while evaluations < budget {
        let mut pair = (
            InstrumentParams::sample(dim_a, &mut rng),
            InstrumentParams::sample(dim_a, &mut rng),
        );
        let mut current = evaluate(&pair)?;
        evaluations += 1;
        record(current, &pair, &mut best);

        let mut step = cfg.initial_step;
        for _ in 0..cfg.refine_steps {
            if evaluations >= budget {
                break;
            }
            let side = rng.random_range(0..2);
            let target = if side == 0 { &pair.0 } else { &pair.1 };
            let coord = rng.random_range(0..target.coordinate_count());
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut trial = pair.clone();
            if side == 0 {
                trial.0.perturb(coord, sign * step);
            } else {
                trial.1.perturb(coord, sign * step);
            }
            let d = evaluate(&trial)?;
            evaluations += 1;
            record(d, &trial, &mut best);
            if d > current {
                pair = trial;
                current = d;
            } else {
                step *= 0.5;
            }
        }
    }

    let (best_deviation, (p1, p2)) = best.expect("budget >= 1");
    Ok(SearchOutcome {
        best_deviation,
        best_pair: (
            p1.build(Sector::A, normalize),
            p2.build(Sector::A, normalize),
        ),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::random_density;

    #[test]
    fn single_evaluation_budget() {
        let pp = ProductPartition::bipartite(2, 2).unwrap();
        let rho = random_density(4, 2, 1).unwrap();
        let out = adversarial_signal_search(&rho, &pp, &SumPartition::singletons(2), 1, 9).unwrap();
        assert_eq!(out.evaluations, 1);
        assert!(out.best_deviation >= 0.0);
        assert!(out.best_deviation <= 1e-10);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let pp = ProductPartition::bipartite(2, 3).unwrap();
        let rho = random_density(6, 3, 2).unwrap();
        let sp = SumPartition::singletons(3);
        let a = adversarial_signal_search(&rho, &pp, &sp, 200, 4).unwrap();
        let b = adversarial_signal_search(&rho, &pp, &sp, 200, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_deviation_is_monotone_in_budget() {
        let pp = ProductPartition::bipartite(2, 2).unwrap();
        let rho = random_density(4, 4, 3).unwrap();
        let sp = SumPartition::singletons(2);
        let mut cfg = SearchConfig::new(1, 5);
        cfg.allow_non_trace_preserving = true;
        let mut last = -1.0;
        for budget in [1, 2, 5, 13, 40, 100, 250] {
            cfg.budget = budget;
            let d = adversarial_signal_search_with(&rho, &pp, &sp, &cfg)
                .unwrap()
                .best_deviation;
            assert!(d >= last, "budget {budget}: {d} < {last}");
            last = d;
        }
    }

    #[test]
    fn planted_non_trace_preserving_instruments_signal() {
        let pp = ProductPartition::bipartite(3, 3).unwrap();
        let rho = random_density(9, 9, 7).unwrap();
        let mut cfg = SearchConfig::new(1000, 7);
        cfg.allow_non_trace_preserving = true;
        let out =
            adversarial_signal_search_with(&rho, &pp, &SumPartition::singletons(3), &cfg).unwrap();
        assert!(out.best_deviation > 0.1, "{}", out.best_deviation);
    }
}
