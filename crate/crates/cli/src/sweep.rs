//! Seeded randomized property sweeps.
//!
//! Trial `t` of a sweep with seed `s` draws everything from
//! `rng_from_seed(s + t)`, so a failing trial is reproduced from its seed
//! alone.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde_json::json;

use nosig_core::hilbert::random::{haar_unitary_with, random_density_with};
use nosig_core::locality::random::{random_b_split, random_instrument};
use nosig_core::locality::{adversarial_signal_search_with, SearchConfig};
use nosig_core::{
    box_from_quantum, check_box_nosignaling, check_noncontextuality, check_nosignaling, chsh_value,
    rng_from_seed, ComplexMatrix, LocalInstrument, ProductPartition, Projector, Result, Sector,
    SumPartition,
};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 7;
/// Number of bases of the same subspace compared per gleason trial.
pub const GLEASON_CONTEXTS: usize = 5;
/// Slack above `2 sqrt2` allowed for quantum CHSH values.
pub const TSIRELSON_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Nosignal,
    Gleason,
    Boxes,
    Search,
}

impl SweepKind {
    pub const ALL: [SweepKind; 4] = [
        SweepKind::Nosignal,
        SweepKind::Gleason,
        SweepKind::Boxes,
        SweepKind::Search,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Nosignal => "nosignal",
            SweepKind::Gleason => "gleason",
            SweepKind::Boxes => "boxes",
            SweepKind::Search => "search",
        }
    }

    /// Whether dims items are single dimensions rather than `dA x dB` pairs.
    pub fn single_dims(self) -> bool {
        self == SweepKind::Gleason
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = CliError;

    fn from_str(s: &str) -> std::result::Result<Self, CliError> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    pub kind: SweepKind,
    /// `[d]` items for gleason, `[dA, dB]` items otherwise.
    pub dims: Vec<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Evaluations per search trial.
    pub budget: usize,
    /// Search only: let candidate instruments break trace preservation.
    pub planted_bug: bool,
}

impl SweepParams {
    /// Defaults matching the acceptance runs for each kind.
    pub fn defaults(kind: SweepKind) -> Self {
        let (dims, trials, tol) = match kind {
            SweepKind::Nosignal => (
                vec![vec![2, 2], vec![2, 3], vec![3, 3], vec![4, 4]],
                1000,
                1e-10,
            ),
            SweepKind::Gleason => ((3..=6).map(|d| vec![d]).collect(), 1000, 1e-10),
            SweepKind::Boxes => (vec![vec![2, 2]], 100, 1e-10),
            SweepKind::Search => (vec![vec![3, 3]], 1, 1e-8),
        };
        Self {
            kind,
            dims,
            trials,
            seed: DEFAULT_SEED,
            tol,
            budget: 10_000,
            planted_bug: false,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.budget == 0 {
            return Err("budget must be at least 1".into());
        }
        if self.dims.is_empty() {
            return Err("dims must not be empty".into());
        }
        let want = if self.kind.single_dims() { 1 } else { 2 };
        for d in &self.dims {
            if d.len() != want {
                return Err(format!(
                    "{} sweeps take {} dimension(s) per item, got {:?}",
                    self.kind, want, d
                ));
            }
            if d.contains(&0) {
                return Err(format!("zero dimension in {d:?}"));
            }
        }
        if matches!(self.kind, SweepKind::Gleason | SweepKind::Boxes)
            && self.dims.iter().flatten().any(|&d| d < 2)
        {
            return Err(format!("{} sweeps need every dimension >= 2", self.kind));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(format!(
                "tolerance {} is not a non-negative number",
                self.tol
            ));
        }
        Ok(())
    }
}

/// Worst case over the trials of one dims item.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub label: String,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub worst_deviation: f64,
    pub worst_seed: u64,
    pub pass: bool,
    pub detail: serde_json::Value,
}

impl SweepOutcome {
    pub fn failing_seed(&self) -> Option<u64> {
        (!self.pass).then_some(self.worst_seed)
    }
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

struct Worst {
    deviation: f64,
    seed: u64,
    all_pass: bool,
}

impl Worst {
    fn new(seed: u64) -> Self {
        Self {
            deviation: f64::NEG_INFINITY,
            seed,
            all_pass: true,
        }
    }

    fn record(&mut self, deviation: f64, seed: u64, pass: bool) {
        // a failing trial outranks every passing one when picking the seed to report
        let replace = match (self.all_pass, pass) {
            (true, false) => true,
            (false, true) => false,
            _ => deviation > self.deviation,
        };
        if replace {
            self.deviation = deviation;
            self.seed = seed;
        }
        self.all_pass &= pass;
    }
}

pub fn run_sweep(p: &SweepParams) -> Result<Vec<SweepOutcome>> {
    p.dims.iter().map(|dims| run_sweep_item(p, dims)).collect()
}

/// All trials of one dims item; `p.dims` is ignored.
pub fn run_sweep_item(p: &SweepParams, dims: &[usize]) -> Result<SweepOutcome> {
    let mut worst = Worst::new(p.seed);
    let mut max_dev = 0.0f64;
    let mut extra = 0.0f64;
    for t in 0..p.trials {
        let s = trial_seed(p.seed, t);
        let (dev, pass, aux) = match p.kind {
            SweepKind::Nosignal => nosignal_trial(dims[0], dims[1], s, p.tol)?,
            SweepKind::Gleason => gleason_trial(dims[0], s, p.tol)?,
            SweepKind::Boxes => box_trial(dims[0], dims[1], s, p.tol)?,
            SweepKind::Search => search_trial(dims[0], dims[1], s, p)?,
        };
        worst.record(dev, s, pass);
        max_dev = max_dev.max(dev);
        extra = extra.max(aux);
    }
    let dims_label = dims
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("x");
    let mut detail = json!({
        "kind": p.kind.name(),
        "dims": dims,
        "trials": p.trials,
        "seed": p.seed,
        "worst_seed": worst.seed,
    });
    match p.kind {
        SweepKind::Boxes => detail["max_abs_chsh"] = json!(extra),
        SweepKind::Search => {
            detail["budget"] = json!(p.budget);
            detail["planted_bug"] = json!(p.planted_bug);
        }
        _ => {}
    }
    Ok(SweepOutcome {
        label: format!("{} {} ({} trials)", p.kind, dims_label, p.trials),
        dims: dims.to_vec(),
        trials: p.trials,
        worst_deviation: max_dev,
        worst_seed: worst.seed,
        pass: worst.all_pass,
        detail,
    })
}

/// Random state, two random instruments on A and a random split of B.
pub fn nosignal_trial(da: usize, db: usize, seed: u64, tol: f64) -> Result<(f64, bool, f64)> {
    let mut rng = rng_from_seed(seed);
    let pp = ProductPartition::bipartite(da, db)?;
    let d = da * db;
    let rank = rng.random_range(1..=d);
    let rho = random_density_with(d, rank, &mut rng)?;
    let e1 = random_instrument(Sector::A, da, &mut rng);
    let e2 = random_instrument(Sector::A, da, &mut rng);
    let sp = random_b_split(db, &mut rng);
    let r = check_nosignaling(&rho, &e1, &e2, &sp, &pp, tol)?;
    Ok((r.max_deviation, r.pass, 0.0))
}

/// Random state and a random proper subspace resolved in several random bases.
pub fn gleason_trial(d: usize, seed: u64, tol: f64) -> Result<(f64, bool, f64)> {
    let mut rng = rng_from_seed(seed);
    let rank = rng.random_range(1..=d);
    let rho = random_density_with(d, rank, &mut rng)?;
    let k = rng.random_range(1..d);
    let u = haar_unitary_with(d, &mut rng);
    let s = u.matrix().as_dmatrix().columns(0, k).into_owned();
    let subspace = ComplexMatrix::from_dmatrix(s.clone())?;
    let contexts = (0..GLEASON_CONTEXTS)
        .map(|_| {
            let w = haar_unitary_with(k, &mut rng);
            ComplexMatrix::from_dmatrix(&s * w.matrix().as_dmatrix())
        })
        .collect::<Result<Vec<_>>>()?;
    let r = check_noncontextuality(&rho, &subspace, &contexts, tol)?;
    Ok((r.max_pairwise_deviation, r.pass, 0.0))
}

/// A binary projective measurement: a random unitary's columns split in two.
/// Needs `dim >= 2`.
fn random_binary_instrument<R: Rng + ?Sized>(
    sector: Sector,
    dim: usize,
    rng: &mut R,
) -> Result<LocalInstrument> {
    let u = haar_unitary_with(dim, rng);
    let cut = rng.random_range(1..dim);
    let m = u.matrix().as_dmatrix();
    let low = Projector::from_orthonormal_columns(&ComplexMatrix::from_dmatrix(
        m.columns(0, cut).into_owned(),
    )?)?;
    let high = Projector::from_orthonormal_columns(&ComplexMatrix::from_dmatrix(
        m.columns(cut, dim - cut).into_owned(),
    )?)?;
    LocalInstrument::projective(sector, vec![low, high])
}

/// Box realized by a random state and two binary measurements per side.
pub fn box_trial(da: usize, db: usize, seed: u64, tol: f64) -> Result<(f64, bool, f64)> {
    let mut rng = rng_from_seed(seed);
    let pp = ProductPartition::bipartite(da, db)?;
    let d = da * db;
    let rank = rng.random_range(1..=d);
    let rho = random_density_with(d, rank, &mut rng)?;
    let a = [
        random_binary_instrument(Sector::A, da, &mut rng)?,
        random_binary_instrument(Sector::A, da, &mut rng)?,
    ];
    let b = [
        random_binary_instrument(Sector::B, db, &mut rng)?,
        random_binary_instrument(Sector::B, db, &mut rng)?,
    ];
    let bx = box_from_quantum(&rho, &a, &b, &pp)?;
    let r = check_box_nosignaling(&bx, tol);
    let s = chsh_value(&bx)?.abs();
    Ok((
        r.max_deviation,
        r.pass && s <= 2.0 * SQRT_2 + TSIRELSON_SLACK,
        s,
    ))
}

/// Adversarial search on a random full-rank state against the finest split of B.
pub fn search_trial(da: usize, db: usize, seed: u64, p: &SweepParams) -> Result<(f64, bool, f64)> {
    let mut rng = rng_from_seed(seed);
    let pp = ProductPartition::bipartite(da, db)?;
    let rho = random_density_with(da * db, da * db, &mut rng)?;
    let mut cfg = SearchConfig::new(p.budget, seed);
    cfg.allow_non_trace_preserving = p.planted_bug;
    let out = adversarial_signal_search_with(&rho, &pp, &SumPartition::singletons(db), &cfg)?;
    Ok((out.best_deviation, out.best_deviation <= p.tol, 0.0))
}
