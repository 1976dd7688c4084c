//! Executes parsed scenarios and sweeps and assembles run reports.

use std::path::Path;
use std::time::Instant;

use serde_json::json;

use nosig_core::qutrit::{build_x, check_nodisturbance_with_observable};
use nosig_core::{
    check_box_nosignaling, check_nosignaling, check_signal_free, chsh_value, run_routing,
    Error as CoreError,
};

use crate::error::CliError;
use crate::report::{EntryReport, RunReport, Verdict};
use crate::scenario::{parse_scenario, BipartiteSpec, BoxSpec, QutritSpec, ScenarioFile, Stanza};
use crate::sweep::{run_sweep_item, SweepKind, SweepParams, DEFAULT_SEED};

/// Tolerance for qutrit, bipartite and box stanzas that do not set one.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Command-line values that take precedence over stanza fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub trials: Option<usize>,
    pub budget: Option<usize>,
    pub dims: Option<Vec<Vec<usize>>>,
    pub planted_bug: bool,
}

impl Overrides {
    fn tol_or(&self, stanza: Option<f64>) -> f64 {
        self.tol.or(stanza).unwrap_or(DEFAULT_TOL)
    }

    fn apply(&self, p: &mut SweepParams) {
        if let Some(s) = self.seed {
            p.seed = s;
        }
        if let Some(t) = self.tol {
            p.tol = t;
        }
        if let Some(n) = self.trials {
            p.trials = n;
        }
        if let Some(b) = self.budget {
            p.budget = b;
        }
        if let Some(d) = &self.dims {
            p.dims = d.clone();
        }
        p.planted_bug |= self.planted_bug;
    }
}

pub fn run_scenario_file(path: &Path, ov: &Overrides) -> Result<RunReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    run_scenario_text(&text, ov)
}

pub fn run_scenario_text(text: &str, ov: &Overrides) -> Result<RunReport, CliError> {
    run_scenario(&parse_scenario(text)?, ov)
}

pub fn run_scenario(file: &ScenarioFile, ov: &Overrides) -> Result<RunReport, CliError> {
    let mut entries = Vec::new();
    for (index, stanza) in file.entries.iter().enumerate() {
        let core = |source: CoreError| CliError::Core {
            stanza: index,
            source,
        };
        match stanza {
            Stanza::Qutrit(q) => entries.push(timed(|| run_qutrit(index, q, ov)).map_err(core)?),
            Stanza::Bipartite(b) => {
                entries.push(timed(|| run_bipartite(index, b, ov)).map_err(core)?)
            }
            Stanza::Box(b) => entries.push(timed(|| Ok(run_box(index, b, ov))).map_err(core)?),
            Stanza::Sweep(p) => {
                let mut p = p.clone();
                // dims come from the stanza; only the command-line sweep takes --dims
                let ov = Overrides {
                    dims: None,
                    ..ov.clone()
                };
                ov.apply(&mut p);
                p.validate().map_err(|m| CliError::Schema {
                    stanza: index,
                    kind: "sweep".into(),
                    field: "overrides".into(),
                    message: m,
                })?;
                entries.extend(sweep_entries(index, &p).map_err(core)?);
            }
        }
    }
    Ok(RunReport::new(ov.seed, entries))
}

/// Runs one sweep kind with its defaults, adjusted by the overrides.
pub fn run_sweep_command(kind: SweepKind, ov: &Overrides) -> Result<RunReport, CliError> {
    let mut p = SweepParams::defaults(kind);
    ov.apply(&mut p);
    p.validate().map_err(CliError::Usage)?;
    let entries = sweep_entries(0, &p).map_err(|source| CliError::Core { stanza: 0, source })?;
    let entries = entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| EntryReport { index: i, ..e })
        .collect();
    Ok(RunReport::new(Some(p.seed), entries))
}

fn timed(f: impl FnOnce() -> nosig_core::Result<EntryReport>) -> nosig_core::Result<EntryReport> {
    let start = Instant::now();
    let mut e = f()?;
    e.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(e)
}

fn sweep_entries(index: usize, p: &SweepParams) -> nosig_core::Result<Vec<EntryReport>> {
    p.dims
        .iter()
        .map(|dims| {
            let start = Instant::now();
            let o = run_sweep_item(p, dims)?;
            Ok(EntryReport {
                index,
                kind: "sweep".into(),
                verdict: Verdict::from_pass(o.pass),
                max_deviation: o.worst_deviation,
                tol: p.tol,
                failing_seed: o.failing_seed(),
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                label: o.label,
                detail: o.detail,
            })
        })
        .collect()
}

fn run_qutrit(index: usize, q: &QutritSpec, ov: &Overrides) -> nosig_core::Result<EntryReport> {
    let tol = ov.tol_or(q.tol);
    let sc = &q.scenario;
    let expected_alice = sc.beta()[0].norm_sqr();
    let (alice_prob, bob) = match run_routing(sc, q.context) {
        Ok(out) => (out.alice_prob, Some(out.bob_conditional)),
        // the particle never reaches Bob; Alice's share is still checked
        Err(CoreError::BobUnreachable { alice_prob }) => (alice_prob, None),
        Err(e) => return Err(e),
    };
    let alice_dev = (alice_prob - expected_alice).abs();
    let signal = check_signal_free(sc, tol);
    let nd = check_nodisturbance_with_observable(
        &build_x(sc.a(), sc.b())?,
        tol,
        ov.seed.unwrap_or(DEFAULT_SEED),
    );
    let comm = nd.x_commutators.iter().map(|(_, n)| *n).fold(0.0, f64::max);
    let max_deviation = [
        alice_dev,
        signal.max_deviation,
        nd.max_marginal_deviation,
        comm,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let pass = alice_dev <= tol && signal.pass && nd.pass;
    Ok(EntryReport {
        index,
        kind: "qutrit".into(),
        label: format!("context={}", q.context.label()),
        verdict: Verdict::from_pass(pass),
        max_deviation,
        tol,
        failing_seed: None,
        elapsed_ms: 0.0,
        detail: json!({
            "context": q.context.label(),
            "alice_prob": alice_prob,
            "expected_alice_prob": expected_alice,
            "bob_conditional": bob,
            "signal": signal,
            "nodisturbance": nd,
        }),
    })
}

fn run_bipartite(
    index: usize,
    b: &BipartiteSpec,
    ov: &Overrides,
) -> nosig_core::Result<EntryReport> {
    let tol = ov.tol_or(b.tol);
    let [e1, e2] = &b.instruments;
    let r = check_nosignaling(&b.state, e1, e2, &b.b_split, &b.partition, tol)?;
    Ok(EntryReport {
        index,
        kind: "bipartite".into(),
        label: format!("{} vs {}", e1.name(), e2.name()),
        verdict: Verdict::from_pass(r.pass),
        max_deviation: r.max_deviation,
        tol,
        failing_seed: None,
        elapsed_ms: 0.0,
        detail: serde_json::to_value(&r).expect("report serializes"),
    })
}

fn run_box(index: usize, b: &BoxSpec, ov: &Overrides) -> EntryReport {
    let tol = ov.tol_or(b.tol);
    let r = check_box_nosignaling(&b.table, tol);
    let (nx, ny) = b.table.inputs();
    let (na, nb) = b.table.outputs();
    EntryReport {
        index,
        kind: "box".into(),
        label: format!("inputs {nx}x{ny}, outputs {na}x{nb}"),
        verdict: Verdict::from_pass(r.pass),
        max_deviation: r.max_deviation,
        tol,
        failing_seed: None,
        elapsed_ms: 0.0,
        detail: json!({
            "alice_deviation": r.alice_deviation,
            "bob_deviation": r.bob_deviation,
            "chsh": chsh_value(&b.table).ok(),
        }),
    }
}
