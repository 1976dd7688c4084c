//! Library side of the `nosig` command: scenario files, seeded sweeps and
//! run reports on top of `nosig-core`.

pub mod error;
pub mod fixtures;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use error::CliError;
pub use report::{EntryReport, RunReport, Verdict};
pub use run::{run_scenario, run_scenario_file, run_scenario_text, run_sweep_command, Overrides};
pub use scenario::{parse_scenario, ScenarioFile, Stanza};
pub use sweep::{run_sweep, SweepKind, SweepOutcome, SweepParams};
