use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nosig_cli::fixtures::{fixture, FIXTURES};
use nosig_cli::scenario::parse_dims_flag;
use nosig_cli::{
    run_scenario_file, run_scenario_text, run_sweep_command, CliError, Overrides, RunReport,
    SweepKind,
};

/// Verify no-signaling and non-contextuality properties of quantum scenarios.
///
/// Exit status: 0 when every check passes, 1 when a physics check fails,
/// 2 on malformed input.
#[derive(Debug, Parser)]
#[command(name = "nosig", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Run a bundled scenario, same as `fixture run <NAME>`.
    #[arg(long, value_name = "NAME")]
    fixture: Option<String>,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// Base seed for sweeps and sampled states.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Pass/fail tolerance applied to every check.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Trials per dimension in sweeps.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Evaluation budget for the adversarial search.
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Dimensions for `sweep`, e.g. `2x2,3x3` or `3,4,5`.
    #[arg(long, global = true)]
    dims: Option<String>,

    /// Let the adversarial search use non-trace-preserving instruments.
    #[arg(long, global = true)]
    planted_bug: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every entry of a scenario file.
    Verify { file: PathBuf },
    /// Seeded property sweep: nosignal, gleason, boxes or search.
    Sweep { kind: String },
    /// Bundled scenarios.
    #[command(subcommand)]
    Fixture(FixtureCommand),
}

#[derive(Debug, Subcommand)]
enum FixtureCommand {
    List,
    Run { name: String },
}

fn overrides(f: &Flags) -> Result<Overrides, CliError> {
    if let Some(t) = f.tol {
        if t.is_nan() || t < 0.0 {
            return Err(CliError::Usage(format!(
                "--tol must be a non-negative number, got {t}"
            )));
        }
    }
    Ok(Overrides {
        seed: f.seed,
        tol: f.tol,
        trials: f.trials,
        budget: f.budget,
        dims: f.dims.as_deref().map(parse_dims_flag).transpose()?,
        planted_bug: f.planted_bug,
    })
}

fn execute(cli: &Cli) -> Result<Option<RunReport>, CliError> {
    let ov = overrides(&cli.flags)?;
    let run_fixture = |name: &str| fixture(name).and_then(|fx| run_scenario_text(fx.text, &ov));
    match (&cli.command, &cli.fixture) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--fixture cannot be combined with a subcommand".into(),
        )),
        (Some(Command::Verify { file }), None) => run_scenario_file(file, &ov).map(Some),
        (Some(Command::Sweep { kind }), None) => {
            run_sweep_command(kind.parse::<SweepKind>()?, &ov).map(Some)
        }
        (Some(Command::Fixture(FixtureCommand::Run { name })), None) => run_fixture(name).map(Some),
        (Some(Command::Fixture(FixtureCommand::List)), None) => {
            for fx in FIXTURES {
                println!("{:<16} {}", fx.name, fx.description);
            }
            Ok(None)
        }
        (None, Some(name)) => run_fixture(name).map(Some),
        (None, None) => Err(CliError::Usage("nothing to do; try `nosig --help`".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Some(report)) => {
            match cli.flags.format {
                Format::Json => print!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            ExitCode::from(report.exit_code())
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::Cli;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
