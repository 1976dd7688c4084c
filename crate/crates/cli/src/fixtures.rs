//! Scenario files bundled into the binary.

use crate::error::CliError;

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "qutrit_default",
        description: "qutrit routing under both contexts with a complex amplitude vector",
        text: include_str!("../fixtures/qutrit_default.json"),
    },
    Fixture {
        name: "bell_zx",
        description:
            "maximally entangled qubits, Alice measures Z or X, Bob's computational blocks",
        text: include_str!("../fixtures/bell_zx.json"),
    },
    Fixture {
        name: "kraus_rotated",
        description: "qubit-qutrit state, projective vs weak Kraus instrument, rotated B blocks",
        text: include_str!("../fixtures/kraus_rotated.json"),
    },
    Fixture {
        name: "pr_box",
        description: "the PR box and a deterministic local box",
        text: include_str!("../fixtures/pr_box.json"),
    },
    Fixture {
        name: "signaling_box",
        description: "a PR box with a planted marginal shift; expected to fail",
        text: include_str!("../fixtures/signaling_box.json"),
    },
    Fixture {
        name: "quick_sweeps",
        description: "short runs of every sweep kind",
        text: include_str!("../fixtures/quick_sweeps.json"),
    },
];

pub fn fixture(name: &str) -> Result<&'static Fixture, CliError> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| CliError::UnknownFixture(name.to_string()))
}
