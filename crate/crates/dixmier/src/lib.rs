//! Front end for [`dixmier_core`]: JSON system descriptions, inline element
//! expressions, reports and the `dixmier` command.

pub mod cli;
pub mod description;
pub mod error;
pub mod expr;
pub mod report;

pub use dixmier_core as core;
pub use error::{Error, Result};

/// Bundled fixture descriptions by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("z2-swap", include_str!("../fixtures/z2-swap.json")),
    (
        "z2-pair-swap",
        include_str!("../fixtures/z2-pair-swap.json"),
    ),
    ("s3-natural", include_str!("../fixtures/s3-natural.json")),
    ("z4-regular", include_str!("../fixtures/z4-regular.json")),
    ("pauli-z2z2", include_str!("../fixtures/pauli-z2z2.json")),
    (
        "z2-trivial-on-scalars",
        include_str!("../fixtures/z2-trivial-on-scalars.json"),
    ),
    ("free2", include_str!("../fixtures/free2.json")),
    ("free2-pauli", include_str!("../fixtures/free2-pauli.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
