//! Symbolic derivations over independence and separation statements.

mod atom;
mod check;
mod rules;
mod script;

pub use atom::{Atom, Clause, Literal, NameSet, Relation, Term};
pub use check::{check_derivation, check_step, Verdict};
pub use rules::{apply_rule, Rule};
pub use script::{load_script, parse_clause, Script, Step, StepIndex};

/// Derivations shipped with the library, by name.
pub const BUNDLED_SCRIPTS: [(&str, &str); 3] = [
    ("theorem3", include_str!("../../proofs/theorem3.proof")),
    ("theorem5a", include_str!("../../proofs/theorem5a.proof")),
    ("theorem5b", include_str!("../../proofs/theorem5b.proof")),
];

/// Source text of a bundled script; accepts the name with or without `.proof`.
pub fn bundled_script(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".proof").unwrap_or(name);
    BUNDLED_SCRIPTS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
