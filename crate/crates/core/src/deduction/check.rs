use std::collections::BTreeMap;

use serde::Serialize;

use super::atom::Clause;
use super::rules::{apply_rule, Rule};
use super::script::{Script, StepIndex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub valid: bool,
    #[serde(serialize_with = "ser_index")]
    pub first_bad_step: Option<StepIndex>,
    /// Why the first bad step was rejected.
    pub reason: Option<String>,
    pub steps: usize,
    pub major_steps: usize,
}

fn ser_index<S: serde::Serializer>(v: &Option<StepIndex>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(i) => s.serialize_str(&i.to_string()),
        None => s.serialize_none(),
    }
}

impl Verdict {
    pub fn summary(&self) -> String {
        match self.first_bad_step {
            None => format!("VALID {} steps", self.major_steps),
            Some(i) => format!("INVALID at step {i}"),
        }
    }
}

/// Checks one step against already-accepted clauses.
pub fn check_step(rule: Rule, premises: &[Clause], clause: &Clause) -> Result<bool> {
    if rule == Rule::Assumption {
        return if premises.is_empty() {
            Ok(true)
        } else {
            Err(Error::RuleApplication {
                rule: rule.name().into(),
                slot: "arity".into(),
                message: format!("expects 0 premises, got {}", premises.len()),
            })
        };
    }
    Ok(apply_rule(rule, premises)?.binary_search(clause).is_ok())
}

/// Replays a script; each step's clause must be exactly one of the clauses
/// its rule derives from the cited premises.
pub fn check_derivation(script: &Script) -> Result<Verdict> {
    // Re-validate structure for scripts assembled outside the parser.
    let script = Script::new(script.steps().to_vec())?;
    let mut proven: BTreeMap<StepIndex, &Clause> = BTreeMap::new();
    for step in script.steps() {
        let premises: Vec<Clause> = step.premises.iter().map(|p| proven[p].clone()).collect();
        let reason = match check_step(step.rule, &premises, &step.clause) {
            Ok(true) => None,
            Ok(false) => Some(format!("{} does not derive `{}` from the cited premises", step.rule, step.clause)),
            Err(e) => Some(e.to_string()),
        };
        if let Some(reason) = reason {
            return Ok(Verdict {
                valid: false,
                first_bad_step: Some(step.index),
                reason: Some(reason),
                steps: script.steps().len(),
                major_steps: script.major_steps(),
            });
        }
        proven.insert(step.index, &step.clause);
    }
    Ok(Verdict {
        valid: true,
        first_bad_step: None,
        reason: None,
        steps: script.steps().len(),
        major_steps: script.major_steps(),
    })
}
