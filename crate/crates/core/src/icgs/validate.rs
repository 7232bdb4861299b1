use std::fmt;

use serde::Serialize;

use super::{Icgs, StateId};

/// A violated structural invariant, with the offending names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoAgents,
    NoStates,
    NoActions {
        agent: String,
    },
    EmptyProtocol {
        agent: String,
        state: String,
    },
    /// `state ∼ other` for `agent` but their protocols differ.
    NonUniformProtocol {
        agent: String,
        state: String,
        other: String,
    },
    /// An enabled joint action has no successor.
    MissingTransition {
        state: String,
        joint: String,
    },
    /// A successor is defined for a joint action that is not enabled.
    DisabledTransition {
        state: String,
        joint: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "the model has no agents"),
            Violation::NoStates => write!(f, "the model has no states"),
            Violation::NoActions { agent } => write!(f, "agent `{agent}` has no actions"),
            Violation::EmptyProtocol { agent, state } => {
                write!(f, "agent `{agent}` has no enabled action at `{state}`")
            }
            Violation::NonUniformProtocol { agent, state, other } => write!(
                f,
                "`{state}` and `{other}` are indistinguishable for agent `{agent}` but have different protocols"
            ),
            Violation::MissingTransition { state, joint } => {
                write!(f, "no transition for enabled joint action {joint} at `{state}`")
            }
            Violation::DisabledTransition { state, joint } => {
                write!(f, "transition defined for disabled joint action {joint} at `{state}`")
            }
        }
    }
}

/// Outcome of [`validate_model`]; empty means the model is a legal iCGS.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every violated invariant of `m`.
///
/// Dangling references are rejected earlier by the builder, so this checks
/// the semantic conditions: nonempty sets, uniform protocols, and that the
/// transition function is defined exactly on enabled joint actions.
pub fn validate_model(m: &Icgs) -> ValidationReport {
    let mut violations = Vec::new();
    if m.agent_count() == 0 {
        violations.push(Violation::NoAgents);
    }
    if m.state_count() == 0 {
        violations.push(Violation::NoStates);
    }
    for a in m.agent_ids() {
        if m.actions(a).is_empty() {
            violations.push(Violation::NoActions { agent: m.agent_name(a).to_string() });
        }
    }
    for a in m.agent_ids() {
        for s in m.state_ids() {
            if m.protocol(a, s).is_empty() {
                violations.push(Violation::EmptyProtocol {
                    agent: m.agent_name(a).to_string(),
                    state: m.state_name(s).to_string(),
                });
            }
        }
        for class in m.equivalence_classes(a) {
            let first = class[0];
            for &t in &class[1..] {
                if m.protocol(a, first) != m.protocol(a, t) {
                    violations.push(Violation::NonUniformProtocol {
                        agent: m.agent_name(a).to_string(),
                        state: m.state_name(first).to_string(),
                        other: m.state_name(t).to_string(),
                    });
                }
            }
        }
    }
    for s in m.state_ids() {
        let enabled = m.enabled_joint_actions(s).expect("state ids come from the model");
        let defined = m.transitions_from(s);
        for j in &enabled {
            if !defined.contains_key(j) {
                violations.push(missing(m, s, j));
            }
        }
        for j in defined.keys() {
            if enabled.binary_search(j).is_err() {
                violations.push(Violation::DisabledTransition {
                    state: m.state_name(s).to_string(),
                    joint: m.format_joint(j),
                });
            }
        }
    }
    ValidationReport { violations }
}

fn missing(m: &Icgs, s: StateId, j: &super::JointAction) -> Violation {
    Violation::MissingTransition { state: m.state_name(s).to_string(), joint: m.format_joint(j) }
}
