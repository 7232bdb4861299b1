//! The JSON model schema.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Icgs, IcgsBuilder};
use crate::error::Result;

/// On-disk form of a model. Keys are fixed; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub actions: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub indistinguishability: BTreeMap<String, Vec<Vec<String>>>,
    pub protocol: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub transitions: Vec<TransitionEntry>,
    #[serde(default)]
    pub labeling: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub from: String,
    pub act: BTreeMap<String, String>,
    pub to: String,
}

impl ModelFile {
    pub fn into_model(self) -> Result<Icgs> {
        let mut b = IcgsBuilder::new();
        for agent in &self.agents {
            let acts = self.actions.get(agent).cloned().unwrap_or_default();
            b = b.agent(agent, acts);
        }
        for agent in self.actions.keys() {
            if !self.agents.contains(agent) {
                return Err(crate::error::input(format!("`actions` names unknown agent `{agent}`")));
            }
        }
        b = b.atoms(self.atoms).states(self.states).initial(&self.initial);
        for (agent, groups) in &self.indistinguishability {
            for g in groups {
                b = b.indistinguishable(agent, g.iter().cloned());
            }
        }
        for (agent, per_state) in &self.protocol {
            for (state, acts) in per_state {
                b = b.protocol(agent, state, acts.iter().cloned());
            }
        }
        for t in &self.transitions {
            let pairs: Vec<(&str, &str)> = t.act.iter().map(|(a, x)| (a.as_str(), x.as_str())).collect();
            b = b.transition(&t.from, &pairs, &t.to);
        }
        for (state, atoms) in &self.labeling {
            b = b.label(state, atoms.iter().cloned());
        }
        b.build()
    }

    /// Canonical file form: nontrivial classes only, transitions in state
    /// then joint-action order, every state listed in `labeling`.
    pub fn from_model(m: &Icgs) -> Self {
        let mut actions = BTreeMap::new();
        let mut indist = BTreeMap::new();
        let mut protocol = BTreeMap::new();
        for a in m.agent_ids() {
            let name = m.agent_name(a).to_string();
            actions.insert(name.clone(), m.actions(a).to_vec());
            let groups: Vec<Vec<String>> = m
                .equivalence_classes(a)
                .into_iter()
                .filter(|c| c.len() > 1)
                .map(|c| c.iter().map(|&s| m.state_name(s).to_string()).collect())
                .collect();
            indist.insert(name.clone(), groups);
            let per_state: BTreeMap<String, Vec<String>> = m
                .state_ids()
                .map(|s| {
                    (
                        m.state_name(s).to_string(),
                        m.protocol(a, s).iter().map(|&x| m.action_name(a, x).to_string()).collect(),
                    )
                })
                .collect();
            protocol.insert(name, per_state);
        }
        let mut transitions = Vec::new();
        for s in m.state_ids() {
            for (j, &t) in m.transitions_from(s) {
                let act = m
                    .agent_ids()
                    .map(|a| (m.agent_name(a).to_string(), m.action_name(a, j.get(a)).to_string()))
                    .collect();
                transitions.push(TransitionEntry {
                    from: m.state_name(s).to_string(),
                    act,
                    to: m.state_name(t).to_string(),
                });
            }
        }
        let labeling = m
            .state_ids()
            .map(|s| {
                let mut atoms: Vec<(usize, String)> =
                    m.labels(s).iter().map(|q| (q.0, m.atom_name(*q).to_string())).collect();
                atoms.sort();
                (m.state_name(s).to_string(), atoms.into_iter().map(|(_, n)| n).collect())
            })
            .collect();
        ModelFile {
            agents: m.agents().to_vec(),
            atoms: m.atoms().to_vec(),
            states: m.states().to_vec(),
            initial: m.state_name(m.initial()).to_string(),
            actions,
            indistinguishability: indist,
            protocol,
            transitions,
            labeling,
        }
    }
}

impl Icgs {
    pub fn from_json_str(text: &str) -> Result<Icgs> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn load(path: &Path) -> Result<Icgs> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Canonical pretty-printed JSON, newline-terminated.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&ModelFile::from_model(self)).expect("model files always serialize");
        s.push('\n');
        s
    }
}
