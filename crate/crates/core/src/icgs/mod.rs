//! Concurrent game structures with imperfect information.
//!
//! An [`Icgs`] is immutable once built. All names (agents, states, actions,
//! atoms) are interned to dense indices; the public API speaks both indices
//! and names so reports can always be mapped back to the input.

mod json;
mod validate;

pub use json::{ModelFile, TransitionEntry};
pub use validate::{validate_model, ValidationReport, Violation};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{input, Error, Result};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash,
            serde::Serialize, serde::Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(
    /// Dense index of a state.
    StateId
);
id_type!(
    /// Dense index of an agent.
    AgentId
);
id_type!(
    /// Index into one agent's action list.
    ActionId
);
id_type!(
    /// Dense index of an atomic proposition.
    AtomId
);

/// One action per agent, indexed by [`AgentId`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointAction(pub Vec<ActionId>);

impl JointAction {
    pub fn get(&self, agent: AgentId) -> ActionId {
        self.0[agent.0]
    }
}

/// A finite, nonempty sequence of states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct History(Vec<StateId>);

impl History {
    pub fn new(states: Vec<StateId>) -> Result<Self> {
        if states.is_empty() {
            return Err(input("a history must contain at least one state"));
        }
        Ok(Self(states))
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> StateId {
        *self.0.last().expect("histories are nonempty")
    }

    /// Checks that every state exists and consecutive states are linked by
    /// some enabled joint action.
    pub fn validate(&self, m: &Icgs) -> Result<()> {
        for s in &self.0 {
            if s.0 >= m.state_count() {
                return Err(input(format!("history mentions unknown state index {}", s.0)));
            }
        }
        for w in self.0.windows(2) {
            if !m.successors(w[0]).any(|t| t == w[1]) {
                return Err(input(format!(
                    "no enabled joint action leads from `{}` to `{}`",
                    m.state_name(w[0]),
                    m.state_name(w[1])
                )));
            }
        }
        Ok(())
    }
}

/// A concurrent game structure with imperfect information.
#[derive(Debug, Clone, PartialEq)]
pub struct Icgs {
    agents: Vec<String>,
    atoms: Vec<String>,
    states: Vec<String>,
    initial: StateId,
    actions: Vec<Vec<String>>,
    /// `classes[agent][state]` is the equivalence class of `state` under the
    /// agent's indistinguishability relation. Class ids are numbered in order
    /// of first appearance.
    classes: Vec<Vec<usize>>,
    protocol: Vec<Vec<Vec<ActionId>>>,
    transitions: Vec<BTreeMap<JointAction, StateId>>,
    labels: Vec<BTreeSet<AtomId>>,
    state_index: HashMap<String, StateId>,
    atom_index: HashMap<String, AtomId>,
    agent_index: HashMap<String, AgentId>,
    action_index: Vec<HashMap<String, ActionId>>,
}

impl Icgs {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        agents: Vec<String>,
        atoms: Vec<String>,
        states: Vec<String>,
        initial: StateId,
        actions: Vec<Vec<String>>,
        classes: Vec<Vec<usize>>,
        protocol: Vec<Vec<Vec<ActionId>>>,
        transitions: Vec<BTreeMap<JointAction, StateId>>,
        labels: Vec<BTreeSet<AtomId>>,
    ) -> Self {
        let state_index = index_of(&states, StateId);
        let atom_index = index_of(&atoms, AtomId);
        let agent_index = index_of(&agents, AgentId);
        let action_index = actions.iter().map(|acts| index_of(acts, ActionId)).collect();
        let classes = classes.into_iter().map(|c| canonical_classes(&c)).collect();
        Self {
            agents,
            atoms,
            states,
            initial,
            actions,
            classes,
            protocol,
            transitions,
            labels,
            state_index,
            atom_index,
            agent_index,
            action_index,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn actions(&self, agent: AgentId) -> &[String] {
        &self.actions[agent.0]
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agents[a.0]
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn atom_name(&self, q: AtomId) -> &str {
        &self.atoms[q.0]
    }

    pub fn action_name(&self, agent: AgentId, act: ActionId) -> &str {
        &self.actions[agent.0][act.0]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atom_index.get(name).copied()
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agent_index.get(name).copied()
    }

    pub fn action_id(&self, agent: AgentId, name: &str) -> Option<ActionId> {
        self.action_index[agent.0].get(name).copied()
    }

    pub fn require_state(&self, name: &str) -> Result<StateId> {
        self.state_id(name).ok_or_else(|| input(format!("unknown state `{name}`")))
    }

    pub fn require_agent(&self, name: &str) -> Result<AgentId> {
        self.agent_id(name).ok_or_else(|| input(format!("unknown agent `{name}`")))
    }

    /// The actions agent `a` may take at `s`, sorted.
    pub fn protocol(&self, a: AgentId, s: StateId) -> &[ActionId] {
        &self.protocol[a.0][s.0]
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<AtomId> {
        &self.labels[s.0]
    }

    pub fn label_names(&self, s: StateId) -> BTreeSet<String> {
        self.labels[s.0].iter().map(|q| self.atoms[q.0].clone()).collect()
    }

    pub fn has_label(&self, s: StateId, q: AtomId) -> bool {
        self.labels[s.0].contains(&q)
    }

    /// All defined transitions leaving `s`. On a valid model these are
    /// exactly the enabled joint actions.
    pub fn transitions_from(&self, s: StateId) -> &BTreeMap<JointAction, StateId> {
        &self.transitions[s.0]
    }

    pub fn successors(&self, s: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.transitions[s.0].values().copied()
    }

    pub fn class_of(&self, a: AgentId, s: StateId) -> usize {
        self.classes[a.0][s.0]
    }

    pub fn indistinguishable(&self, a: AgentId, s: StateId, t: StateId) -> bool {
        self.classes[a.0][s.0] == self.classes[a.0][t.0]
    }

    /// Equivalence classes of agent `a`, each sorted, ordered by smallest member.
    pub fn equivalence_classes(&self, a: AgentId) -> Vec<Vec<StateId>> {
        let count = self.classes[a.0].iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (s, &c) in self.classes[a.0].iter().enumerate() {
            out[c].push(StateId(s));
        }
        out
    }

    /// True when the state is in a non-singleton class for at least one agent.
    pub fn is_confused(&self, s: StateId) -> bool {
        self.agent_ids().any(|a| {
            let c = self.class_of(a, s);
            self.classes[a.0].iter().enumerate().any(|(t, &ct)| ct == c && t != s.0)
        })
    }

    pub fn is_perfect_information(&self) -> bool {
        self.state_ids().all(|s| !self.is_confused(s))
    }

    /// `{ ā ∈ ACT | ∀i. ā_i ∈ d(i, s) }`, in lexicographic order.
    pub fn enabled_joint_actions(&self, s: StateId) -> Result<Vec<JointAction>> {
        if s.0 >= self.state_count() {
            return Err(input(format!("unknown state index {}", s.0)));
        }
        let per_agent: Vec<&[ActionId]> = self.agent_ids().map(|a| self.protocol(a, s)).collect();
        Ok(cartesian(&per_agent))
    }

    /// Every joint action in `ACT`, regardless of protocol.
    pub fn all_joint_actions(&self) -> Vec<JointAction> {
        let all: Vec<Vec<ActionId>> = self.actions.iter().map(|acts| (0..acts.len()).map(ActionId).collect()).collect();
        let refs: Vec<&[ActionId]> = all.iter().map(Vec::as_slice).collect();
        cartesian(&refs)
    }

    /// Applies `joint` at `s`.
    pub fn step(&self, s: StateId, joint: &JointAction) -> Result<StateId> {
        if s.0 >= self.state_count() {
            return Err(input(format!("unknown state index {}", s.0)));
        }
        if joint.0.len() != self.agent_count() {
            return Err(input(format!(
                "joint action has {} components, model has {} agents",
                joint.0.len(),
                self.agent_count()
            )));
        }
        for a in self.agent_ids() {
            let act = joint.get(a);
            if self.protocol(a, s).binary_search(&act).is_err() {
                let action = self.actions[a.0].get(act.0).cloned().unwrap_or_else(|| format!("#{}", act.0));
                return Err(Error::Protocol {
                    agent: self.agents[a.0].clone(),
                    state: self.states[s.0].clone(),
                    action,
                });
            }
        }
        self.transitions[s.0].get(joint).copied().ok_or_else(|| {
            Error::InvalidModel(format!(
                "no transition for enabled joint action {} at `{}`",
                self.format_joint(joint),
                self.states[s.0]
            ))
        })
    }

    /// Renders a joint action as `(a,b)` using action names.
    pub fn format_joint(&self, joint: &JointAction) -> String {
        let parts: Vec<&str> = self
            .agent_ids()
            .map(|a| self.actions[a.0].get(joint.get(a).0).map(String::as_str).unwrap_or("?"))
            .collect();
        format!("({})", parts.join(","))
    }

    /// Builds a joint action from `(agent, action)` name pairs.
    pub fn joint_from_names(&self, pairs: &[(&str, &str)]) -> Result<JointAction> {
        let mut acts = vec![None; self.agent_count()];
        for (agent, action) in pairs {
            let a = self.require_agent(agent)?;
            let act = self
                .action_id(a, action)
                .ok_or_else(|| input(format!("unknown action `{action}` for agent `{agent}`")))?;
            acts[a.0] = Some(act);
        }
        acts.into_iter()
            .enumerate()
            .map(|(i, act)| act.ok_or_else(|| input(format!("joint action misses agent `{}`", self.agents[i]))))
            .collect::<Result<Vec<_>>>()
            .map(JointAction)
    }

    /// Fraction of states that share a class with another state for at least
    /// one agent. Zero under perfect information.
    pub fn imperfect_information_degree(&self) -> f64 {
        let n = self.state_count();
        if n == 0 {
            return 0.0;
        }
        let confused = self.state_ids().filter(|&s| self.is_confused(s)).count();
        confused as f64 / n as f64
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.state_count()];
        let mut stack = vec![self.initial];
        seen[self.initial.0] = true;
        while let Some(s) = stack.pop() {
            for t in self.successors(s) {
                if !seen[t.0] {
                    seen[t.0] = true;
                    stack.push(t);
                }
            }
        }
        self.state_ids().filter(|s| seen[s.0]).collect()
    }

    /// Returns a copy with additional atoms and labels. Atoms already present
    /// are reused.
    pub fn with_extra_labels(&self, extra: &[(String, Vec<StateId>)]) -> Icgs {
        let mut atoms = self.atoms.clone();
        let mut labels = self.labels.clone();
        for (name, states) in extra {
            let id = match self.atom_index.get(name) {
                Some(id) => *id,
                None => match atoms.iter().position(|a| a == name) {
                    Some(i) => AtomId(i),
                    None => {
                        atoms.push(name.clone());
                        AtomId(atoms.len() - 1)
                    }
                },
            };
            for s in states {
                labels[s.0].insert(id);
            }
        }
        Icgs::from_parts(
            self.agents.clone(),
            atoms,
            self.states.clone(),
            self.initial,
            self.actions.clone(),
            self.classes.clone(),
            self.protocol.clone(),
            self.transitions.clone(),
            labels,
        )
    }

    /// Returns a fresh atom name derived from `base` that does not clash with
    /// any existing atom or with `taken`.
    pub fn fresh_atom_name(&self, base: &str, taken: &BTreeSet<String>) -> String {
        let clash = |n: &str| self.atom_index.contains_key(n) || taken.contains(n);
        if !clash(base) {
            return base.to_string();
        }
        (1..).map(|i| format!("{base}_{i}")).find(|n| !clash(n)).expect("unbounded suffix search")
    }

    pub(crate) fn raw_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }
}

/// Pointwise, synchronous indistinguishability of histories for one agent.
pub fn histories_indistinguishable(m: &Icgs, agent: AgentId, h1: &History, h2: &History) -> bool {
    h1.len() == h2.len() && h1.states().iter().zip(h2.states()).all(|(&s, &t)| m.indistinguishable(agent, s, t))
}

fn index_of<T: Copy>(names: &[String], wrap: fn(usize) -> T) -> HashMap<String, T> {
    names.iter().enumerate().map(|(i, n)| (n.clone(), wrap(i))).collect()
}

fn canonical_classes(raw: &[usize]) -> Vec<usize> {
    let mut remap = HashMap::new();
    raw.iter()
        .map(|c| {
            let next = remap.len();
            *remap.entry(*c).or_insert(next)
        })
        .collect()
}

fn cartesian(per_agent: &[&[ActionId]]) -> Vec<JointAction> {
    let mut out = vec![Vec::with_capacity(per_agent.len())];
    for options in per_agent {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &act in options.iter() {
                let mut v = prefix.clone();
                v.push(act);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(JointAction).collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root so class numbering is stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// `(from, [(agent, action)], to)` as given to [`IcgsBuilder::transition`].
type NamedTransition = (String, Vec<(String, String)>, String);

/// Incremental construction of an [`Icgs`] from names.
///
/// `build` fails only on dangling names. Semantic problems (non-uniform
/// protocols, missing transitions, ...) are left for [`validate_model`].
#[derive(Debug, Clone, Default)]
pub struct IcgsBuilder {
    agents: Vec<(String, Vec<String>)>,
    atoms: Vec<String>,
    states: Vec<String>,
    initial: Option<String>,
    indist: Vec<(String, Vec<String>)>,
    protocol: Vec<(String, String, Vec<String>)>,
    transitions: Vec<NamedTransition>,
    labels: Vec<(String, Vec<String>)>,
}

impl IcgsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn agent<I, S>(mut self, name: &str, actions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.agents.push((name.to_string(), actions.into_iter().map(Into::into).collect()));
        self
    }

    pub fn atoms<I, S>(mut self, atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.atoms.extend(atoms.into_iter().map(Into::into));
        self
    }

    pub fn states<I, S>(mut self, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.extend(states.into_iter().map(Into::into));
        self
    }

    pub fn initial(mut self, state: &str) -> Self {
        self.initial = Some(state.to_string());
        self
    }

    /// Declares a group of mutually indistinguishable states for `agent`.
    /// Groups are closed into a partition, so overlapping groups merge.
    pub fn indistinguishable<I, S>(mut self, agent: &str, group: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.indist.push((agent.to_string(), group.into_iter().map(Into::into).collect()));
        self
    }

    pub fn protocol<I, S>(mut self, agent: &str, state: &str, actions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.protocol.push((agent.to_string(), state.to_string(), actions.into_iter().map(Into::into).collect()));
        self
    }

    pub fn transition(mut self, from: &str, joint: &[(&str, &str)], to: &str) -> Self {
        self.transitions.push((
            from.to_string(),
            joint.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            to.to_string(),
        ));
        self
    }

    pub fn label<I, S>(mut self, state: &str, atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.labels.push((state.to_string(), atoms.into_iter().map(Into::into).collect()));
        self
    }

    pub fn build(self) -> Result<Icgs> {
        let agents: Vec<String> = self.agents.iter().map(|(n, _)| n.clone()).collect();
        let actions: Vec<Vec<String>> = self.agents.iter().map(|(_, a)| a.clone()).collect();
        check_unique("agent", &agents)?;
        check_unique("atom", &self.atoms)?;
        check_unique("state", &self.states)?;
        for (agent, acts) in &self.agents {
            check_unique(&format!("action of agent `{agent}`"), acts)?;
        }
        let state_index = index_of(&self.states, StateId);
        let atom_index = index_of(&self.atoms, AtomId);
        let agent_index = index_of(&agents, AgentId);
        let action_index: Vec<HashMap<String, ActionId>> = actions.iter().map(|a| index_of(a, ActionId)).collect();

        let state = |n: &str| state_index.get(n).copied().ok_or_else(|| input(format!("unknown state `{n}`")));
        let agent = |n: &str| agent_index.get(n).copied().ok_or_else(|| input(format!("unknown agent `{n}`")));
        let action = |a: AgentId, n: &str| {
            action_index[a.0]
                .get(n)
                .copied()
                .ok_or_else(|| input(format!("unknown action `{n}` for agent `{}`", agents[a.0])))
        };

        let initial_name = self.initial.as_deref().ok_or_else(|| input("no initial state given"))?;
        let initial = state(initial_name)?;

        let n = self.states.len();
        let mut finders: Vec<UnionFind> = agents.iter().map(|_| UnionFind::new(n)).collect();
        for (a, group) in &self.indist {
            let a = agent(a)?;
            let ids = group.iter().map(|s| state(s)).collect::<Result<Vec<_>>>()?;
            for w in ids.windows(2) {
                finders[a.0].union(w[0].0, w[1].0);
            }
        }
        let classes: Vec<Vec<usize>> = finders.iter_mut().map(|uf| (0..n).map(|s| uf.find(s)).collect()).collect();

        let mut protocol = vec![vec![Vec::new(); n]; agents.len()];
        for (a, s, acts) in &self.protocol {
            let a = agent(a)?;
            let s = state(s)?;
            let mut ids = acts.iter().map(|x| action(a, x)).collect::<Result<Vec<_>>>()?;
            ids.sort();
            ids.dedup();
            protocol[a.0][s.0] = ids;
        }

        let mut transitions = vec![BTreeMap::new(); n];
        for (from, joint, to) in &self.transitions {
            let from_id = state(from)?;
            let to_id = state(to)?;
            let mut acts = vec![None; agents.len()];
            for (a, x) in joint {
                let a = agent(a)?;
                acts[a.0] = Some(action(a, x)?);
            }
            let acts = acts
                .into_iter()
                .enumerate()
                .map(|(i, x)| {
                    x.ok_or_else(|| {
                        input(format!("transition from `{from}` misses an action for agent `{}`", agents[i]))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let joint = JointAction(acts);
            if let Some(prev) = transitions[from_id.0].insert(joint, to_id) {
                if prev != to_id {
                    return Err(input(format!("conflicting transitions from `{from}` for the same joint action")));
                }
            }
        }

        let mut labels = vec![BTreeSet::new(); n];
        for (s, atoms) in &self.labels {
            let s = state(s)?;
            for q in atoms {
                let q = atom_index.get(q).copied().ok_or_else(|| input(format!("unknown atom `{q}`")))?;
                labels[s.0].insert(q);
            }
        }

        Ok(Icgs::from_parts(agents, self.atoms, self.states, initial, actions, classes, protocol, transitions, labels))
    }
}

fn check_unique(what: &str, names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(input(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

impl fmt::Display for Icgs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iCGS({} agents, {} states, {} atoms)", self.agent_count(), self.state_count(), self.atoms.len())
    }
}
