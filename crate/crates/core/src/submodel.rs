//! Perfect-information sub-models.
//!
//! A core `S*` containing the initial state is cut out of the model; every
//! transition leaving the core is redirected to an absorbing sink. The
//! negative sink satisfies no atom, the positive sink satisfies all of them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{input, Result};
use crate::icgs::{ActionId, AtomId, Icgs, JointAction, StateId};

pub const NEGATIVE_SINK: &str = "s_bot";
pub const POSITIVE_SINK: &str = "s_top";
pub const DEFAULT_LIMIT: usize = 256;

/// Upper bound on search steps in [`find_submodels`].
const NODE_BUDGET: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sink {
    Negative,
    Positive,
}

/// A core together with its negative and positive sub-models.
///
/// State `i` of either sub-model is `core[i]` of the original; the sink is
/// state `core.len()`.
#[derive(Debug, Clone)]
pub struct SubmodelPair {
    pub core: Vec<StateId>,
    pub negative: Icgs,
    pub positive: Icgs,
}

impl SubmodelPair {
    pub fn new(m: &Icgs, core: &BTreeSet<StateId>) -> Result<Self> {
        Ok(Self {
            core: core.iter().copied().collect(),
            negative: build_negative(m, core)?,
            positive: build_positive(m, core)?,
        })
    }

    pub fn sink(&self) -> StateId {
        StateId(self.core.len())
    }

    /// Original state behind a sub-model state, `None` for the sink.
    pub fn original(&self, sub: StateId) -> Option<StateId> {
        self.core.get(sub.0).copied()
    }

    /// Sub-model state of an original state, if it is in the core.
    pub fn local(&self, s: StateId) -> Option<StateId> {
        self.core.binary_search(&s).ok().map(StateId)
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.local(s).is_some()
    }

    pub fn sidecar(&self, m: &Icgs) -> CoreSidecar {
        CoreSidecar {
            core_states: self.core.iter().map(|&s| m.state_name(s).to_string()).collect(),
            negative_sink: self.negative.state_name(self.sink()).to_string(),
            positive_sink: self.positive.state_name(self.sink()).to_string(),
        }
    }
}

/// Names of the core states, written next to exported sub-models.
#[derive(Debug, Clone, Serialize)]
pub struct CoreSidecar {
    pub core_states: Vec<String>,
    pub negative_sink: String,
    pub positive_sink: String,
}

pub fn build_negative(m: &Icgs, core: &BTreeSet<StateId>) -> Result<Icgs> {
    build(m, core, Sink::Negative)
}

pub fn build_positive(m: &Icgs, core: &BTreeSet<StateId>) -> Result<Icgs> {
    build(m, core, Sink::Positive)
}

fn build(m: &Icgs, core: &BTreeSet<StateId>, sink: Sink) -> Result<Icgs> {
    if !core.contains(&m.initial()) {
        return Err(input(format!("core must contain the initial state `{}`", m.state_name(m.initial()))));
    }
    if let Some(bad) = core.iter().find(|s| s.0 >= m.state_count()) {
        return Err(input(format!("unknown state index {}", bad.0)));
    }
    let core: Vec<StateId> = core.iter().copied().collect();
    let sink_id = StateId(core.len());
    let local: BTreeMap<StateId, StateId> = core.iter().enumerate().map(|(i, &s)| (s, StateId(i))).collect();

    let base = match sink {
        Sink::Negative => NEGATIVE_SINK,
        Sink::Positive => POSITIVE_SINK,
    };
    let sink_name = unique_state_name(m, base);
    let mut states: Vec<String> = core.iter().map(|&s| m.state_name(s).to_string()).collect();
    states.push(sink_name);

    let classes: Vec<Vec<usize>> = m
        .raw_classes()
        .iter()
        .map(|per_state| {
            let mut c: Vec<usize> = core.iter().map(|s| per_state[s.0]).collect();
            c.push(usize::MAX);
            c
        })
        .collect();

    let protocol: Vec<Vec<Vec<ActionId>>> = m
        .agent_ids()
        .map(|a| {
            let mut p: Vec<Vec<ActionId>> = core.iter().map(|&s| m.protocol(a, s).to_vec()).collect();
            p.push((0..m.actions(a).len()).map(ActionId).collect());
            p
        })
        .collect();

    let mut transitions: Vec<BTreeMap<JointAction, StateId>> = core
        .iter()
        .map(|&s| {
            m.transitions_from(s).iter().map(|(j, t)| (j.clone(), local.get(t).copied().unwrap_or(sink_id))).collect()
        })
        .collect();
    transitions.push(m.all_joint_actions().into_iter().map(|j| (j, sink_id)).collect());

    let mut labels: Vec<BTreeSet<AtomId>> = core.iter().map(|&s| m.labels(s).clone()).collect();
    labels.push(match sink {
        Sink::Negative => BTreeSet::new(),
        Sink::Positive => (0..m.atoms().len()).map(AtomId).collect(),
    });

    Ok(Icgs::from_parts(
        m.agents().to_vec(),
        m.atoms().to_vec(),
        states,
        local[&m.initial()],
        m.agent_ids().map(|a| m.actions(a).to_vec()).collect(),
        classes,
        protocol,
        transitions,
        labels,
    ))
}

fn unique_state_name(m: &Icgs, base: &str) -> String {
    if m.state_id(base).is_none() {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}_{i}")).find(|n| m.state_id(n).is_none()).expect("unbounded suffix search")
}

/// Enumerates maximal perfect-information cores.
///
/// A core contains the initial state, is connected from it, contains no two
/// states any agent confuses, and cannot be extended by a successor state
/// without breaking that. Confused frontier states are branched on in
/// discovery order, keeping them first, so the first candidate is the greedy
/// one. At most `limit` candidates are returned.
pub fn find_submodels(m: &Icgs, limit: usize) -> Result<Vec<SubmodelPair>> {
    find_cores(m, limit)?.iter().map(|core| SubmodelPair::new(m, core)).collect()
}

/// The cores behind [`find_submodels`].
pub fn find_cores(m: &Icgs, limit: usize) -> Result<Vec<BTreeSet<StateId>>> {
    if limit == 0 {
        return Err(input("candidate limit must be at least 1"));
    }
    let class_counts: Vec<usize> = m.agent_ids().map(|a| m.equivalence_classes(a).len()).collect();
    let confused: Vec<bool> = m.state_ids().map(|s| m.is_confused(s)).collect();
    let succ: Vec<Vec<StateId>> = m
        .state_ids()
        .map(|s| {
            let set: BTreeSet<StateId> = m.successors(s).collect();
            set.into_iter().collect()
        })
        .collect();
    let mut search = Search { m, confused, succ, limit, steps: 0, out: Vec::new() };
    let n = m.state_count();
    let mut root = Node {
        in_core: vec![false; n],
        excluded: vec![false; n],
        seen: vec![false; n],
        occupied: class_counts.iter().map(|&c| vec![false; c]).collect(),
        queue: VecDeque::new(),
    };
    search.include(&mut root, m.initial());
    search.explore(root);
    Ok(search.out)
}

#[derive(Clone)]
struct Node {
    in_core: Vec<bool>,
    excluded: Vec<bool>,
    seen: Vec<bool>,
    /// `occupied[agent][class]`: some core state lies in that class.
    occupied: Vec<Vec<bool>>,
    queue: VecDeque<StateId>,
}

struct Search<'a> {
    m: &'a Icgs,
    confused: Vec<bool>,
    succ: Vec<Vec<StateId>>,
    limit: usize,
    steps: usize,
    out: Vec<BTreeSet<StateId>>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.out.len() >= self.limit || self.steps >= NODE_BUDGET
    }

    fn conflicts(&self, node: &Node, t: StateId) -> bool {
        self.m.agent_ids().any(|a| node.occupied[a.0][self.m.class_of(a, t)])
    }

    fn include(&self, node: &mut Node, s: StateId) {
        node.in_core[s.0] = true;
        node.seen[s.0] = true;
        for a in self.m.agent_ids() {
            node.occupied[a.0][self.m.class_of(a, s)] = true;
        }
        for &t in &self.succ[s.0] {
            if !node.seen[t.0] {
                node.seen[t.0] = true;
                node.queue.push_back(t);
            }
        }
    }

    fn explore(&mut self, mut node: Node) {
        while let Some(t) = node.queue.pop_front() {
            if self.done() {
                return;
            }
            self.steps += 1;
            if self.conflicts(&node, t) {
                node.excluded[t.0] = true;
            } else if !self.confused[t.0] {
                self.include(&mut node, t);
            } else {
                let mut with = node.clone();
                self.include(&mut with, t);
                self.explore(with);
                node.excluded[t.0] = true;
            }
        }
        if self.done() {
            return;
        }
        let maximal = self.m.state_ids().filter(|t| node.excluded[t.0]).all(|t| self.conflicts(&node, t));
        if maximal {
            self.out.push(self.m.state_ids().filter(|s| node.in_core[s.0]).collect());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icgs::fixtures;
    use crate::icgs::{validate_model, IcgsBuilder};

    fn set(ids: &[usize]) -> BTreeSet<StateId> {
        ids.iter().map(|&i| StateId(i)).collect()
    }

    #[test]
    fn chain_cut_redirects_to_sink() {
        let m = fixtures::chain();
        let neg = build_negative(&m, &set(&[0])).unwrap();
        assert_eq!(neg.state_count(), 2);
        assert_eq!(neg.state_name(StateId(1)), NEGATIVE_SINK);
        assert_eq!(neg.successors(StateId(0)).collect::<Vec<_>>(), [StateId(1)]);
        assert!(neg.labels(StateId(1)).is_empty());
        for j in neg.all_joint_actions() {
            assert_eq!(neg.step(StateId(1), &j).unwrap(), StateId(1));
        }
        assert!(validate_model(&neg).is_valid());

        let pos = build_positive(&m, &set(&[0])).unwrap();
        assert_eq!(pos.state_name(StateId(1)), POSITIVE_SINK);
        assert_eq!(pos.labels(StateId(1)).len(), m.atoms().len());
        assert!(validate_model(&pos).is_valid());
    }

    #[test]
    fn full_core_adds_unreachable_sink() {
        let m = fixtures::chain();
        let neg = build_negative(&m, &set(&[0, 1])).unwrap();
        assert_eq!(neg.state_count(), 3);
        assert_eq!(neg.reachable(), [StateId(0), StateId(1)]);
    }

    #[test]
    fn core_without_initial_state_is_rejected() {
        let m = fixtures::chain();
        assert!(build_negative(&m, &set(&[1])).is_err());
        assert!(build_positive(&m, &set(&[1])).is_err());
    }

    #[test]
    fn zero_limit_is_rejected() {
        assert!(find_submodels(&fixtures::chain(), 0).is_err());
    }

    #[test]
    fn perfect_information_gives_one_candidate() {
        let m = fixtures::chain();
        let c = find_cores(&m, 1).unwrap();
        assert_eq!(c, vec![set(&[0, 1])]);
    }

    #[test]
    fn sink_name_avoids_clash() {
        let m = IcgsBuilder::new()
            .agent("1", ["a"])
            .states(["s_bot", "x"])
            .initial("s_bot")
            .protocol("1", "s_bot", ["a"])
            .protocol("1", "x", ["a"])
            .transition("s_bot", &[("1", "a")], "x")
            .transition("x", &[("1", "a")], "x")
            .build()
            .unwrap();
        let neg = build_negative(&m, &set(&[0])).unwrap();
        assert_eq!(neg.state_name(StateId(1)), "s_bot_1");
    }
}
