//! Reference evaluator for ATL by exhaustive strategy enumeration.
//!
//! Every uniform strategy profile of the coalition is tried and every
//! outcome path walked, so this only scales to tiny models. Used as a
//! yardstick for the fixpoint checker and the pipeline.

use std::collections::{BTreeSet, HashMap};

use crate::atl::StateSet;
use crate::error::{input, Error, Result};
use crate::formula::{Coalition, Formula, FALSE, TRUE};
use crate::icgs::{ActionId, AgentId, Icgs, JointAction, StateId};

pub const MAX_STATES: usize = 8;
pub const MAX_AGENTS: usize = 2;
pub const MAX_ACTIONS: usize = 3;
const MAX_PROFILES: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recall {
    /// Strategies see the current state only.
    Memoryless,
    /// Strategies see the last `k` states of the history.
    Bounded(usize),
    /// Full histories. Only supported where memoryless witnesses are
    /// complete: perfect-information models, or formulas whose coalitions
    /// are all empty or all agents.
    Perfect,
}

pub fn oracle_evaluate(m: &Icgs, f: &Formula, s: StateId, recall: Recall) -> Result<bool> {
    if s.0 >= m.state_count() {
        return Err(input(format!("unknown state index {}", s.0)));
    }
    Ok(oracle_states(m, f, recall)?.contains(&s))
}

pub fn oracle_states(m: &Icgs, f: &Formula, recall: Recall) -> Result<StateSet> {
    if m.state_count() > MAX_STATES || m.agent_count() > MAX_AGENTS {
        return Err(Error::OracleScale(format!(
            "{} states and {} agents exceed the oracle bounds",
            m.state_count(),
            m.agent_count()
        )));
    }
    if let Some(a) = m.agent_ids().find(|&a| m.actions(a).len() > MAX_ACTIONS) {
        return Err(Error::OracleScale(format!("agent `{}` has more than {MAX_ACTIONS} actions", m.agent_name(a))));
    }
    let (window, uniform) = match recall {
        Recall::Memoryless => (1, true),
        Recall::Bounded(0) => return Err(input("recall bound must be at least 1")),
        Recall::Bounded(k) => (k, true),
        Recall::Perfect => {
            let agents = f.agents();
            let grand = Coalition::all(m);
            let trivial = all_coalitions(f).iter().all(|c| c.is_empty() || *c == grand);
            if !(m.is_perfect_information() || trivial) || agents.iter().any(|a| m.agent_id(a).is_none()) {
                return Err(input("perfect-recall oracle needs perfect information or only empty/grand coalitions"));
            }
            (1, false)
        }
    };
    let ev = Evaluator { m, window, uniform };
    let mask = ev.eval(f)?;
    Ok(m.state_ids().filter(|s| mask[s.0]).collect())
}

fn all_coalitions(f: &Formula) -> Vec<Coalition> {
    let mut out = Vec::new();
    fn go(f: &Formula, out: &mut Vec<Coalition>) {
        if let Formula::Exists(c, _) | Formula::ForAll(c, _) = f {
            out.push(c.clone());
        }
        f.children().into_iter().for_each(|c| go(c, out));
    }
    go(f, &mut out);
    out
}

#[derive(Clone, Copy)]
enum PathOp<'a> {
    Next(&'a [bool]),
    Until(&'a [bool], &'a [bool]),
    Release(&'a [bool], &'a [bool]),
}

struct Evaluator<'a> {
    m: &'a Icgs,
    window: usize,
    uniform: bool,
}

/// Histories reachable from one state, cut down to the recall window.
struct Arena {
    nodes: Vec<Vec<StateId>>,
    /// `edges[node]`: `(joint action, successor node)`.
    edges: Vec<Vec<(JointAction, usize)>>,
}

impl Evaluator<'_> {
    fn eval(&self, f: &Formula) -> Result<Vec<bool>> {
        let m = self.m;
        let n = m.state_count();
        match f {
            Formula::Atom(a) if a == TRUE => Ok(vec![true; n]),
            Formula::Atom(a) if a == FALSE => Ok(vec![false; n]),
            Formula::Atom(a) => {
                let q = m.atom_id(a).ok_or_else(|| input(format!("formula mentions unknown atom `{a}`")))?;
                Ok(m.state_ids().map(|s| m.has_label(s, q)).collect())
            }
            Formula::Not(a) => Ok(self.eval(a)?.into_iter().map(|b| !b).collect()),
            Formula::And(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                Ok(x.iter().zip(&y).map(|(p, q)| *p && *q).collect())
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                Ok(x.iter().zip(&y).map(|(p, q)| *p || *q).collect())
            }
            Formula::Exists(c, body) | Formula::ForAll(c, body) => {
                let universal = matches!(f, Formula::ForAll(..));
                let agents: Vec<AgentId> = c.iter().map(|a| m.require_agent(a)).collect::<Result<_>>()?;
                let (x, y) = match &**body {
                    Formula::Next(a) => (self.eval(a)?, Vec::new()),
                    Formula::Until(a, b) | Formula::Release(a, b) => (self.eval(a)?, self.eval(b)?),
                    _ => return Err(Error::Fragment(format!("`{f}` is outside the ATL fragment"))),
                };
                let (nx, ny): (Vec<bool>, Vec<bool>) = (x.iter().map(|b| !b).collect(), y.iter().map(|b| !b).collect());
                let (op, dual) = match &**body {
                    Formula::Next(_) => (PathOp::Next(&x), PathOp::Next(&nx)),
                    Formula::Until(..) => (PathOp::Until(&x, &y), PathOp::Release(&nx, &ny)),
                    _ => (PathOp::Release(&x, &y), PathOp::Until(&nx, &ny)),
                };
                m.state_ids()
                    .map(|s| {
                        if universal {
                            // [[Γ]]ψ: no profile forces ¬ψ on all outcomes.
                            Ok(!self.some_profile_forces(s, &agents, dual)?)
                        } else {
                            self.some_profile_forces(s, &agents, op)
                        }
                    })
                    .collect()
            }
            Formula::Next(_) | Formula::Until(..) | Formula::Release(..) => {
                Err(Error::Fragment(format!("`{f}` is not a state formula")))
            }
        }
    }

    fn arena(&self, s: StateId) -> Arena {
        let m = self.m;
        let mut index: HashMap<Vec<StateId>, usize> = HashMap::new();
        let mut nodes = vec![vec![s]];
        index.insert(vec![s], 0);
        let mut edges: Vec<Vec<(JointAction, usize)>> = vec![Vec::new()];
        let mut i = 0;
        while i < nodes.len() {
            let last = *nodes[i].last().expect("windows are nonempty");
            let mut out = Vec::new();
            for joint in m.enabled_joint_actions(last).expect("state in range") {
                let Some(&t) = m.transitions_from(last).get(&joint) else { continue };
                let mut w = nodes[i].clone();
                w.push(t);
                if w.len() > self.window {
                    w.remove(0);
                }
                let id = *index.entry(w.clone()).or_insert_with(|| {
                    nodes.push(w);
                    edges.push(Vec::new());
                    nodes.len() - 1
                });
                out.push((joint, id));
            }
            edges[i] = out;
            i += 1;
        }
        Arena { nodes, edges }
    }

    /// What agent `a` can tell apart about a window.
    fn observation(&self, a: AgentId, w: &[StateId]) -> Vec<usize> {
        if self.uniform {
            w.iter().map(|&s| self.m.class_of(a, s)).collect()
        } else {
            w.iter().map(|s| s.0).collect()
        }
    }

    fn some_profile_forces(&self, s: StateId, agents: &[AgentId], op: PathOp<'_>) -> Result<bool> {
        let m = self.m;
        let arena = self.arena(s);

        // One decision slot per (agent, observation); the options are the
        // actions enabled at every state sharing that observation.
        let mut slot_of: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut options: Vec<Vec<ActionId>> = Vec::new();
        let mut node_slot: Vec<Vec<usize>> = vec![Vec::new(); arena.nodes.len()];
        for (ni, w) in arena.nodes.iter().enumerate() {
            let last = *w.last().expect("windows are nonempty");
            for (k, &a) in agents.iter().enumerate() {
                let key = (k, self.observation(a, w));
                let enabled: BTreeSet<ActionId> = m.protocol(a, last).iter().copied().collect();
                let slot = *slot_of.entry(key).or_insert_with(|| {
                    options.push(enabled.iter().copied().collect());
                    options.len() - 1
                });
                options[slot].retain(|x| enabled.contains(x));
                node_slot[ni].push(slot);
            }
        }
        if options.iter().any(Vec::is_empty) {
            return Ok(false);
        }
        let total: u128 = options.iter().map(|o| o.len() as u128).product();
        if total > MAX_PROFILES {
            return Err(Error::OracleScale(format!("{total} strategy profiles to enumerate")));
        }

        let mut choice = vec![0usize; options.len()];
        let labels: Vec<StateId> = arena.nodes.iter().map(|w| *w.last().unwrap()).collect();
        loop {
            let succ: Vec<Vec<usize>> = arena
                .edges
                .iter()
                .enumerate()
                .map(|(ni, out)| {
                    out.iter()
                        .filter(|(joint, _)| {
                            agents
                                .iter()
                                .enumerate()
                                .all(|(k, &a)| joint.get(a) == options[node_slot[ni][k]][choice[node_slot[ni][k]]])
                        })
                        .map(|&(_, t)| t)
                        .collect()
                })
                .collect();
            if all_paths(&succ, &labels, op) {
                return Ok(true);
            }
            // Mixed-radix increment over the slots.
            let mut i = 0;
            loop {
                if i == choice.len() {
                    return Ok(false);
                }
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
}

/// Every path from node 0 satisfies `op`, walking each simple lasso.
fn all_paths(succ: &[Vec<usize>], labels: &[StateId], op: PathOp<'_>) -> bool {
    let at = |set: &[bool], node: usize| set[labels[node].0];
    match op {
        PathOp::Next(a) => succ[0].iter().all(|&t| at(a, t)),
        PathOp::Until(a, b) => {
            fn walk(n: usize, succ: &[Vec<usize>], on: &mut [bool], ok: &dyn Fn(usize) -> Option<bool>) -> bool {
                if let Some(v) = ok(n) {
                    return v;
                }
                if on[n] {
                    return false;
                }
                on[n] = true;
                let r = succ[n].iter().all(|&t| walk(t, succ, on, ok));
                on[n] = false;
                r
            }
            let ok = |n: usize| {
                if at(b, n) {
                    Some(true)
                } else if !at(a, n) {
                    Some(false)
                } else {
                    None
                }
            };
            walk(0, succ, &mut vec![false; succ.len()], &ok)
        }
        PathOp::Release(a, b) => {
            fn walk(n: usize, succ: &[Vec<usize>], on: &mut [bool], ok: &dyn Fn(usize) -> Option<bool>) -> bool {
                if let Some(v) = ok(n) {
                    return v;
                }
                if on[n] {
                    return true;
                }
                on[n] = true;
                let r = succ[n].iter().all(|&t| walk(t, succ, on, ok));
                on[n] = false;
                r
            }
            let ok = |n: usize| {
                if !at(b, n) {
                    Some(false)
                } else if at(a, n) {
                    Some(true)
                } else {
                    None
                }
            };
            walk(0, succ, &mut vec![false; succ.len()], &ok)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::icgs::{fixtures, IcgsBuilder};

    /// The environment (agent 2) sends s0 to s1 or s2, which agent 1
    /// confuses. Reaching `g` needs `a` at s1 but `b` at s2.
    fn confusing() -> Icgs {
        let mut b = IcgsBuilder::new()
            .agent("1", ["a", "b"])
            .agent("2", ["l", "r"])
            .atoms(["g"])
            .states(["s0", "s1", "s2", "g", "bad"])
            .initial("s0")
            .indistinguishable("1", ["s1", "s2"])
            .label("g", ["g"]);
        for s in ["s0", "s1", "s2", "g", "bad"] {
            b = b.protocol("1", s, ["a", "b"]).protocol("2", s, ["l", "r"]);
        }
        for x in ["a", "b"] {
            for y in ["l", "r"] {
                let j = [("1", x), ("2", y)];
                b = b
                    .transition("s0", &j, if y == "l" { "s1" } else { "s2" })
                    .transition("s1", &j, if x == "a" { "g" } else { "bad" })
                    .transition("s2", &j, if x == "b" { "g" } else { "bad" })
                    .transition("g", &j, "g")
                    .transition("bad", &j, "bad");
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn deterministic_path_under_empty_coalition() {
        let m = fixtures::chain();
        let f = parse("<<>> X p").unwrap();
        assert!(oracle_evaluate(&m, &f, StateId(0), Recall::Memoryless).unwrap());
        let g = parse("<<>> G p").unwrap();
        assert!(!oracle_evaluate(&m, &g, StateId(0), Recall::Memoryless).unwrap());
    }

    #[test]
    fn uniformity_matters() {
        let m = confusing();
        let reach = parse("<<1>> F g").unwrap();
        assert_eq!(
            oracle_states(&m, &reach, Recall::Memoryless).unwrap(),
            [1, 2, 3].map(StateId).into_iter().collect()
        );
        assert!(!oracle_evaluate(&m, &reach, StateId(0), Recall::Bounded(2)).unwrap());
        // Nested quantifiers restart the strategy, so the class is no obstacle.
        let nested = parse("<<1>> X <<1>> F g").unwrap();
        assert!(oracle_evaluate(&m, &nested, StateId(0), Recall::Memoryless).unwrap());
        let grand = parse("<<1,2>> F g").unwrap();
        assert!(oracle_evaluate(&m, &grand, StateId(0), Recall::Perfect).unwrap());
        let dual = parse("[[1]] G !g").unwrap();
        assert!(oracle_evaluate(&m, &dual, StateId(0), Recall::Memoryless).unwrap());
    }

    #[test]
    fn perfect_recall_guard() {
        let m = confusing();
        assert!(oracle_states(&m, &parse("<<1>> F g").unwrap(), Recall::Perfect).is_err());
        assert!(oracle_states(&m, &parse("<<>> F g").unwrap(), Recall::Perfect).is_ok());
        let chain = fixtures::chain();
        assert!(oracle_states(&chain, &parse("<<1>> F p").unwrap(), Recall::Perfect).is_ok());
    }

    #[test]
    fn scale_guard() {
        let mut b = IcgsBuilder::new().agent("1", ["a"]);
        let names: Vec<String> = (0..9).map(|i| format!("s{i}")).collect();
        b = b.states(names.iter().map(String::as_str)).initial("s0");
        for s in &names {
            b = b.protocol("1", s, ["a"]).transition(s, &[("1", "a")], s);
        }
        let m = b.build().unwrap();
        assert!(matches!(
            oracle_states(&m, &parse("<<1>> X true").unwrap(), Recall::Memoryless),
            Err(Error::OracleScale(_))
        ));
    }
}
