//! ATL model checking under perfect information.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{input, Error, Result};
use crate::formula::{Coalition, Formula, FALSE, TRUE};
use crate::icgs::{AgentId, Icgs, StateId};

pub type StateSet = BTreeSet<StateId>;

/// Successors of every state, grouped by the coalition's part of the joint
/// action: `moves[s][g]` lists the possible targets once the coalition has
/// committed to its `g`-th choice at `s`.
#[derive(Debug, Clone)]
struct Moves {
    moves: Vec<Vec<Vec<StateId>>>,
}

impl Moves {
    fn new(m: &Icgs, coalition: &[AgentId]) -> Self {
        let moves = m
            .state_ids()
            .map(|s| {
                let mut groups: BTreeMap<Vec<usize>, Vec<StateId>> = BTreeMap::new();
                for (joint, &t) in m.transitions_from(s) {
                    let enabled = m.agent_ids().all(|a| m.protocol(a, s).contains(&joint.get(a)));
                    if !enabled {
                        continue;
                    }
                    let key = coalition.iter().map(|&a| joint.get(a).0).collect();
                    groups.entry(key).or_default().push(t);
                }
                groups.into_values().collect()
            })
            .collect();
        Self { moves }
    }

    /// Some coalition choice forces the next state into `q`.
    fn pre(&self, q: &[bool]) -> Vec<bool> {
        self.moves.iter().map(|groups| groups.iter().any(|g| g.iter().all(|t| q[t.0]))).collect()
    }

    /// Every coalition choice admits a next state in `q`.
    fn dual_pre(&self, q: &[bool]) -> Vec<bool> {
        self.moves.iter().map(|groups| groups.iter().all(|g| g.iter().any(|t| q[t.0]))).collect()
    }

    fn step(&self, universal: bool, q: &[bool]) -> Vec<bool> {
        if universal {
            self.dual_pre(q)
        } else {
            self.pre(q)
        }
    }
}

fn to_mask(m: &Icgs, set: &StateSet) -> Vec<bool> {
    let mut v = vec![false; m.state_count()];
    for s in set {
        if s.0 < v.len() {
            v[s.0] = true;
        }
    }
    v
}

fn to_set(mask: &[bool]) -> StateSet {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| StateId(i)).collect()
}

fn resolve(m: &Icgs, c: &Coalition) -> Result<Vec<AgentId>> {
    c.iter().map(|a| m.require_agent(a)).collect()
}

/// `{ s | some coalition action at s forces the successor into targets }`.
pub fn coalition_pre(m: &Icgs, coalition: &Coalition, targets: &StateSet) -> Result<StateSet> {
    let moves = Moves::new(m, &resolve(m, coalition)?);
    Ok(to_set(&moves.pre(&to_mask(m, targets))))
}

/// `{ s | every coalition action at s admits a successor in targets }`.
pub fn dual_pre(m: &Icgs, coalition: &Coalition, targets: &StateSet) -> Result<StateSet> {
    let moves = Moves::new(m, &resolve(m, coalition)?);
    Ok(to_set(&moves.dual_pre(&to_mask(m, targets))))
}

/// Approximants of `a U b`, starting from the empty set, until stable.
/// `universal` selects the `[[Γ]]` reading.
pub fn until_iterates(
    m: &Icgs,
    coalition: &Coalition,
    universal: bool,
    a: &StateSet,
    b: &StateSet,
) -> Result<Vec<StateSet>> {
    let moves = Moves::new(m, &resolve(m, coalition)?);
    let chain = until_chain(&moves, universal, &to_mask(m, a), &to_mask(m, b));
    Ok(chain.iter().map(|z| to_set(z)).collect())
}

/// Approximants of `a R b`, starting from all states, until stable.
pub fn release_iterates(
    m: &Icgs,
    coalition: &Coalition,
    universal: bool,
    a: &StateSet,
    b: &StateSet,
) -> Result<Vec<StateSet>> {
    let moves = Moves::new(m, &resolve(m, coalition)?);
    let chain = release_chain(&moves, universal, &to_mask(m, a), &to_mask(m, b));
    Ok(chain.iter().map(|z| to_set(z)).collect())
}

fn until_chain(moves: &Moves, universal: bool, a: &[bool], b: &[bool]) -> Vec<Vec<bool>> {
    let mut z = vec![false; a.len()];
    let mut chain = vec![z.clone()];
    loop {
        let p = moves.step(universal, &z);
        let next: Vec<bool> = (0..z.len()).map(|i| b[i] || (a[i] && p[i])).collect();
        if next == z {
            return chain;
        }
        chain.push(next.clone());
        z = next;
    }
}

fn release_chain(moves: &Moves, universal: bool, a: &[bool], b: &[bool]) -> Vec<Vec<bool>> {
    let mut z = vec![true; a.len()];
    let mut chain = vec![z.clone()];
    loop {
        let p = moves.step(universal, &z);
        let next: Vec<bool> = (0..z.len()).map(|i| b[i] && (a[i] || p[i])).collect();
        if next == z {
            return chain;
        }
        chain.push(next.clone());
        z = next;
    }
}

/// States satisfying an ATL formula on a perfect-information model.
///
/// Negation is accepted in front of state formulas; the temporal operators
/// must sit directly under a quantifier.
pub fn check_atl(m: &Icgs, f: &Formula) -> Result<StateSet> {
    if !m.is_perfect_information() {
        return Err(input("fixpoint checking needs a perfect-information model"));
    }
    let mut cache = BTreeMap::new();
    Ok(to_set(&eval(m, f, &mut cache)?))
}

fn eval(m: &Icgs, f: &Formula, cache: &mut BTreeMap<Vec<AgentId>, Moves>) -> Result<Vec<bool>> {
    let n = m.state_count();
    match f {
        Formula::Atom(a) if a == TRUE => Ok(vec![true; n]),
        Formula::Atom(a) if a == FALSE => Ok(vec![false; n]),
        Formula::Atom(a) => {
            let q = m.atom_id(a).ok_or_else(|| input(format!("formula mentions unknown atom `{a}`")))?;
            Ok(m.state_ids().map(|s| m.has_label(s, q)).collect())
        }
        Formula::Not(a) => Ok(eval(m, a, cache)?.into_iter().map(|b| !b).collect()),
        Formula::And(a, b) => {
            let (x, y) = (eval(m, a, cache)?, eval(m, b, cache)?);
            Ok(x.iter().zip(&y).map(|(p, q)| *p && *q).collect())
        }
        Formula::Or(a, b) => {
            let (x, y) = (eval(m, a, cache)?, eval(m, b, cache)?);
            Ok(x.iter().zip(&y).map(|(p, q)| *p || *q).collect())
        }
        Formula::Exists(c, body) | Formula::ForAll(c, body) => {
            let universal = matches!(f, Formula::ForAll(..));
            let agents = resolve(m, c)?;
            let operands: Vec<Vec<bool>> = match &**body {
                Formula::Next(a) => vec![eval(m, a, cache)?],
                Formula::Until(a, b) | Formula::Release(a, b) => {
                    vec![eval(m, a, cache)?, eval(m, b, cache)?]
                }
                _ => return Err(outside_fragment(f)),
            };
            let moves = cache.entry(agents.clone()).or_insert_with(|| Moves::new(m, &agents));
            Ok(match &**body {
                Formula::Next(_) => moves.step(universal, &operands[0]),
                Formula::Until(..) => {
                    until_chain(moves, universal, &operands[0], &operands[1]).pop().expect("chain is nonempty")
                }
                _ => release_chain(moves, universal, &operands[0], &operands[1]).pop().expect("chain is nonempty"),
            })
        }
        Formula::Next(_) | Formula::Until(..) | Formula::Release(..) => Err(outside_fragment(f)),
    }
}

fn outside_fragment(f: &Formula) -> Error {
    Error::Fragment(format!("`{f}` is not an ATL state formula"))
}
