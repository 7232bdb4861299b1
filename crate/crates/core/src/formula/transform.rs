use std::collections::{BTreeSet, HashSet};

use super::{Coalition, Formula, FALSE, TRUE};
use crate::error::{input, Result};
use crate::icgs::{Icgs, StateId};

/// Pushes negations down to atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (Formula::Atom(a), false) => Formula::Atom(a.clone()),
        (Formula::Atom(a), true) if a == TRUE => Formula::ff(),
        (Formula::Atom(a), true) if a == FALSE => Formula::tt(),
        (Formula::Atom(a), true) => Formula::not(Formula::Atom(a.clone())),
        (Formula::Not(inner), _) => nnf(inner, !neg),
        (Formula::And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (Formula::And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Formula::Next(a), _) => Formula::next(nnf(a, neg)),
        (Formula::Until(a, b), false) => Formula::until(nnf(a, false), nnf(b, false)),
        (Formula::Until(a, b), true) => Formula::release(nnf(a, true), nnf(b, true)),
        (Formula::Release(a, b), false) => Formula::release(nnf(a, false), nnf(b, false)),
        (Formula::Release(a, b), true) => Formula::until(nnf(a, true), nnf(b, true)),
        (Formula::Exists(c, body), false) => Formula::exists(c.clone(), nnf(body, false)),
        (Formula::Exists(c, body), true) => Formula::forall(c.clone(), nnf(body, true)),
        (Formula::ForAll(c, body), false) => Formula::forall(c.clone(), nnf(body, false)),
        (Formula::ForAll(c, body), true) => Formula::exists(c.clone(), nnf(body, true)),
    }
}

/// Result of replacing negated atoms by fresh positive ones.
#[derive(Debug, Clone)]
pub struct NegationElimination {
    pub model: Icgs,
    pub formula: Formula,
    /// `(q, not_q)` pairs in order of introduction.
    pub introduced: Vec<(String, String)>,
}

/// Replaces every `!q` in an NNF formula by a fresh atom labeled on exactly
/// the states where `q` is false.
pub fn eliminate_negated_atoms(m: &Icgs, f: &Formula) -> Result<NegationElimination> {
    let f = to_nnf(f);
    let mut negated = BTreeSet::new();
    collect_negated(&f, &mut negated);

    let mut taken = BTreeSet::new();
    let mut introduced = Vec::new();
    let mut extra = Vec::new();
    for q in &negated {
        let qid = m.atom_id(q).ok_or_else(|| input(format!("formula mentions unknown atom `{q}`")))?;
        let name = m.fresh_atom_name(&format!("not_{q}"), &taken);
        taken.insert(name.clone());
        let states: Vec<StateId> = m.state_ids().filter(|&s| !m.has_label(s, qid)).collect();
        extra.push((name.clone(), states));
        introduced.push((q.clone(), name));
    }
    let formula = substitute_negations(&f, &introduced);
    Ok(NegationElimination { model: m.with_extra_labels(&extra), formula, introduced })
}

fn collect_negated(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Not(inner) => {
            if let Formula::Atom(q) = &**inner {
                out.insert(q.clone());
            }
        }
        other => other.children().into_iter().for_each(|c| collect_negated(c, out)),
    }
}

fn substitute_negations(f: &Formula, map: &[(String, String)]) -> Formula {
    map_nodes(f, &mut |node| match node {
        Formula::Not(inner) => match &**inner {
            Formula::Atom(q) => map.iter().find(|(orig, _)| orig == q).map(|(_, fresh)| Formula::atom(fresh.clone())),
            _ => None,
        },
        _ => None,
    })
}

/// Rebuilds a formula top-down; `visit` may replace a node wholesale.
fn map_nodes(f: &Formula, visit: &mut dyn FnMut(&Formula) -> Option<Formula>) -> Formula {
    if let Some(r) = visit(f) {
        return r;
    }
    match f {
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(a) => Formula::not(map_nodes(a, visit)),
        Formula::And(a, b) => {
            let a = map_nodes(a, visit);
            Formula::and(a, map_nodes(b, visit))
        }
        Formula::Or(a, b) => {
            let a = map_nodes(a, visit);
            Formula::or(a, map_nodes(b, visit))
        }
        Formula::Exists(c, a) => Formula::exists(c.clone(), map_nodes(a, visit)),
        Formula::ForAll(c, a) => Formula::forall(c.clone(), map_nodes(a, visit)),
        Formula::Next(a) => Formula::next(map_nodes(a, visit)),
        Formula::Until(a, b) => {
            let a = map_nodes(a, visit);
            Formula::until(a, map_nodes(b, visit))
        }
        Formula::Release(a, b) => {
            let a = map_nodes(a, visit);
            Formula::release(a, map_nodes(b, visit))
        }
    }
}

/// All subformulas in post-order, first occurrence kept.
pub fn subformulas(f: &Formula) -> Vec<Formula> {
    fn go(f: &Formula, seen: &mut HashSet<Formula>, out: &mut Vec<Formula>) {
        for c in f.children() {
            go(c, seen, out);
        }
        if seen.insert(f.clone()) {
            out.push(f.clone());
        }
    }
    let mut out = Vec::new();
    go(f, &mut HashSet::new(), &mut out);
    out
}

/// Drops every strategic quantifier, leaving the temporal skeleton.
pub fn strip_strategic(f: &Formula) -> Formula {
    map_nodes(f, &mut |node| match node {
        Formula::Exists(_, body) | Formula::ForAll(_, body) => Some(strip_strategic(body)),
        _ => None,
    })
}

/// Turns every quantifier, existential or universal, into `<<target>>`.
pub fn rewrite_coalitions(f: &Formula, target: &Coalition) -> Formula {
    map_nodes(f, &mut |node| match node {
        Formula::Exists(_, body) | Formula::ForAll(_, body) => {
            Some(Formula::exists(target.clone(), rewrite_coalitions(body, target)))
        }
        _ => None,
    })
}

/// Replaces every occurrence of `target` by the atom `atom`.
pub fn replace_subformula(f: &Formula, target: &Formula, atom: &str) -> Formula {
    map_nodes(f, &mut |node| (node == target).then(|| Formula::atom(atom)))
}
