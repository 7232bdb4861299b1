//! Runtime verification of what static checking left open.

use std::collections::{BTreeMap, BTreeSet};

use crate::checker::{substitute_checked, CheckResult, Tag};
use crate::error::Result;
use crate::formula::{strip_strategic, subformulas, Formula};
use crate::icgs::{Icgs, StateId};
use crate::ltl::{build_monitor, Monitor, Verdict};
use crate::trace::Trace;

/// Verdict of one candidate together with the subformula bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub k: Verdict,
    pub mon_n: Verdict,
    pub mon_p: Verdict,
    /// Both monitors concluded, in opposite directions.
    pub conflict: bool,
    /// LTL projections of ψₙ and ψₚ.
    pub phi_n: Formula,
    pub phi_p: Formula,
    pub phi_mc: Vec<Formula>,
    pub phi_rv: Vec<Formula>,
    pub phi_unchk: Vec<Formula>,
    /// Events consumed by the ψₙ monitor.
    pub steps: usize,
}

/// Adds every result atom to the model, labeled where the result says.
pub fn update_model(m: &Icgs, results: &CheckResult) -> Icgs {
    let extra: Vec<(String, Vec<StateId>)> = results
        .checked
        .iter()
        .flat_map(|c| {
            [
                (c.natom.clone(), c.n_states.iter().copied().collect()),
                (c.patom.clone(), c.p_states.iter().copied().collect()),
            ]
        })
        .collect();
    m.with_extra_labels(&extra)
}

/// `(ψₙ, ψₚ)`: the formula with checked subformulas replaced by their
/// n-atoms and p-atoms respectively.
pub fn build_variants(f: &Formula, results: &CheckResult) -> (Formula, Formula) {
    (substitute_checked(f, &results.table(Tag::N)), substitute_checked(f, &results.table(Tag::P)))
}

/// Runs the monitors of one candidate. `h` must already carry the result
/// atoms (see [`lift_trace`]).
pub fn runtime_verification(m: &Icgs, f: &Formula, h: &Trace, results: &CheckResult) -> Result<Outcome> {
    let updated = update_model(m, results);
    h.check_atoms(updated.atoms())?;
    let basis: Vec<String> = updated.atoms().to_vec();
    let mut monitors: BTreeMap<Formula, Monitor> = BTreeMap::new();
    let mut verdict_of = |g: &Formula| -> Result<(Verdict, usize)> {
        let ltl = strip_strategic(g);
        if !monitors.contains_key(&ltl) {
            let mon = build_monitor(&ltl)?.with_basis(basis.iter().cloned());
            monitors.insert(ltl.clone(), mon);
        }
        let run = monitors[&ltl].run(&h.events)?;
        Ok((run.verdict, run.steps))
    };

    let phi_mc: Vec<Formula> = results.checked.iter().map(|c| c.subformula.clone()).collect();
    let (psi_n, psi_p) = build_variants(f, results);
    let (phi_n, phi_p) = (strip_strategic(&psi_n), strip_strategic(&psi_p));
    let (mon_n, steps) = verdict_of(&phi_n)?;
    let (mon_p, _) = verdict_of(&phi_p)?;
    let conflict = mon_n == Verdict::True && mon_p == Verdict::False;
    let k = if conflict {
        Verdict::Unknown
    } else if mon_n == Verdict::True {
        Verdict::True
    } else if mon_p == Verdict::False {
        Verdict::False
    } else {
        Verdict::Unknown
    };

    let mut phi_rv = Vec::new();
    let mut phi_unchk = Vec::new();
    for g in subformulas(f) {
        if phi_mc.contains(&g) {
            continue;
        }
        if verdict_of(&g)?.0.is_conclusive() {
            phi_rv.push(g);
        } else {
            phi_unchk.push(g);
        }
    }
    Ok(Outcome { k, mon_n, mon_p, conflict, phi_n, phi_p, phi_mc, phi_rv, phi_unchk, steps })
}

/// States the system may have been in at each position of a trace.
///
/// Position 0 must be the initial state; each event must equal the labeling
/// of the state. Returns `None` when the trace is not a history of `m`.
/// Afterwards every kept state has a consistent continuation.
pub fn consistent_states(m: &Icgs, h: &Trace) -> Option<Vec<BTreeSet<StateId>>> {
    let matches = |s: StateId, i: usize| m.label_names(s) == h.events[i];
    let mut layers: Vec<BTreeSet<StateId>> = Vec::with_capacity(h.len());
    for i in 0..h.len() {
        let layer: BTreeSet<StateId> = if i == 0 {
            [m.initial()].into_iter().filter(|&s| matches(s, 0)).collect()
        } else {
            layers[i - 1].iter().flat_map(|&s| m.successors(s)).filter(|&t| matches(t, i)).collect()
        };
        if layer.is_empty() {
            return None;
        }
        layers.push(layer);
    }
    for i in (0..layers.len().saturating_sub(1)).rev() {
        let next = layers[i + 1].clone();
        layers[i].retain(|&s| m.successors(s).any(|t| next.contains(&t)));
    }
    Some(layers)
}

/// Adds preprocessing and result atoms to a trace over the original atoms.
///
/// `not_q` is added wherever `q` is missing. An n-atom is added only where
/// every consistent state carries it, a p-atom wherever some consistent
/// state does. Without consistent states no n-atom and every p-atom is
/// added.
pub fn lift_trace(
    h: &Trace,
    negations: &[(String, String)],
    layers: Option<&[BTreeSet<StateId>]>,
    results: &CheckResult,
) -> Trace {
    let events = h
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut out = e.clone();
            for (q, not_q) in negations {
                if !e.contains(q) {
                    out.insert(not_q.clone());
                }
            }
            for c in &results.checked {
                match layers {
                    Some(layers) => {
                        let here = &layers[i];
                        if here.iter().all(|s| c.n_states.contains(s)) {
                            out.insert(c.natom.clone());
                        }
                        if here.iter().any(|s| c.p_states.contains(s)) {
                            out.insert(c.patom.clone());
                        }
                    }
                    None => {
                        out.insert(c.patom.clone());
                    }
                }
            }
            out
        })
        .collect();
    Trace::new(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::icgs::fixtures;

    fn trace(events: &[&[&str]]) -> Trace {
        Trace::from_events(events.iter().map(|e| e.iter().copied()))
    }

    #[test]
    fn empty_result_keeps_model() {
        let m = fixtures::chain();
        assert_eq!(update_model(&m, &CheckResult::default()), m);
        let f = parse("<<1>> F p").unwrap();
        assert_eq!(build_variants(&f, &CheckResult::default()), (f.clone(), f));
    }

    #[test]
    fn grand_coalition_reaching_p() {
        let m = fixtures::chain();
        let f = parse("<<1>> F p").unwrap();
        let o = runtime_verification(&m, &f, &trace(&[&[], &["p"]]), &CheckResult::default()).unwrap();
        assert_eq!(o.k, Verdict::True);
        assert_eq!(o.steps, 2);
    }

    #[test]
    fn violation_and_inconclusive() {
        let m = fixtures::single_state();
        let f = parse("<<1>> G p").unwrap();
        let bad = runtime_verification(&m, &f, &trace(&[&["p"], &[]]), &CheckResult::default()).unwrap();
        assert_eq!(bad.k, Verdict::False);
        let good = runtime_verification(&m, &f, &trace(&[&["p"], &["p"]]), &CheckResult::default()).unwrap();
        assert_eq!(good.k, Verdict::Unknown);
        assert!(good.phi_unchk.contains(&f));
        assert!(good.phi_rv.contains(&parse("p").unwrap()));
    }

    #[test]
    fn consistent_states_follow_labels() {
        let m = fixtures::chain();
        let layers = consistent_states(&m, &trace(&[&[], &["p"], &["p"]])).unwrap();
        assert_eq!(layers.len(), 3);
        assert!(consistent_states(&m, &trace(&[&["p"]])).is_none());
        assert!(consistent_states(&m, &trace(&[&[], &[]])).is_none());
    }
}
