use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::buchi::{atom_bits, ltl_to_buchi_over, BuchiAutomaton};
use super::Verdict;
use crate::error::{input, Error, Result};
use crate::formula::Formula;

/// Deterministic Moore machine computing the three-valued verdict of an
/// LTL formula on finite prefixes.
///
/// States are numbered in breadth-first order from the initial state 0,
/// letters in increasing bitmask order, so equal formulas give identical
/// machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitor {
    formula: Formula,
    /// Atoms the formula reads; bit `i` of a letter is `tracked[i]`.
    tracked: Vec<String>,
    /// Atoms accepted in events. Always a superset of `tracked`.
    basis: BTreeSet<String>,
    delta: Vec<Vec<usize>>,
    output: Vec<Verdict>,
}

/// Per-event verdicts of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Run {
    pub verdicts: Vec<Verdict>,
    pub verdict: Verdict,
    pub steps: usize,
}

/// A position inside a monitor. Cheap to copy; one per trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitorCursor {
    state: usize,
    steps: usize,
}

impl MonitorCursor {
    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Serialized form of a monitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorJson {
    pub formula: String,
    pub atoms: Vec<String>,
    pub initial: usize,
    pub outputs: Vec<Verdict>,
    /// `transitions[state][letter]`, letter bit `i` standing for `atoms[i]`.
    pub transitions: Vec<Vec<usize>>,
}

/// Builds the monitor of an LTL formula.
pub fn build_monitor(f: &Formula) -> Result<Monitor> {
    if !f.is_ltl() {
        return Err(Error::Fragment(format!("`{f}` contains strategic quantifiers")));
    }
    let tracked: Vec<String> = f.atoms().into_iter().collect();
    atom_bits(&tracked)?;
    let pos = ltl_to_buchi_over(f, &tracked)?;
    let neg = ltl_to_buchi_over(&Formula::not(f.clone()), &tracked)?;
    let (delta, output) = minimize(product(&pos, &neg, 1usize << tracked.len()));
    Ok(Monitor { formula: f.clone(), basis: tracked.iter().cloned().collect(), tracked, delta, output })
}

struct Side<'a> {
    ba: &'a BuchiAutomaton,
    live: Vec<bool>,
}

impl Side<'_> {
    fn start(&self) -> BTreeSet<usize> {
        self.ba.initial.iter().copied().filter(|&s| self.live[s]).collect()
    }

    fn step(&self, from: &BTreeSet<usize>, letter: u32) -> BTreeSet<usize> {
        self.ba.post(from, letter).into_iter().filter(|&s| self.live[s]).collect()
    }
}

/// Subset construction on both automata, restricted to states with a
/// nonempty language.
fn product(pos: &BuchiAutomaton, neg: &BuchiAutomaton, letters: usize) -> (Vec<Vec<usize>>, Vec<Verdict>) {
    let p = Side { ba: pos, live: pos.nonempty_states() };
    let n = Side { ba: neg, live: neg.nonempty_states() };
    type Key = (BTreeSet<usize>, BTreeSet<usize>);
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Key> = vec![(p.start(), n.start())];
    index.insert(keys[0].clone(), 0);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let (sp, sn) = keys[i].clone();
        let row = (0..letters as u32)
            .map(|l| {
                let k = (p.step(&sp, l), n.step(&sn, l));
                *index.entry(k.clone()).or_insert_with(|| {
                    keys.push(k);
                    keys.len() - 1
                })
            })
            .collect();
        delta.push(row);
        i += 1;
    }
    let output = keys
        .iter()
        .map(|(sp, sn)| {
            if sn.is_empty() {
                Verdict::True
            } else if sp.is_empty() {
                Verdict::False
            } else {
                Verdict::Unknown
            }
        })
        .collect();
    (delta, output)
}

/// Moore partition refinement followed by breadth-first renumbering.
fn minimize((delta, output): (Vec<Vec<usize>>, Vec<Verdict>)) -> (Vec<Vec<usize>>, Vec<Verdict>) {
    let n = output.len();
    let mut block: Vec<usize> = output
        .iter()
        .map(|v| match v {
            Verdict::True => 0,
            Verdict::False => 1,
            Verdict::Unknown => 2,
        })
        .collect();
    loop {
        let mut sig: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|s| {
                let key = (block[s], delta[s].iter().map(|&t| block[t]).collect());
                let fresh = sig.len();
                *sig.entry(key).or_insert(fresh)
            })
            .collect();
        let before = block.iter().collect::<BTreeSet<_>>().len();
        let after = sig.len();
        block = next;
        if after == before {
            break;
        }
    }
    // Renumber blocks in BFS order from the initial state.
    let mut order = vec![usize::MAX; n];
    let mut reps = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    order[block[0]] = 0;
    reps.push(0);
    while let Some(s) = queue.pop_front() {
        for &t in &delta[s] {
            if order[block[t]] == usize::MAX {
                order[block[t]] = reps.len();
                reps.push(t);
                queue.push_back(t);
            }
        }
    }
    let delta = reps.iter().map(|&s| delta[s].iter().map(|&t| order[block[t]]).collect()).collect();
    let output = reps.iter().map(|&s| output[s]).collect();
    (delta, output)
}

impl Monitor {
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn tracked_atoms(&self) -> &[String] {
        &self.tracked
    }

    pub fn basis(&self) -> &BTreeSet<String> {
        &self.basis
    }

    /// Widens the set of atoms events may mention. Extra atoms are ignored.
    pub fn with_basis<I, S>(mut self, atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.basis.extend(atoms.into_iter().map(Into::into));
        self
    }

    pub fn state_count(&self) -> usize {
        self.output.len()
    }

    pub fn output(&self, state: usize) -> Verdict {
        self.output[state]
    }

    pub fn next_state(&self, state: usize, letter: u32) -> usize {
        self.delta[state][letter as usize]
    }

    pub fn letter_count(&self) -> usize {
        1 << self.tracked.len()
    }

    /// Projects an event onto the tracked atoms.
    pub fn letter<S: AsRef<str>>(&self, event: &BTreeSet<S>) -> Result<u32> {
        let mut l = 0;
        for a in event {
            let a = a.as_ref();
            if !self.basis.contains(a) {
                return Err(input(format!("event mentions unknown atom `{a}`")));
            }
            if let Some(i) = self.tracked.iter().position(|t| t == a) {
                l |= 1 << i;
            }
        }
        Ok(l)
    }

    pub fn cursor(&self) -> MonitorCursor {
        MonitorCursor { state: 0, steps: 0 }
    }

    pub fn verdict(&self, c: &MonitorCursor) -> Verdict {
        self.output[c.state]
    }

    pub fn step<S: AsRef<str>>(&self, c: &mut MonitorCursor, event: &BTreeSet<S>) -> Result<Verdict> {
        let l = self.letter(event)?;
        c.state = self.delta[c.state][l as usize];
        c.steps += 1;
        Ok(self.output[c.state])
    }

    pub fn run<S: AsRef<str>>(&self, events: &[BTreeSet<S>]) -> Result<Run> {
        let mut c = self.cursor();
        let verdicts = events.iter().map(|e| self.step(&mut c, e)).collect::<Result<Vec<_>>>()?;
        Ok(Run { verdicts, verdict: self.verdict(&c), steps: c.steps })
    }

    /// Verdict after a sequence of raw letters.
    pub fn run_letters(&self, letters: &[u32]) -> Verdict {
        let s = letters.iter().fold(0, |s, &l| self.delta[s][l as usize]);
        self.output[s]
    }

    pub fn to_json(&self) -> MonitorJson {
        MonitorJson {
            formula: self.formula.to_string(),
            atoms: self.tracked.clone(),
            initial: 0,
            outputs: self.output.clone(),
            transitions: self.delta.clone(),
        }
    }

    fn letter_label(&self, l: usize) -> String {
        if self.tracked.is_empty() {
            return "*".into();
        }
        let parts: Vec<String> = self
            .tracked
            .iter()
            .enumerate()
            .map(|(i, a)| if l >> i & 1 == 1 { a.clone() } else { format!("!{a}") })
            .collect();
        parts.join(" & ")
    }

    /// Graphviz rendering; parallel letters are merged into one edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph monitor {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  init [shape=point];");
        for (s, v) in self.output.iter().enumerate() {
            let _ = writeln!(out, "  q{s} [shape=box, label=\"q{s} / {}\"];", v.symbol());
        }
        let _ = writeln!(out, "  init -> q0;");
        for (s, row) in self.delta.iter().enumerate() {
            let mut by_target: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for (l, &t) in row.iter().enumerate() {
                by_target.entry(t).or_default().push(self.letter_label(l));
            }
            for (t, labels) in by_target {
                let label = if labels.len() == row.len() { "*".to_string() } else { labels.join(" | ") };
                let _ = writeln!(out, "  q{s} -> q{t} [label=\"{label}\"];");
            }
        }
        let _ = writeln!(out, "}}");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn mon(s: &str) -> Monitor {
        build_monitor(&parse(s).unwrap()).unwrap()
    }

    fn ev(atoms: &[&str]) -> BTreeSet<String> {
        atoms.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn eventually() {
        let m = mon("F p");
        let r = m.run(&[ev(&[]), ev(&[]), ev(&["p"])]).unwrap();
        assert_eq!(r.verdicts, [Verdict::Unknown, Verdict::Unknown, Verdict::True]);
        assert_eq!(m.state_count(), 2);
    }

    #[test]
    fn globally() {
        let m = mon("G p");
        let r = m.run(&[ev(&["p"]), ev(&[])]).unwrap();
        assert_eq!(r.verdicts, [Verdict::Unknown, Verdict::False]);
        assert!(!(0..m.state_count()).any(|s| m.output(s) == Verdict::True));
    }

    #[test]
    fn next() {
        let m = mon("X p");
        assert_eq!(m.run_letters(&[]), Verdict::Unknown);
        assert_eq!(m.run_letters(&[0]), Verdict::Unknown);
        assert_eq!(m.run_letters(&[0, 1]), Verdict::True);
        assert_eq!(m.run_letters(&[1, 0]), Verdict::False);
    }

    #[test]
    fn empty_trace_gives_initial_output() {
        let empty: Vec<BTreeSet<String>> = Vec::new();
        assert_eq!(mon("true").run(&empty).unwrap().verdict, Verdict::True);
        assert_eq!(mon("p U q").run(&empty).unwrap().verdict, Verdict::Unknown);
        assert_eq!(mon("false").run(&empty).unwrap().steps, 0);
    }

    #[test]
    fn unknown_atoms_are_rejected() {
        let m = mon("F p");
        let err = m.run(&[ev(&["zz"])]).unwrap_err();
        assert!(err.to_string().contains("zz"));
        let wide = m.with_basis(["zz"]);
        assert_eq!(wide.run(&[ev(&["zz"])]).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn canonical_numbering() {
        assert_eq!(mon("F p"), mon("true U p"));
        assert_eq!(mon("F p").to_json(), mon("F p").to_json());
    }
}
