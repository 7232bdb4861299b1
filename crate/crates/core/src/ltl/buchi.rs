use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::MAX_TRACKED_ATOMS;
use crate::error::{input, Error, Result};
use crate::formula::{to_nnf, Formula, FALSE, TRUE};

/// Conjunction of literals: a letter matches when it contains every atom in
/// `pos` and none in `neg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub pos: u32,
    pub neg: u32,
}

impl Guard {
    pub fn matches(self, letter: u32) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }
}

/// State-based Büchi automaton over letters `u32` (bit `i` = `atoms[i]`).
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    pub atoms: Vec<String>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
    pub transitions: Vec<Vec<(Guard, usize)>>,
}

impl BuchiAutomaton {
    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    /// States from which some infinite word is accepted.
    pub fn nonempty_states(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for (s, out) in self.transitions.iter().enumerate() {
            for &(_, t) in out {
                g.add_edge(nodes[s], nodes[t], ());
            }
        }
        let mut good = vec![false; n];
        for scc in tarjan_scc(&g) {
            let cyclic = scc.len() > 1 || {
                let s = scc[0].index();
                self.transitions[s].iter().any(|&(_, t)| t == s)
            };
            if cyclic && scc.iter().any(|v| self.accepting[v.index()]) {
                for v in scc {
                    good[v.index()] = true;
                }
            }
        }
        let mut preds = vec![Vec::new(); n];
        for (s, out) in self.transitions.iter().enumerate() {
            for &(_, t) in out {
                preds[t].push(s);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| good[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !good[s] {
                    good[s] = true;
                    queue.push_back(s);
                }
            }
        }
        good
    }

    pub fn is_empty(&self) -> bool {
        let ne = self.nonempty_states();
        !self.initial.iter().any(|&s| ne[s])
    }

    /// Successors of a state set on one letter.
    pub fn post(&self, from: &BTreeSet<usize>, letter: u32) -> BTreeSet<usize> {
        from.iter()
            .flat_map(|&s| self.transitions[s].iter())
            .filter(|(g, _)| g.matches(letter))
            .map(|&(_, t)| t)
            .collect()
    }

    /// Whether the ultimately periodic word `stem · cycle^ω` is accepted.
    pub fn accepts_lasso(&self, stem: &[u32], cycle: &[u32]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let len = stem.len() + cycle.len();
        let letter = |i: usize| if i < stem.len() { stem[i] } else { cycle[i - stem.len()] };
        let next_pos = |i: usize| if i + 1 < len { i + 1 } else { stem.len() };
        let n = self.state_count();
        let id = |q: usize, i: usize| q * len + i;
        let mut g = DiGraph::<(), ()>::with_capacity(n * len, 0);
        let nodes: Vec<_> = (0..n * len).map(|_| g.add_node(())).collect();
        for q in 0..n {
            for i in 0..len {
                for &(guard, t) in &self.transitions[q] {
                    if guard.matches(letter(i)) {
                        g.add_edge(nodes[id(q, i)], nodes[id(t, next_pos(i))], ());
                    }
                }
            }
        }
        let mut reach = vec![false; n * len];
        let mut stack: Vec<usize> = self.initial.iter().map(|&q| id(q, 0)).collect();
        for &s in &stack {
            reach[s] = true;
        }
        while let Some(v) = stack.pop() {
            for w in g.neighbors(nodes[v]) {
                if !reach[w.index()] {
                    reach[w.index()] = true;
                    stack.push(w.index());
                }
            }
        }
        tarjan_scc(&g).into_iter().any(|scc| {
            let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
            cyclic && scc.iter().any(|v| reach[v.index()] && self.accepting[v.index() / len])
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Cover {
    guard: Guard,
    next: BTreeSet<Formula>,
    /// Until obligations carried over instead of being met.
    postponed: BTreeSet<usize>,
}

struct Tableau<'a> {
    bits: &'a BTreeMap<String, u32>,
    untils: &'a BTreeMap<Formula, usize>,
}

impl Tableau<'_> {
    fn expand(&self, state: &BTreeSet<Formula>) -> BTreeSet<Cover> {
        let mut out = BTreeSet::new();
        let start = Cover { guard: Guard { pos: 0, neg: 0 }, next: BTreeSet::new(), postponed: BTreeSet::new() };
        self.go(state.iter().cloned().collect(), BTreeSet::new(), start, &mut out);
        out
    }

    fn go(&self, mut todo: Vec<Formula>, mut done: BTreeSet<Formula>, mut cur: Cover, out: &mut BTreeSet<Cover>) {
        while let Some(g) = todo.pop() {
            if !done.insert(g.clone()) {
                continue;
            }
            match &g {
                Formula::Atom(a) if a == TRUE => {}
                Formula::Atom(a) if a == FALSE => return,
                Formula::Atom(a) => {
                    cur.guard.pos |= self.bits[a];
                    if cur.guard.pos & cur.guard.neg != 0 {
                        return;
                    }
                }
                Formula::Not(inner) => {
                    let Formula::Atom(a) = &**inner else { unreachable!("input is in NNF") };
                    if a == TRUE {
                        return;
                    }
                    if a != FALSE {
                        cur.guard.neg |= self.bits[a];
                        if cur.guard.pos & cur.guard.neg != 0 {
                            return;
                        }
                    }
                }
                Formula::And(a, b) => {
                    todo.push((**a).clone());
                    todo.push((**b).clone());
                }
                Formula::Or(a, b) => {
                    let mut left = todo.clone();
                    left.push((**a).clone());
                    self.go(left, done.clone(), cur.clone(), out);
                    todo.push((**b).clone());
                }
                Formula::Next(a) => {
                    cur.next.insert((**a).clone());
                }
                Formula::Until(a, b) => {
                    let mut now = todo.clone();
                    now.push((**b).clone());
                    self.go(now, done.clone(), cur.clone(), out);
                    todo.push((**a).clone());
                    cur.next.insert(g.clone());
                    cur.postponed.insert(self.untils[&g]);
                }
                Formula::Release(a, b) => {
                    let mut now = todo.clone();
                    now.push((**a).clone());
                    now.push((**b).clone());
                    self.go(now, done.clone(), cur.clone(), out);
                    todo.push((**b).clone());
                    cur.next.insert(g.clone());
                }
                Formula::Exists(..) | Formula::ForAll(..) => unreachable!("input is LTL"),
            }
        }
        out.insert(cur);
    }
}

fn collect_untils(f: &Formula, out: &mut BTreeMap<Formula, usize>) {
    if let Formula::Until(..) = f {
        let next = out.len();
        out.entry(f.clone()).or_insert(next);
    }
    f.children().into_iter().for_each(|c| collect_untils(c, out));
}

/// Bit assignment for a sorted atom list.
pub(crate) fn atom_bits(atoms: &[String]) -> Result<BTreeMap<String, u32>> {
    if atoms.len() > MAX_TRACKED_ATOMS {
        return Err(input(format!("{} atoms exceed the monitor limit of {MAX_TRACKED_ATOMS}", atoms.len())));
    }
    Ok(atoms.iter().enumerate().map(|(i, a)| (a.clone(), 1u32 << i)).collect())
}

/// Büchi automaton for an LTL formula, over the formula's own atoms.
pub fn ltl_to_buchi(f: &Formula) -> Result<BuchiAutomaton> {
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    ltl_to_buchi_over(f, &atoms)
}

/// Same as [`ltl_to_buchi`] with an explicit atom order; `atoms` must cover
/// the formula's atoms.
pub fn ltl_to_buchi_over(f: &Formula, atoms: &[String]) -> Result<BuchiAutomaton> {
    if !f.is_ltl() {
        return Err(Error::Fragment(format!("`{f}` contains strategic quantifiers")));
    }
    let bits = atom_bits(atoms)?;
    if let Some(a) = f.atoms().into_iter().find(|a| !bits.contains_key(a)) {
        return Err(input(format!("atom `{a}` missing from the alphabet")));
    }
    let f = to_nnf(f);
    let mut untils = BTreeMap::new();
    collect_untils(&f, &mut untils);
    let tableau = Tableau { bits: &bits, untils: &untils };

    // Transition-based generalized automaton over obligation sets.
    let mut index: HashMap<BTreeSet<Formula>, usize> = HashMap::new();
    let mut states: Vec<BTreeSet<Formula>> = Vec::new();
    let mut edges: Vec<Vec<(Guard, usize, BTreeSet<usize>)>> = Vec::new();
    let init: BTreeSet<Formula> = [f.clone()].into_iter().collect();
    index.insert(init.clone(), 0);
    states.push(init);
    let mut i = 0;
    while i < states.len() {
        let covers = tableau.expand(&states[i]);
        let mut out = Vec::new();
        for c in covers {
            let target = match index.get(&c.next) {
                Some(&t) => t,
                None => {
                    states.push(c.next.clone());
                    index.insert(c.next.clone(), states.len() - 1);
                    states.len() - 1
                }
            };
            out.push((c.guard, target, c.postponed));
        }
        edges.push(out);
        i += 1;
    }

    // Degeneralize: level j waits for a transition that does not postpone
    // until number j; level k is accepting.
    let k = untils.len();
    let levels = k + 1;
    let id = |q: usize, j: usize| q * levels + j;
    let n = states.len() * levels;
    let mut transitions = vec![Vec::new(); n];
    let mut accepting = vec![false; n];
    for (q, out) in edges.iter().enumerate() {
        for j in 0..levels {
            accepting[id(q, j)] = j == k;
            let base = if j == k { 0 } else { j };
            for (guard, t, postponed) in out {
                let mut nj = base;
                while nj < k && !postponed.contains(&nj) {
                    nj += 1;
                }
                transitions[id(q, j)].push((*guard, id(*t, nj)));
            }
        }
    }
    let full = BuchiAutomaton { atoms: atoms.to_vec(), initial: vec![id(0, 0)], accepting, transitions };
    Ok(trim(full))
}

/// Drops states unreachable from the initial ones.
fn trim(a: BuchiAutomaton) -> BuchiAutomaton {
    let n = a.state_count();
    let mut map = vec![usize::MAX; n];
    let mut order = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in &a.initial {
        if map[s] == usize::MAX {
            map[s] = order.len();
            order.push(s);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &(_, t) in &a.transitions[s] {
            if map[t] == usize::MAX {
                map[t] = order.len();
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    BuchiAutomaton {
        atoms: a.atoms,
        initial: a.initial.iter().map(|&s| map[s]).collect(),
        accepting: order.iter().map(|&s| a.accepting[s]).collect(),
        transitions: order.iter().map(|&s| a.transitions[s].iter().map(|&(g, t)| (g, map[t])).collect()).collect(),
    }
}
