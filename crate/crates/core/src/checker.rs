//! Static checking of strategic subformulas on the sub-models of one
//! candidate.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::atl::check_atl;
use crate::formula::{subformulas, Formula};
use crate::icgs::{Icgs, StateId};
use crate::submodel::SubmodelPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    N,
    P,
}

/// One labeled state: `subformula` holds (tag n) or may hold (tag p) at
/// `state`, witnessed by `atom`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Entry {
    pub state: StateId,
    pub subformula: Formula,
    pub tag: Tag,
    pub atom: String,
}

/// A strategic subformula the fixpoint checker could decide on the
/// candidate's sub-models. State ids refer to the full model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checked {
    pub subformula: Formula,
    pub natom: String,
    pub patom: String,
    /// Core states where the negative sub-model satisfies the subformula.
    pub n_states: BTreeSet<StateId>,
    /// Core states where the positive sub-model satisfies it, plus every
    /// state outside the core.
    pub p_states: BTreeSet<StateId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckResult {
    /// Bottom-up order: nested subformulas come first.
    pub checked: Vec<Checked>,
}

impl CheckResult {
    pub fn is_empty(&self) -> bool {
        self.checked.is_empty()
    }

    pub fn entries(&self) -> Vec<Entry> {
        let mut out = Vec::new();
        for c in &self.checked {
            for (tag, atom, states) in [(Tag::N, &c.natom, &c.n_states), (Tag::P, &c.patom, &c.p_states)] {
                out.extend(states.iter().map(|&state| Entry {
                    state,
                    subformula: c.subformula.clone(),
                    tag,
                    atom: atom.clone(),
                }));
            }
        }
        out.sort();
        out
    }

    /// Atoms attached to one state.
    pub fn result(&self, s: StateId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in &self.checked {
            if c.n_states.contains(&s) {
                out.insert(c.natom.clone());
            }
            if c.p_states.contains(&s) {
                out.insert(c.patom.clone());
            }
        }
        out
    }

    /// `subformula -> atom` for one tag. The n-table only lists subformulas
    /// with at least one n-entry; the p-table lists every checked one, since
    /// a missing p-atom is itself a proof of falsity.
    pub fn table(&self, tag: Tag) -> BTreeMap<Formula, String> {
        self.checked
            .iter()
            .filter(|c| tag == Tag::P || !c.n_states.is_empty())
            .map(|c| {
                let atom = match tag {
                    Tag::N => c.natom.clone(),
                    Tag::P => c.patom.clone(),
                };
                (c.subformula.clone(), atom)
            })
            .collect()
    }

    pub fn is_checked(&self, f: &Formula) -> bool {
        self.checked.iter().any(|c| &c.subformula == f)
    }
}

/// Replaces every occurrence of a tabled subformula by its atom. The
/// outermost match wins, which equals innermost-first substitution with the
/// outer targets rewritten along the way.
pub fn substitute_checked(f: &Formula, table: &BTreeMap<Formula, String>) -> Formula {
    if let Some(atom) = table.get(f) {
        return Formula::atom(atom.clone());
    }
    let sub = |g: &Formula| Box::new(substitute_checked(g, table));
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(a) => Formula::Not(sub(a)),
        Formula::And(a, b) => Formula::And(sub(a), sub(b)),
        Formula::Or(a, b) => Formula::Or(sub(a), sub(b)),
        Formula::Exists(c, a) => Formula::Exists(c.clone(), sub(a)),
        Formula::ForAll(c, a) => Formula::ForAll(c.clone(), sub(a)),
        Formula::Next(a) => Formula::Next(sub(a)),
        Formula::Until(a, b) => Formula::Until(sub(a), sub(b)),
        Formula::Release(a, b) => Formula::Release(sub(a), sub(b)),
    }
}

/// `natom_<digest>` or `patom_<digest>`, with a numeric suffix if the model
/// already uses the name.
pub fn atom_name(m: &Icgs, f: &Formula, tag: Tag, taken: &BTreeSet<String>) -> String {
    let digest = Sha256::digest(f.to_string().as_bytes());
    let prefix = match tag {
        Tag::N => "natom",
        Tag::P => "patom",
    };
    m.fresh_atom_name(&format!("{prefix}_{}", hex::encode(&digest[..6])), taken)
}

/// Checks the strategic subformulas of `f`, innermost first, on both
/// sub-models of `pair`. `m` is the (preprocessed) model the pair was cut
/// from. Subformulas outside the ATL fragment, and everything above them,
/// are skipped.
pub fn check_subformulas(m: &Icgs, pair: &SubmodelPair, f: &Formula) -> CheckResult {
    let mut mn = pair.negative.clone();
    let mut mp = pair.positive.clone();
    let mut table_n = BTreeMap::new();
    let mut table_p = BTreeMap::new();
    let mut taken = BTreeSet::new();
    let mut checked = Vec::new();
    let outside: Vec<StateId> = m.state_ids().filter(|&s| !pair.contains(s)).collect();

    for psi in subformulas(f).into_iter().filter(Formula::is_strategic) {
        let psi_n = substitute_children(&psi, &table_n);
        let psi_p = substitute_children(&psi, &table_p);
        if !psi_n.is_atl_state() {
            continue;
        }
        let (Ok(sat_n), Ok(sat_p)) = (check_atl(&mn, &psi_n), check_atl(&mp, &psi_p)) else {
            continue;
        };
        let natom = atom_name(m, &psi, Tag::N, &taken);
        taken.insert(natom.clone());
        let patom = atom_name(m, &psi, Tag::P, &taken);
        taken.insert(patom.clone());

        mn = mn.with_extra_labels(&[(natom.clone(), sat_n.iter().copied().collect())]);
        mp = mp.with_extra_labels(&[(patom.clone(), sat_p.iter().copied().collect())]);
        table_n.insert(psi.clone(), natom.clone());
        table_p.insert(psi.clone(), patom.clone());

        let n_states = sat_n.iter().filter_map(|&s| pair.original(s)).collect();
        let mut p_states: BTreeSet<StateId> = sat_p.iter().filter_map(|&s| pair.original(s)).collect();
        p_states.extend(outside.iter().copied());
        checked.push(Checked { subformula: psi, natom, patom, n_states, p_states });
    }
    CheckResult { checked }
}

fn substitute_children(psi: &Formula, table: &BTreeMap<Formula, String>) -> Formula {
    match psi {
        Formula::Exists(c, body) => Formula::exists(c.clone(), substitute_checked(body, table)),
        Formula::ForAll(c, body) => Formula::forall(c.clone(), substitute_checked(body, table)),
        other => substitute_checked(other, table),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::icgs::fixtures;
    use crate::submodel::find_submodels;

    #[test]
    fn perfect_information_tags_coincide() {
        let m = fixtures::chain();
        let pair = find_submodels(&m, 4).unwrap().remove(0);
        let f = parse("<<1>> X p").unwrap();
        let r = check_subformulas(&m, &pair, &f);
        assert_eq!(r.checked.len(), 1);
        let c = &r.checked[0];
        let direct = check_atl(&m, &f).unwrap();
        assert_eq!(c.n_states, direct);
        assert_eq!(c.p_states, direct);
        assert!(c.natom.starts_with("natom_") && c.patom.starts_with("patom_"));
    }

    #[test]
    fn nested_formulas_are_substituted() {
        let m = fixtures::chain();
        let pair = find_submodels(&m, 4).unwrap().remove(0);
        let f = parse("<<1>> X <<>> G p").unwrap();
        let r = check_subformulas(&m, &pair, &f);
        assert_eq!(r.checked.len(), 2);
        assert_eq!(r.checked[0].subformula, parse("<<>> G p").unwrap());
        assert!(r.checked[1].n_states.contains(&m.initial()));
        assert!(r.result(m.initial()).contains(&r.checked[1].natom));
    }

    #[test]
    fn star_subformulas_are_skipped() {
        let m = fixtures::chain();
        let pair = find_submodels(&m, 4).unwrap().remove(0);
        let f = parse("<<1>> X <<1>> (F p & G p)").unwrap();
        assert!(check_subformulas(&m, &pair, &f).is_empty());
    }

    #[test]
    fn substitution_prefers_outer_match() {
        let inner = parse("<<1>> F p").unwrap();
        let outer = parse("<<2>> X <<1>> F p").unwrap();
        let table: BTreeMap<Formula, String> =
            [(inner, "a".to_string()), (outer, "b".to_string())].into_iter().collect();
        assert_eq!(
            substitute_checked(&parse("<<2>> X <<1>> F p & <<1>> F p").unwrap(), &table),
            parse("b & a").unwrap()
        );
    }
}
