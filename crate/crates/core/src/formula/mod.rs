//! ATL*, ATL and LTL formulas.
//!
//! One AST covers all three logics. `F ψ` and `G ψ` are sugar for `true U ψ`
//! and `false R ψ`; `true` and `false` are ordinary atoms with a fixed
//! interpretation.

mod parser;
mod transform;

pub use parser::parse;
pub use transform::{
    eliminate_negated_atoms, replace_subformula, rewrite_coalitions, strip_strategic, subformulas, to_nnf,
    NegationElimination,
};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::icgs::Icgs;

pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

/// A set of agents named in a strategic quantifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(pub BTreeSet<String>);

impl Coalition {
    pub fn new<I, S>(agents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(agents.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The grand coalition of a model.
    pub fn all(m: &Icgs) -> Self {
        Self::new(m.agents().iter().cloned())
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, agent: &str) -> bool {
        self.0.contains(agent)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(String::as_str).collect();
        write!(f, "{}", names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `<<Γ>> ψ`
    Exists(Coalition, Box<Formula>),
    /// `[[Γ]] ψ`
    ForAll(Coalition, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
}

/// Which logic a formula belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FragmentClass {
    /// Quantifier-free.
    Ltl,
    /// Every quantifier guards exactly one of `X`, `U`, `R` over state formulas.
    Atl,
    AtlStar,
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn tt() -> Self {
        Formula::atom(TRUE)
    }

    pub fn ff() -> Self {
        Formula::atom(FALSE)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(c: Coalition, body: Formula) -> Self {
        Formula::Exists(c, Box::new(body))
    }

    pub fn forall(c: Coalition, body: Formula) -> Self {
        Formula::ForAll(c, Box::new(body))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Self {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::until(Formula::tt(), f)
    }

    pub fn globally(f: Formula) -> Self {
        Formula::release(Formula::ff(), f)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Atom(a) if a == TRUE)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::Atom(a) if a == FALSE)
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(a) | Formula::Next(a) | Formula::Exists(_, a) | Formula::ForAll(_, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => vec![a, b],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn is_strategic(&self) -> bool {
        matches!(self, Formula::Exists(..) | Formula::ForAll(..))
    }

    pub fn has_quantifier(&self) -> bool {
        self.is_strategic() || self.children().into_iter().any(Formula::has_quantifier)
    }

    pub fn is_ltl(&self) -> bool {
        !self.has_quantifier()
    }

    /// Negation occurs only directly above atoms.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Not(inner) => matches!(**inner, Formula::Atom(_)),
            other => other.children().into_iter().all(Formula::is_nnf),
        }
    }

    pub fn is_negation_free(&self) -> bool {
        match self {
            Formula::Not(_) => false,
            other => other.children().into_iter().all(Formula::is_negation_free),
        }
    }

    /// Atom names, excluding the constants.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) if a != TRUE && a != FALSE => {
                out.insert(a.clone());
            }
            other => other.children().into_iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<String>) {
        if let Formula::Exists(c, _) | Formula::ForAll(c, _) = self {
            out.extend(c.iter().cloned());
        }
        self.children().into_iter().for_each(|c| c.collect_agents(out));
    }

    /// State formula of the ATL grammar: boolean structure over atoms and
    /// quantifiers whose body is `X φ`, `φ U φ` or `φ R φ`.
    pub fn is_atl_state(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(a) => a.is_atl_state(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_atl_state() && b.is_atl_state(),
            Formula::Exists(_, body) | Formula::ForAll(_, body) => match &**body {
                Formula::Next(a) => a.is_atl_state(),
                Formula::Until(a, b) | Formula::Release(a, b) => a.is_atl_state() && b.is_atl_state(),
                _ => false,
            },
            Formula::Next(_) | Formula::Until(..) | Formula::Release(..) => false,
        }
    }

    /// Root is atomic, boolean or strategic, recursively (ATL* state grammar).
    pub fn is_state_formula(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Exists(..) | Formula::ForAll(..) => true,
            Formula::Not(a) => a.is_state_formula(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_state_formula() && b.is_state_formula(),
            _ => false,
        }
    }

    pub fn fragment(&self) -> FragmentClass {
        if self.is_ltl() {
            FragmentClass::Ltl
        } else if self.is_atl_state() {
            FragmentClass::Atl
        } else {
            FragmentClass::AtlStar
        }
    }

    /// Checks every atom and agent against a model.
    pub fn check_against(&self, m: &Icgs) -> Result<()> {
        for q in self.atoms() {
            if m.atom_id(&q).is_none() {
                return Err(input(format!("formula mentions unknown atom `{q}`")));
            }
        }
        for a in self.agents() {
            if m.agent_id(&a).is_none() {
                return Err(input(format!("formula mentions unknown agent `{a}`")));
            }
        }
        Ok(())
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Until(a, _) if a.is_true() => 4,
            Formula::Release(a, _) if a.is_false() => 4,
            Formula::Until(..) | Formula::Release(..) => 3,
            Formula::Not(_) | Formula::Next(_) | Formula::Exists(..) | Formula::ForAll(..) => 4,
            Formula::Atom(_) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}")?,
            Formula::Not(a) => {
                write!(f, "!")?;
                a.write_at(f, 4)?;
            }
            Formula::And(a, b) => {
                a.write_at(f, 2)?;
                write!(f, " & ")?;
                b.write_at(f, 3)?;
            }
            Formula::Or(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " | ")?;
                b.write_at(f, 2)?;
            }
            Formula::Exists(c, body) => {
                write!(f, "<<{c}>> ")?;
                body.write_at(f, 4)?;
            }
            Formula::ForAll(c, body) => {
                write!(f, "[[{c}]] ")?;
                body.write_at(f, 4)?;
            }
            Formula::Next(a) => {
                write!(f, "X ")?;
                a.write_at(f, 4)?;
            }
            Formula::Until(a, b) if a.is_true() => {
                write!(f, "F ")?;
                b.write_at(f, 4)?;
            }
            Formula::Release(a, b) if a.is_false() => {
                write!(f, "G ")?;
                b.write_at(f, 4)?;
            }
            Formula::Until(a, b) => {
                a.write_at(f, 4)?;
                write!(f, " U ")?;
                b.write_at(f, 3)?;
            }
            Formula::Release(a, b) => {
                a.write_at(f, 4)?;
                write!(f, " R ")?;
                b.write_at(f, 3)?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Prints in the concrete syntax accepted by [`parse`].
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for Formula {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn fragment_classification() {
        assert_eq!(p("F p").fragment(), FragmentClass::Ltl);
        assert_eq!(p("<<1>> X p & [[2]] (p U q)").fragment(), FragmentClass::Atl);
        assert_eq!(p("<<1>> X <<2>> G q").fragment(), FragmentClass::Atl);
        assert_eq!(p("<<1>> (F p & G q)").fragment(), FragmentClass::AtlStar);
        assert_eq!(p("<<1>> F G p").fragment(), FragmentClass::AtlStar);
        assert_eq!(p("F <<1>> X p").fragment(), FragmentClass::AtlStar);
    }

    #[test]
    fn printer_uses_sugar_and_minimal_parens() {
        assert_eq!(p("<<1,2>> F win").to_string(), "<<1,2>> F win");
        assert_eq!(p("a U (b U c)").to_string(), "a U b U c");
        assert_eq!(p("(a U b) U c").to_string(), "(a U b) U c");
        assert_eq!(p("!(p & q)").to_string(), "!(p & q)");
        assert_eq!(p("(p | q) & r").to_string(), "(p | q) & r");
        assert_eq!(p("<<1>> (p U q)").to_string(), "<<1>> (p U q)");
        assert_eq!(p("[[]] G p").to_string(), "[[]] G p");
    }

    #[test]
    fn nnf_predicates() {
        assert!(p("!p & X !q").is_nnf());
        assert!(!p("!(p & q)").is_nnf());
        assert!(p("p U q").is_negation_free());
        assert!(!p("!p").is_negation_free());
    }

    #[test]
    fn atoms_exclude_constants() {
        let atoms: Vec<String> = p("F p & G (q | true)").atoms().into_iter().collect();
        assert_eq!(atoms, ["p", "q"]);
    }

    #[test]
    fn json_mirrors_node_names() {
        let f = p("<<1>> X p");
        let j = serde_json::to_string(&f).unwrap();
        assert_eq!(j, r#"{"Exists":[["1"],{"Next":{"Atom":"p"}}]}"#);
        assert_eq!(serde_json::from_str::<Formula>(&j).unwrap(), f);
    }
}
