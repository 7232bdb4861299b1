//! ISPL rendering of perfect-information models for MCMAS.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{input, Result};
use crate::formula::{Coalition, Formula};
use crate::icgs::Icgs;

fn ident(prefix: &str, name: &str) -> String {
    let body: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    format!("{prefix}{body}")
}

struct Names {
    agents: Vec<String>,
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    atoms: Vec<String>,
}

impl Names {
    fn new(m: &Icgs) -> Self {
        Self {
            agents: m.agents().iter().map(|a| ident("ag_", a)).collect(),
            states: m.states().iter().map(|s| ident("st_", s)).collect(),
            actions: m.agent_ids().map(|a| m.actions(a).iter().map(|x| ident("act_", x)).collect()).collect(),
            atoms: m.atoms().iter().map(|q| ident("at_", q)).collect(),
        }
    }
}

/// Renders `m` with each agent observing the environment state. Formulas
/// MCMAS cannot express are written out as comments.
pub fn export_ispl(m: &Icgs, formulas: &[Formula]) -> Result<String> {
    if !m.is_perfect_information() {
        return Err(input("ISPL export needs a perfect-information model"));
    }
    let n = Names::new(m);
    let mut out = String::new();
    let w = &mut out;

    writeln!(w, "Agent Environment").unwrap();
    writeln!(w, "  Obsvars:").unwrap();
    writeln!(w, "    state : {{{}}};", n.states.join(", ")).unwrap();
    writeln!(w, "  end Obsvars").unwrap();
    writeln!(w, "  Actions = {{none}};").unwrap();
    writeln!(w, "  Protocol:").unwrap();
    writeln!(w, "    Other : {{none}};").unwrap();
    writeln!(w, "  end Protocol").unwrap();
    writeln!(w, "  Evolution:").unwrap();
    for s in m.state_ids() {
        for (joint, t) in m.transitions_from(s) {
            let acts: Vec<String> =
                m.agent_ids().map(|a| format!("{}.Action={}", n.agents[a.0], n.actions[a.0][joint.get(a).0])).collect();
            writeln!(w, "    state={} if state={} and {};", n.states[t.0], n.states[s.0], acts.join(" and ")).unwrap();
        }
    }
    writeln!(w, "  end Evolution").unwrap();
    writeln!(w, "end Agent\n").unwrap();

    for a in m.agent_ids() {
        writeln!(w, "Agent {}", n.agents[a.0]).unwrap();
        writeln!(w, "  Vars:").unwrap();
        writeln!(w, "    idle : boolean;").unwrap();
        writeln!(w, "  end Vars").unwrap();
        writeln!(w, "  Actions = {{{}}};", n.actions[a.0].join(", ")).unwrap();
        writeln!(w, "  Protocol:").unwrap();
        for s in m.state_ids() {
            let acts: Vec<&str> = m.protocol(a, s).iter().map(|x| n.actions[a.0][x.0].as_str()).collect();
            writeln!(w, "    Environment.state={} : {{{}}};", n.states[s.0], acts.join(", ")).unwrap();
        }
        writeln!(w, "  end Protocol").unwrap();
        writeln!(w, "  Evolution:").unwrap();
        writeln!(w, "    idle=true if idle=true;").unwrap();
        writeln!(w, "  end Evolution").unwrap();
        writeln!(w, "end Agent\n").unwrap();
    }

    writeln!(w, "Evaluation").unwrap();
    for (qi, q) in n.atoms.iter().enumerate() {
        let holders: Vec<String> = m
            .state_ids()
            .filter(|&s| m.labels(s).iter().any(|x| x.0 == qi))
            .map(|s| format!("Environment.state={}", n.states[s.0]))
            .collect();
        if holders.is_empty() {
            writeln!(w, "  {q} if Environment.state={} and Environment.state!={};", n.states[0], n.states[0]).unwrap();
        } else {
            writeln!(w, "  {q} if {};", holders.join(" or ")).unwrap();
        }
    }
    writeln!(w, "end Evaluation\n").unwrap();

    let init: Vec<String> = std::iter::once(format!("Environment.state={}", n.states[m.initial().0]))
        .chain(n.agents.iter().map(|a| format!("{a}.idle=true")))
        .collect();
    writeln!(w, "InitStates\n  {};\nend InitStates\n", init.join(" and ")).unwrap();

    let mut groups = BTreeSet::new();
    let rendered: Vec<std::result::Result<String, String>> =
        formulas.iter().map(|f| render(f, m, &n, &mut groups).ok_or_else(|| f.to_string())).collect();
    writeln!(w, "Groups").unwrap();
    for g in &groups {
        writeln!(w, "  {} = {{{}}};", group_name(g), group_members(g, m, &n)).unwrap();
    }
    writeln!(w, "end Groups\n").unwrap();
    writeln!(w, "Formulae").unwrap();
    for r in rendered {
        match r {
            Ok(text) => writeln!(w, "  {text};").unwrap(),
            Err(orig) => writeln!(w, "  -- not expressible: {orig}").unwrap(),
        }
    }
    writeln!(w, "end Formulae").unwrap();
    Ok(out)
}

fn group_name(g: &Coalition) -> String {
    let parts: Vec<String> = g.iter().map(|a| ident("", a)).collect();
    format!("g_{}", parts.join("_"))
}

fn group_members(g: &Coalition, m: &Icgs, n: &Names) -> String {
    let members: Vec<&str> = g.iter().filter_map(|a| m.agent_id(a)).map(|a| n.agents[a.0].as_str()).collect();
    members.join(", ")
}

fn render(f: &Formula, m: &Icgs, n: &Names, groups: &mut BTreeSet<Coalition>) -> Option<String> {
    use Formula::*;
    Some(match f {
        _ if f.is_true() || f.is_false() => {
            let q = n.atoms.first()?;
            if f.is_true() {
                format!("({q} or !{q})")
            } else {
                format!("({q} and !{q})")
            }
        }
        Atom(a) => n.atoms[m.atom_id(a)?.0].clone(),
        Not(g) => format!("!{}", render(g, m, n, groups)?),
        And(a, b) => format!("({} and {})", render(a, m, n, groups)?, render(b, m, n, groups)?),
        Or(a, b) => format!("({} or {})", render(a, m, n, groups)?, render(b, m, n, groups)?),
        Exists(c, path) => quantified(c, path, m, n, groups)?,
        // [[C]]ψ as ¬<<C>>¬ψ, for the path shapes whose negation MCMAS can write
        ForAll(c, path) => {
            let dual = match path.as_ref() {
                Next(g) => Formula::next(Formula::not((**g).clone())),
                Until(a, b) if a.is_true() => Formula::globally(Formula::not((**b).clone())),
                Release(a, b) if a.is_false() => Formula::eventually(Formula::not((**b).clone())),
                _ => return None,
            };
            format!("!{}", quantified(c, &dual, m, n, groups)?)
        }
        Next(_) | Until(..) | Release(..) => return None,
    })
}

fn quantified(c: &Coalition, path: &Formula, m: &Icgs, n: &Names, groups: &mut BTreeSet<Coalition>) -> Option<String> {
    use Formula::*;
    let body = match path {
        Next(g) => format!("X {}", render(g, m, n, groups)?),
        Until(a, b) if a.is_true() => format!("F {}", render(b, m, n, groups)?),
        Until(a, b) => format!("({} U {})", render(a, m, n, groups)?, render(b, m, n, groups)?),
        Release(a, b) if a.is_false() => format!("G {}", render(b, m, n, groups)?),
        _ => return None,
    };
    if c.is_empty() {
        return Some(format!("A{body}"));
    }
    groups.insert(c.clone());
    Some(format!("<{}>{body}", group_name(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icgs::fixtures;

    #[test]
    fn chain_export() {
        let m = fixtures::chain();
        let f: Vec<Formula> =
            ["<<1>> X p", "[[1]] F p", "<<>> G p", "<<1>> (p R p)"].iter().map(|t| t.parse().unwrap()).collect();
        let text = export_ispl(&m, &f).unwrap();
        assert!(text.contains("state=st_s1 if state=st_s0 and ag_1.Action=act_go;"));
        assert!(text.contains("at_p if Environment.state=st_s1;"));
        assert!(text.contains("g_1 = {ag_1};"));
        assert!(text.contains("<g_1>X at_p;"));
        assert!(text.contains("!<g_1>G !at_p;"));
        assert!(text.contains("AG at_p;"));
        assert!(text.contains("-- not expressible: <<1>>"));
        assert!(text.contains("InitStates\n  Environment.state=st_s0 and ag_1.idle=true;"));
    }
}
