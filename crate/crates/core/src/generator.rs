//! Random iCGS generation for experiments.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::icgs::{validate_model, Icgs, IcgsBuilder};

/// Allowed gap between requested and realized imperfect-information degree.
pub const DEGREE_TOLERANCE: f64 = 0.05;
const RETRIES: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub states: usize,
    pub agents: usize,
    pub actions: usize,
    /// Fraction of a state's enabled joint actions that lead to distinct
    /// successors.
    pub density: f64,
    /// Target fraction of confused states.
    pub info_ratio: f64,
    pub atoms: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { states: 20, agents: 2, actions: 2, density: 0.5, info_ratio: 0.0, atoms: 3, seed: 0 }
    }
}

pub fn agent_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// `p, q, r, p3, p4, ...`
pub fn atom_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            0 => "p".to_string(),
            1 => "q".to_string(),
            2 => "r".to_string(),
            _ => format!("p{i}"),
        })
        .collect()
}

pub fn generate_random_icgs(cfg: &GeneratorConfig) -> Result<Icgs> {
    if cfg.states == 0 || cfg.agents == 0 || cfg.actions == 0 {
        return Err(Error::Generation("state, agent and action counts must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.density) || !(0.0..=1.0).contains(&cfg.info_ratio) {
        return Err(Error::Generation("density and info ratio must lie in [0, 1]".into()));
    }
    let mut last = String::new();
    for attempt in 0..RETRIES {
        let seed = cfg.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match attempt_once(cfg, seed) {
            Ok(m) => {
                let deg = m.imperfect_information_degree();
                if (deg - cfg.info_ratio).abs() <= DEGREE_TOLERANCE + 1e-9 && validate_model(&m).is_valid() {
                    return Ok(m);
                }
                last = format!("realized degree {deg:.3}");
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Generation(format!(
        "no model within ±{DEGREE_TOLERANCE} of ratio {} after {RETRIES} attempts ({last})",
        cfg.info_ratio
    )))
}

fn attempt_once(cfg: &GeneratorConfig, seed: u64) -> Result<Icgs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.states;
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let agents = agent_names(cfg.agents);
    let actions: Vec<String> = (0..cfg.actions).map(|i| format!("a{i}")).collect();
    let atoms = atom_names(cfg.atoms);

    // Confused states, split into groups of 2..=4, each owned by one agent.
    let mut confused = (cfg.info_ratio * n as f64).round() as usize;
    if confused == 1 {
        confused = if cfg.info_ratio * n as f64 >= 1.0 && n >= 2 { 2 } else { 0 };
    }
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(&mut rng);
    pool.truncate(confused);
    // class[agent][state]
    let mut class: Vec<Vec<usize>> = vec![(0..n).collect(); cfg.agents];
    let mut rest = &pool[..];
    while rest.len() >= 2 {
        let size = loop {
            let s = rng.random_range(2..=4.min(rest.len()));
            if rest.len() - s != 1 {
                break s;
            }
        };
        let (group, tail) = rest.split_at(size);
        let owner = rng.random_range(0..cfg.agents);
        for &s in group {
            class[owner][s] = group[0];
        }
        rest = tail;
    }

    // Protocols, uniform per class.
    let mut protocol: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; cfg.agents];
    for a in 0..cfg.agents {
        for rep in 0..n {
            if class[a][rep] != rep {
                continue;
            }
            let mut acts: Vec<usize> = (0..cfg.actions).filter(|_| rng.random_bool(0.75)).collect();
            if acts.is_empty() {
                acts.push(rng.random_range(0..cfg.actions));
            }
            for s in 0..n {
                if class[a][s] == rep {
                    protocol[a][s] = acts.clone();
                }
            }
        }
    }
    let joints: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|s| {
            let mut out = vec![Vec::new()];
            for per_state in &protocol {
                out = out
                    .into_iter()
                    .flat_map(|prefix: Vec<usize>| {
                        per_state[s].iter().map(move |&x| {
                            let mut v = prefix.clone();
                            v.push(x);
                            v
                        })
                    })
                    .collect();
            }
            out
        })
        .collect();

    // Spanning tree from s0 so every state is reachable.
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(&mut rng);
    order.insert(0, 0);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..n {
        let open: Vec<usize> = order[..i].iter().copied().filter(|&s| children[s].len() < joints[s].len()).collect();
        let parent = open[rng.random_range(0..open.len())];
        children[parent].push(order[i]);
    }

    let mut b = IcgsBuilder::new().atoms(atoms.iter().cloned()).states(states.iter().cloned()).initial(&states[0]);
    for (a, name) in agents.iter().enumerate() {
        b = b.agent(name, actions.iter().cloned());
        for s in 0..n {
            b = b.protocol(name, &states[s], protocol[a][s].iter().map(|&x| actions[x].clone()));
        }
        for s in 0..n {
            if class[a][s] != s {
                b = b.indistinguishable(name, [states[s].clone(), states[class[a][s]].clone()]);
            }
        }
    }
    for s in 0..n {
        let mut js = joints[s].clone();
        js.shuffle(&mut rng);
        let want = ((cfg.density * js.len() as f64).round() as usize).max(1).max(children[s].len());
        let mut succ: Vec<usize> = children[s].clone();
        while succ.len() < want.min(n) {
            let t = rng.random_range(0..n);
            if !succ.contains(&t) {
                succ.push(t);
            }
        }
        for (i, j) in js.iter().enumerate() {
            let target = if i < succ.len() { succ[i] } else { succ[rng.random_range(0..succ.len())] };
            let named: Vec<(&str, &str)> =
                agents.iter().zip(j).map(|(ag, &x)| (ag.as_str(), actions[x].as_str())).collect();
            b = b.transition(&states[s], &named, &states[target]);
        }
    }
    for s in &states {
        let labels: BTreeSet<String> = atoms.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
        b = b.label(s, labels);
    }
    b.build()
}
