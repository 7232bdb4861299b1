//! Random executions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::icgs::{Icgs, StateId};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub states: Vec<StateId>,
    pub trace: Trace,
}

/// Walks `steps` states from the initial one, picking an enabled joint
/// action uniformly at random at each step. Event `i` is the labeling of
/// the `i`-th visited state.
pub fn simulate(m: &Icgs, steps: usize, seed: u64) -> Result<Simulation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(steps);
    let mut s = m.initial();
    for i in 0..steps {
        states.push(s);
        if i + 1 == steps {
            break;
        }
        let joints = m.enabled_joint_actions(s)?;
        let pick = &joints[rng.random_range(0..joints.len())];
        s = m.step(s, pick)?;
    }
    let trace = Trace::new(states.iter().map(|&s| m.label_names(s)).collect());
    Ok(Simulation { states, trace })
}
