//! LTL on infinite words: Büchi automata and three-valued monitors.

mod buchi;
mod monitor;

pub use buchi::{ltl_to_buchi, ltl_to_buchi_over, BuchiAutomaton, Guard};
pub use monitor::{build_monitor, Monitor, MonitorCursor, MonitorJson, Run};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Letters are bitmasks over a formula's atoms, so at most this many atoms
/// can be tracked.
pub const MAX_TRACKED_ATOMS: usize = 16;

/// Three-valued verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "top")]
    True,
    #[serde(rename = "bottom")]
    False,
    #[serde(rename = "unknown")]
    Unknown,
}

impl Verdict {
    pub fn is_conclusive(self) -> bool {
        self != Verdict::Unknown
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::True => "⊤",
            Verdict::False => "⊥",
            Verdict::Unknown => "?",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::True => "top",
            Verdict::False => "bottom",
            Verdict::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
