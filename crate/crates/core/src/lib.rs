//! Verification of strategic properties on concurrent game structures with
//! imperfect information.
//!
//! Static model checking runs on perfect-information sub-models; whatever it
//! cannot settle is handed to three-valued LTL monitors over an execution
//! trace.

pub mod atl;
pub mod checker;
pub mod error;
pub mod experiment;
pub mod formula;
pub mod generator;
pub mod icgs;
pub mod ispl;
pub mod ltl;
pub mod oracle;
pub mod pipeline;
pub mod rv;
pub mod simulate;
pub mod submodel;
pub mod trace;

pub use error::{Error, Result};
pub use formula::{Coalition, Formula, FragmentClass};
pub use icgs::{ActionId, AgentId, AtomId, History, Icgs, IcgsBuilder, JointAction, StateId};
pub use ltl::{build_monitor, Monitor, Verdict};
pub use pipeline::{model_checking_procedure, Options, Procedure, Report};
pub use trace::Trace;
