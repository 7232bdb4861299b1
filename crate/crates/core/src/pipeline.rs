//! End-to-end procedure: preprocessing, candidate sub-models, static
//! checking, runtime verification, and the merged report.

use std::time::Instant;

use serde::Serialize;

use crate::atl::check_atl;
use crate::checker::{check_subformulas, CheckResult, Tag};
use crate::error::{Error, Result};
use crate::formula::{eliminate_negated_atoms, Formula, NegationElimination};
use crate::icgs::{validate_model, Icgs};
use crate::ltl::Verdict;
use crate::rv::{consistent_states, lift_trace, runtime_verification, Outcome};
use crate::submodel::{find_submodels, SubmodelPair, DEFAULT_LIMIT};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub max_candidates: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { max_candidates: DEFAULT_LIMIT }
    }
}

/// Validates the model and formula, pushes the formula into negation
/// normal form and replaces negated atoms.
pub fn preprocess(m: &Icgs, f: &Formula) -> Result<NegationElimination> {
    let report = validate_model(m);
    if !report.is_valid() {
        return Err(Error::InvalidModel(report.to_string()));
    }
    f.check_against(m)?;
    eliminate_negated_atoms(m, f)
}

#[derive(Debug, Clone)]
pub struct CandidateRun {
    pub pair: SubmodelPair,
    pub result: CheckResult,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    pub static_ms: f64,
    pub rv_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Procedure {
    pub k: Verdict,
    pub input: Formula,
    pub pre: NegationElimination,
    pub candidates: Vec<CandidateRun>,
    /// Some candidate concluded ⊤ and another ⊥.
    pub candidate_conflict: bool,
    pub trace_is_history: bool,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Runs the whole procedure on a trace over the model's own atoms.
pub fn model_checking_procedure(m: &Icgs, f: &Formula, h: &Trace, opts: Options) -> Result<Procedure> {
    let start = Instant::now();
    h.check_atoms(m.atoms())?;
    let t = Instant::now();
    let pre = preprocess(m, f)?;
    let pairs = find_submodels(&pre.model, opts.max_candidates)?;
    let mut static_ms = ms(t);

    let t = Instant::now();
    let layers = consistent_states(m, h);
    let mut rv_ms = ms(t);

    let mut warnings = Vec::new();
    if layers.is_none() {
        warnings.push(
            "trace is not a history of the model from its initial state; n-atoms omitted, p-atoms added everywhere"
                .to_string(),
        );
    }

    let mut candidates = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let t = Instant::now();
        let result = check_subformulas(&pre.model, &pair, &pre.formula);
        static_ms += ms(t);

        let t = Instant::now();
        let lifted = lift_trace(h, &pre.introduced, layers.as_deref(), &result);
        let outcome = runtime_verification(&pre.model, &pre.formula, &lifted, &result)?;
        rv_ms += ms(t);
        if outcome.conflict {
            warnings.push(format!(
                "candidate {}: ψₙ monitor gave ⊤ and ψₚ monitor gave ⊥; reported as ?, a literal reading of the later check would give ⊥",
                candidates.len()
            ));
        }
        candidates.push(CandidateRun { pair, result, outcome });
    }

    let any = |v: Verdict| candidates.iter().any(|c| c.outcome.k == v);
    let candidate_conflict = any(Verdict::True) && any(Verdict::False);
    if candidate_conflict {
        warnings.push(
            "candidates disagree: ⊤ certifies the grand-coalition variant, ⊥ refutes the empty-coalition variant"
                .to_string(),
        );
    }
    let k = if any(Verdict::True) {
        Verdict::True
    } else if any(Verdict::False) {
        Verdict::False
    } else {
        Verdict::Unknown
    };
    Ok(Procedure {
        k,
        input: f.clone(),
        pre,
        candidates,
        candidate_conflict,
        trace_is_history: layers.is_some(),
        warnings,
        timing: Timing { static_ms, rv_ms, total_ms: ms(start) },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub state: String,
    pub subformula: String,
    pub tag: Tag,
    pub atom: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub index: usize,
    pub core: Vec<String>,
    pub k: Verdict,
    pub mon_n: Verdict,
    pub mon_p: Verdict,
    pub conflict: bool,
    pub phi_n: String,
    pub phi_p: String,
    pub phi_mc: Vec<String>,
    pub phi_rv: Vec<String>,
    pub phi_unchk: Vec<String>,
    pub entries: Vec<EntryReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub formula: String,
    pub preprocessed: String,
    pub k: Verdict,
    pub candidate_count: usize,
    pub candidate_conflict: bool,
    pub trace_is_history: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    pub candidates: Vec<CandidateReport>,
}

fn printed(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(Formula::to_string).collect()
}

impl Procedure {
    pub fn report(&self, with_timing: bool) -> Report {
        let m = &self.pre.model;
        let candidates = self
            .candidates
            .iter()
            .enumerate()
            .map(|(index, c)| CandidateReport {
                index,
                core: c.pair.core.iter().map(|&s| m.state_name(s).to_string()).collect(),
                k: c.outcome.k,
                mon_n: c.outcome.mon_n,
                mon_p: c.outcome.mon_p,
                conflict: c.outcome.conflict,
                phi_n: c.outcome.phi_n.to_string(),
                phi_p: c.outcome.phi_p.to_string(),
                phi_mc: printed(&c.outcome.phi_mc),
                phi_rv: printed(&c.outcome.phi_rv),
                phi_unchk: printed(&c.outcome.phi_unchk),
                entries: c
                    .result
                    .entries()
                    .into_iter()
                    .map(|e| EntryReport {
                        state: m.state_name(e.state).to_string(),
                        subformula: e.subformula.to_string(),
                        tag: e.tag,
                        atom: e.atom,
                    })
                    .collect(),
            })
            .collect();
        Report {
            formula: self.input.to_string(),
            preprocessed: self.pre.formula.to_string(),
            k: self.k,
            candidate_count: self.candidates.len(),
            candidate_conflict: self.candidate_conflict,
            trace_is_history: self.trace_is_history,
            warnings: self.warnings.clone(),
            timing: with_timing.then_some(self.timing),
            candidates,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckedReport {
    pub subformula: String,
    /// Core states where the subformula certainly holds.
    pub sound_true: Vec<String>,
    /// Core states where it certainly fails.
    pub sound_false: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticCandidate {
    pub core: Vec<String>,
    pub checked: Vec<CheckedReport>,
}

/// Output of static checking alone.
#[derive(Debug, Clone, Serialize)]
pub struct StaticReport {
    pub formula: String,
    pub preprocessed: String,
    pub perfect_information: bool,
    /// Satisfying states, present when the model has perfect information
    /// and the formula is in the ATL fragment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfying: Option<Vec<String>>,
    pub candidates: Vec<StaticCandidate>,
}

pub struct StaticRun {
    pub report: StaticReport,
    pub pre: NegationElimination,
    pub candidates: Vec<(SubmodelPair, CheckResult)>,
}

pub fn static_check(m: &Icgs, f: &Formula, opts: Options) -> Result<StaticRun> {
    let pre = preprocess(m, f)?;
    let names = |it: &mut dyn Iterator<Item = crate::icgs::StateId>| -> Vec<String> {
        it.map(|s| pre.model.state_name(s).to_string()).collect()
    };
    let perfect = m.is_perfect_information();
    let satisfying = if perfect && pre.formula.is_atl_state() {
        Some(names(&mut check_atl(&pre.model, &pre.formula)?.into_iter()))
    } else {
        None
    };
    let mut candidates = Vec::new();
    let mut reports = Vec::new();
    for pair in find_submodels(&pre.model, opts.max_candidates)? {
        let result = check_subformulas(&pre.model, &pair, &pre.formula);
        let checked = result
            .checked
            .iter()
            .map(|c| CheckedReport {
                subformula: c.subformula.to_string(),
                sound_true: names(&mut c.n_states.iter().copied()),
                sound_false: names(&mut pair.core.iter().copied().filter(|s| !c.p_states.contains(s))),
            })
            .collect();
        reports.push(StaticCandidate { core: names(&mut pair.core.iter().copied()), checked });
        candidates.push((pair, result));
    }
    let report = StaticReport {
        formula: f.to_string(),
        preprocessed: pre.formula.to_string(),
        perfect_information: perfect,
        satisfying,
        candidates: reports,
    };
    Ok(StaticRun { report, pre, candidates })
}
