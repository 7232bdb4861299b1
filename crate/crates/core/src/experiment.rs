//! Conclusive-rate sweep over randomly generated models.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formula::Formula;
use crate::generator::{agent_names, generate_random_icgs, GeneratorConfig};
use crate::pipeline::{model_checking_procedure, Options};
use crate::simulate::simulate;

pub const DEFAULT_TRACE_LEN: usize = 32;
pub const DEFAULT_MODELS_PER_RATIO: usize = 100;

/// Ten ATL templates over `p`, `q`, `r`. `A` and `B` stand for the first
/// and last agent.
const TEMPLATES: [&str; 10] = [
    "<<A>> X p",
    "<<A,B>> F q",
    "<<B>> (p U q)",
    "<<>> G p",
    "[[A]] X q",
    "<<A>> (p R q)",
    "<<B>> G (p | q)",
    "[[A,B]] (q U p)",
    "<<A>> F (p & <<B>> X q)",
    "<<>> (!r U (p | q))",
];

pub fn default_ratios() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Instantiates the template pool for a model with `agents` agents.
/// Templates mention `p`, `q` and `r`, so models need at least three atoms.
pub fn formula_pool(agents: usize) -> Vec<Formula> {
    let names = agent_names(agents.max(1));
    let (a, b) = (&names[0], &names[names.len() - 1]);
    TEMPLATES
        .iter()
        .map(|t| {
            let text = t.replace("A,B", &format!("{a},{b}")).replace("<<A>>", &format!("<<{a}>>"));
            let text = text.replace("[[A]]", &format!("[[{a}]]")).replace("<<B>>", &format!("<<{b}>>"));
            text.parse().expect("template pool parses")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub template: GeneratorConfig,
    pub ratios: Vec<f64>,
    pub models_per_ratio: usize,
    pub trace_len: usize,
    pub seed: u64,
    pub max_candidates: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            template: GeneratorConfig::default(),
            ratios: default_ratios(),
            models_per_ratio: DEFAULT_MODELS_PER_RATIO,
            trace_len: DEFAULT_TRACE_LEN,
            seed: 0,
            max_candidates: Options::default().max_candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub info_ratio: f64,
    /// Runs that completed; failures are counted separately.
    pub models_run: usize,
    pub conclusive_count: usize,
    pub conclusive_rate: f64,
    pub mean_static_ms: f64,
    pub mean_rv_ms: f64,
    pub static_time_share: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy)]
struct RunStats {
    conclusive: bool,
    static_ms: f64,
    rv_ms: f64,
}

/// splitmix64 finalizer, used to spread (seed, ratio, model) into
/// independent generator seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn model_seed(master: u64, ratio_index: usize, model: usize) -> u64 {
    mix(mix(master ^ mix(ratio_index as u64)) ^ model as u64)
}

fn run_one(cfg: &SweepConfig, pool: &[Formula], ri: usize, ratio: f64, i: usize) -> Result<RunStats> {
    let seed = model_seed(cfg.seed, ri, i);
    let gen = GeneratorConfig { info_ratio: ratio, seed, ..cfg.template.clone() };
    let m = generate_random_icgs(&gen)?;
    let sim = simulate(&m, cfg.trace_len, mix(seed))?;
    let f = &pool[i % pool.len()];
    let p = model_checking_procedure(&m, f, &sim.trace, Options { max_candidates: cfg.max_candidates })?;
    Ok(RunStats { conclusive: p.k.is_conclusive(), static_ms: p.timing.static_ms, rv_ms: p.timing.rv_ms })
}

pub fn run_sweep(cfg: &SweepConfig) -> Vec<SweepRow> {
    let pool = formula_pool(cfg.template.agents);
    let jobs: Vec<(usize, usize)> =
        (0..cfg.ratios.len()).flat_map(|ri| (0..cfg.models_per_ratio).map(move |i| (ri, i))).collect();
    let results: Vec<Result<RunStats>> =
        jobs.par_iter().map(|&(ri, i)| run_one(cfg, &pool, ri, cfg.ratios[ri], i)).collect();

    cfg.ratios
        .iter()
        .enumerate()
        .map(|(ri, &ratio)| {
            let chunk = &results[ri * cfg.models_per_ratio..(ri + 1) * cfg.models_per_ratio];
            let ok: Vec<RunStats> = chunk.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
            let n = ok.len();
            let conclusive_count = ok.iter().filter(|r| r.conclusive).count();
            let st: f64 = ok.iter().map(|r| r.static_ms).sum();
            let rv: f64 = ok.iter().map(|r| r.rv_ms).sum();
            let per = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
            SweepRow {
                info_ratio: ratio,
                models_run: n,
                conclusive_count,
                conclusive_rate: per(conclusive_count as f64),
                mean_static_ms: per(st),
                mean_rv_ms: per(rv),
                static_time_share: if st + rv > 0.0 { st / (st + rv) } else { 0.0 },
                failures: chunk.len() - n,
            }
        })
        .collect()
}

/// Writes the sweep as CSV. Without timing the output depends only on the
/// configuration.
pub fn write_csv<W: Write>(rows: &[SweepRow], with_timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["ratio", "models", "conclusive_rate"];
    if with_timing {
        header.push("static_share");
    }
    header.extend(["conclusive_count", "failures"]);
    if with_timing {
        header.extend(["mean_static_ms", "mean_rv_ms"]);
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec =
            vec![format!("{:.2}", r.info_ratio), r.models_run.to_string(), format!("{:.4}", r.conclusive_rate)];
        if with_timing {
            rec.push(format!("{:.4}", r.static_time_share));
        }
        rec.extend([r.conclusive_count.to_string(), r.failures.to_string()]);
        if with_timing {
            rec.extend([format!("{:.4}", r.mean_static_ms), format!("{:.4}", r.mean_rv_ms)]);
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow], with_timing: bool) -> String {
    let mut buf = Vec::new();
    write_csv(rows, with_timing, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}
