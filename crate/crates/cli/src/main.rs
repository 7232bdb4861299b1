use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stratmon_core::experiment::{run_sweep, write_csv, SweepConfig, DEFAULT_MODELS_PER_RATIO, DEFAULT_TRACE_LEN};
use stratmon_core::generator::{generate_random_icgs, GeneratorConfig};
use stratmon_core::ispl::export_ispl;
use stratmon_core::pipeline::{static_check, EntryReport};
use stratmon_core::simulate::simulate;
use stratmon_core::submodel::DEFAULT_LIMIT;
use stratmon_core::trace::parse_event_line;
use stratmon_core::{build_monitor, model_checking_procedure, Formula, Icgs, Options, Trace, Verdict};

const EXIT_INPUT: u8 = 3;

/// Strategic verification of iCGS models by static checking and runtime monitoring.
#[derive(Parser)]
#[command(name = "stratmon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Statically check a formula on the candidate sub-models.
    Check(CheckArgs),
    /// Run an LTL monitor over a trace, or over standard input.
    Monitor(MonitorArgs),
    /// Full procedure: static checking plus runtime verification.
    Verify(VerifyArgs),
    /// Emit a random execution of a model.
    Simulate(SimulateArgs),
    /// Generate a random model.
    Gen(GenArgs),
    /// Conclusive-rate sweep over randomly generated models.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ModelFormula {
    #[arg(long)]
    model: PathBuf,
    /// Formula text, or a JSON AST when it starts with `{`.
    #[arg(long)]
    formula: String,
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    max_candidates: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: ModelFormula,
    /// Write per-candidate labeling entries as JSON.
    #[arg(long)]
    emit_result: Option<PathBuf>,
    /// Write an ISPL rendering of the model (or of the first negative
    /// sub-model when information is imperfect).
    #[arg(long)]
    export_ispl: Option<PathBuf>,
    /// Write every candidate sub-model pair plus a core sidecar into DIR.
    #[arg(long, value_name = "DIR")]
    export_candidates: Option<PathBuf>,
}

#[derive(Args)]
struct MonitorArgs {
    #[arg(long)]
    formula: String,
    /// Trace file; without it events are read from standard input.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Further atoms events may mention (comma-separated); they do not
    /// affect the verdict.
    #[arg(long, value_delimiter = ',')]
    atoms: Vec<String>,
    #[arg(long)]
    emit_dot: Option<PathBuf>,
    #[arg(long)]
    emit_json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: ModelFormula,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GenShape {
    #[arg(long, default_value_t = 20)]
    states: usize,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 3)]
    atoms: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    shape: GenShape,
    #[arg(long, default_value_t = 0.0)]
    info_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    shape: GenShape,
    /// `start:end:step` or a comma-separated list.
    #[arg(long, default_value = "0:1:0.1")]
    ratios: String,
    #[arg(long, default_value_t = DEFAULT_MODELS_PER_RATIO)]
    models_per_ratio: usize,
    #[arg(long, default_value_t = DEFAULT_TRACE_LEN)]
    trace_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    max_candidates: usize,
    /// Omit timing columns, making the CSV reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn exit_for(v: Verdict) -> u8 {
    match v {
        Verdict::True => 0,
        Verdict::False => 1,
        Verdict::Unknown => 2,
    }
}

fn parse_formula(text: &str) -> Result<Formula> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).context("formula JSON");
    }
    Ok(text.parse()?)
}

fn load_model(path: &Path) -> Result<Icgs> {
    Icgs::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn load_trace(path: &Path) -> Result<Trace> {
    Trace::load(path).with_context(|| format!("loading trace {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct CandidateEntries {
    core: Vec<String>,
    entries: Vec<EntryReport>,
}

fn check(args: CheckArgs) -> Result<u8> {
    let m = load_model(&args.common.model)?;
    let f = parse_formula(&args.common.formula)?;
    let run = static_check(&m, &f, Options { max_candidates: args.common.max_candidates })?;
    let model = &run.pre.model;

    if let Some(path) = &args.emit_result {
        let dump: Vec<CandidateEntries> = run
            .candidates
            .iter()
            .map(|(pair, result)| CandidateEntries {
                core: pair.core.iter().map(|&s| model.state_name(s).to_string()).collect(),
                entries: result
                    .entries()
                    .into_iter()
                    .map(|e| EntryReport {
                        state: model.state_name(e.state).to_string(),
                        subformula: e.subformula.to_string(),
                        tag: e.tag,
                        atom: e.atom,
                    })
                    .collect(),
            })
            .collect();
        write_out(Some(path), &pretty(&dump)?)?;
    }
    if let Some(path) = &args.export_ispl {
        let target = if model.is_perfect_information() {
            model
        } else {
            match run.candidates.first() {
                Some((pair, _)) => &pair.negative,
                None => bail!("no candidate sub-model to export"),
            }
        };
        write_out(Some(path), &export_ispl(target, std::slice::from_ref(&run.pre.formula))?)?;
    }
    if let Some(dir) = &args.export_candidates {
        std::fs::create_dir_all(dir)?;
        for (i, (pair, _)) in run.candidates.iter().enumerate() {
            write_out(Some(&dir.join(format!("candidate{i}_negative.json"))), &pair.negative.to_json_string())?;
            write_out(Some(&dir.join(format!("candidate{i}_positive.json"))), &pair.positive.to_json_string())?;
            write_out(Some(&dir.join(format!("candidate{i}_core.json"))), &pretty(&pair.sidecar(model))?)?;
        }
    }
    write_out(None, &pretty(&run.report)?)?;
    Ok(0)
}

fn monitor(args: MonitorArgs) -> Result<u8> {
    let f = parse_formula(&args.formula)?;
    let mon = build_monitor(&f)?.with_basis(args.atoms.iter().map(|a| a.trim().to_string()));
    if let Some(path) = &args.emit_dot {
        write_out(Some(path), &mon.to_dot())?;
    }
    if let Some(path) = &args.emit_json {
        write_out(Some(path), &pretty(&mon.to_json())?)?;
    }
    let mut out = io::stdout().lock();
    let mut cursor = mon.cursor();
    match &args.trace {
        Some(path) => {
            let trace = load_trace(path)?;
            for (i, event) in trace.events.iter().enumerate() {
                let v = mon.step(&mut cursor, event)?;
                writeln!(out, "{} {}", i + 1, v)?;
            }
        }
        None => {
            for (i, line) in io::stdin().lock().lines().enumerate() {
                let event = parse_event_line(line?.trim_end_matches('\r'))?;
                let v = mon.step(&mut cursor, &event)?;
                writeln!(out, "{} {}", i + 1, v)?;
                out.flush()?;
            }
        }
    }
    let v = mon.verdict(&cursor);
    writeln!(out, "verdict {v}")?;
    Ok(exit_for(v))
}

fn verify(args: VerifyArgs) -> Result<u8> {
    let m = load_model(&args.common.model)?;
    let f = parse_formula(&args.common.formula)?;
    let h = load_trace(&args.trace)?;
    let p = model_checking_procedure(&m, &f, &h, Options { max_candidates: args.common.max_candidates })?;
    for w in &p.warnings {
        eprintln!("warning: {w}");
    }
    let report = p.report(!args.no_timing);
    if let Some(path) = &args.report {
        write_out(Some(path), &pretty(&report)?)?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "verdict {} ({})", p.k, p.k.name())?;
    writeln!(out, "candidates {}", report.candidate_count)?;
    for c in &report.candidates {
        writeln!(
            out,
            "candidate {} core {{{}}} k {} mon_n {} mon_p {}",
            c.index,
            c.core.join(", "),
            c.k,
            c.mon_n,
            c.mon_p
        )?;
        writeln!(out, "  phi_n {}", c.phi_n)?;
        writeln!(out, "  phi_p {}", c.phi_p)?;
    }
    if let Some(t) = report.timing {
        writeln!(out, "timing static {:.3} ms, rv {:.3} ms, total {:.3} ms", t.static_ms, t.rv_ms, t.total_ms)?;
    }
    Ok(exit_for(p.k))
}

fn simulate_cmd(args: SimulateArgs) -> Result<u8> {
    let m = load_model(&args.model)?;
    let sim = simulate(&m, args.steps, args.seed)?;
    let text = if args.json {
        let mut s = sim.trace.to_json();
        s.push('\n');
        s
    } else {
        sim.trace.to_text()
    };
    write_out(args.output.as_deref(), &text)?;
    Ok(0)
}

fn generator_config(shape: &GenShape, info_ratio: f64, seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        states: shape.states,
        agents: shape.agents,
        actions: shape.actions,
        density: shape.density,
        info_ratio,
        atoms: shape.atoms,
        seed,
    }
}

fn gen(args: GenArgs) -> Result<u8> {
    let m = generate_random_icgs(&generator_config(&args.shape, args.info_ratio, args.seed))?;
    write_out(args.output.as_deref(), &m.to_json_string())?;
    Ok(0)
}

fn parse_ratios(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let [start, end, step] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (start, end, step) = (start?, end?, step?);
        if step <= 0.0 || end < start {
            bail!("ratio range needs start <= end and a positive step");
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        // rounded to avoid 0.30000000000000004 in the CSV
        return Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e6).round() / 1e6).collect());
    }
    text.split(',').map(|p| p.trim().parse::<f64>().with_context(|| format!("bad ratio `{p}`"))).collect()
}

fn sweep(args: SweepArgs) -> Result<u8> {
    if args.shape.atoms < 3 {
        bail!("the formula pool needs at least 3 atoms");
    }
    let cfg = SweepConfig {
        template: generator_config(&args.shape, 0.0, 0),
        ratios: parse_ratios(&args.ratios)?,
        models_per_ratio: args.models_per_ratio,
        trace_len: args.trace_len,
        seed: args.seed,
        max_candidates: args.max_candidates,
    };
    let rows = run_sweep(&cfg);
    for r in rows.iter().filter(|r| r.failures > 0) {
        eprintln!("warning: ratio {:.2}: {} runs failed", r.info_ratio, r.failures);
    }
    match &args.output {
        Some(p) => write_csv(&rows, !args.no_timing, std::fs::File::create(p)?)?,
        None => write_csv(&rows, !args.no_timing, io::stdout().lock())?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(a),
        Command::Monitor(a) => monitor(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Gen(a) => gen(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
