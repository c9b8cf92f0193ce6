//! Command-line surface for the few-copy entanglement verification toolkit.
//!
//! Subcommands mirror the pipeline: `translate` a witness into a measurement
//! set, `simulate` protocol runs against a configurable state source,
//! `analyze` records into confidence reports, `bound` a set's separable
//! maximum numerically, and `ingest` external outcome CSVs into the record
//! format.
//!
//! Exit codes: 0 success (and, for analyze, every requested bound
//! conclusive), 2 analysis ran but stayed inconclusive, 1 any error.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fewcopy_core::protocol::{analyze, run_protocol, OutcomeRecord};
use fewcopy_core::seesaw::{full_separability_bound, BoundResult, SeesawOptions};
use fewcopy_core::source::{SourceFile, StateSource};
use fewcopy_core::state::{HermitianOperator, MixedState, PureState};
use fewcopy_core::witness::{
    builtin_w1, builtin_w2, graph_witness, translate, MeasurementSet, WitnessSpec,
};
use fewcopy_core::{cluster6, graph_state, stabilizer_group, Graph, PauliString};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "fewcopy",
    version,
    about = "Probabilistic entanglement verification with few state copies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a witness into a measurement-set file.
    Translate {
        /// w1, w2, graph:<file> or custom:<file>
        #[arg(long)]
        witness: String,
        /// Output measurement-set JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the detection protocol against a simulated source.
    Simulate {
        /// w1, w2, graph:<file> or custom:<file>
        #[arg(long)]
        witness: String,
        /// ideal | white-noise | mixed | <source-config.json>
        #[arg(long, default_value = "ideal")]
        source: String,
        /// Visibility for the white-noise source.
        #[arg(long)]
        visibility: Option<f64>,
        /// Number of protocol rounds (copies consumed).
        #[arg(short = 'N', long = "rounds")]
        rounds: usize,
        /// Master seed; falls back to FEWCOPY_SEED, then OS entropy.
        #[arg(long)]
        seed: Option<u64>,
        /// Output record JSONL.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute deviation, confidence and fidelity from a record.
    Analyze {
        #[arg(long)]
        record: PathBuf,
        /// Measurement-set JSON the record was taken with.
        #[arg(long)]
        set: PathBuf,
        /// Which separability bound(s) to test against.
        #[arg(long, value_enum, default_value_t = BoundChoice::Both)]
        bound: BoundChoice,
        /// Write the per-prefix confidence curve as CSV.
        #[arg(long)]
        curve_out: Option<PathBuf>,
        /// Write the full report as JSON.
        #[arg(long)]
        report_out: Option<PathBuf>,
        /// See-saw restarts (only with --bound numeric).
        #[arg(long, default_value_t = 256)]
        restarts: usize,
        /// See-saw sweep tolerance (only with --bound numeric).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate the full-separability bound of a set numerically.
    Bound {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = 256)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the bound result (value, argmax Bloch vectors) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert an external outcome CSV (setting_id,outcome[,timestamp])
    /// into a record file.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundChoice {
    Full,
    Bisep,
    Both,
    Numeric,
}

// --- witness and graph file schemas -----------------------------------------

#[derive(Serialize, Deserialize)]
struct WitnessFile {
    format: u32,
    n: usize,
    g_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_e: Option<f64>,
    terms: Vec<WitnessTerm>,
}

#[derive(Serialize, Deserialize)]
struct WitnessTerm {
    ops: Vec<WitnessOp>,
}

#[derive(Serialize, Deserialize)]
struct WitnessOp {
    coeff: f64,
    pauli: String,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    format: u32,
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct BoundFile<'a> {
    format: u32,
    #[serde(flatten)]
    result: &'a BoundResult,
}

fn load_witness_file(path: &Path) -> Result<WitnessSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading witness file {}", path.display()))?;
    let file: WitnessFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing witness file {}", path.display()))?;
    if file.format != 1 {
        bail!("witness file {}: unsupported format {}", path.display(), file.format);
    }
    let terms = file
        .terms
        .iter()
        .enumerate()
        .map(|(k, term)| {
            let ops = term
                .ops
                .iter()
                .map(|op| {
                    let word: PauliString = op
                        .pauli
                        .parse()
                        .with_context(|| format!("term {k}, Pauli string {:?}", op.pauli))?;
                    Ok((op.coeff, word))
                })
                .collect::<Result<Vec<_>>>()?;
            HermitianOperator::new(file.n, ops).with_context(|| format!("term {k}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessSpec::new(file.n, file.g_s, file.g_e, terms)?)
}

fn load_graph_file(path: &Path) -> Result<Graph> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading graph file {}", path.display()))?;
    let file: GraphFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing graph file {}", path.display()))?;
    if file.format != 1 {
        bail!("graph file {}: unsupported format {}", path.display(), file.format);
    }
    Ok(Graph::new(file.n, file.edges)?)
}

/// A witness selector resolved to a measurement set plus, when known, the
/// ideal target state and translation constants.
struct ResolvedWitness {
    set: MeasurementSet,
    target: Option<PureState>,
    shift: Option<f64>,
    total_weight: Option<f64>,
}

fn resolve_witness(selector: &str) -> Result<ResolvedWitness> {
    if selector == "w1" {
        return Ok(ResolvedWitness {
            set: builtin_w1(),
            target: Some(cluster6()),
            shift: None,
            total_weight: None,
        });
    }
    if selector == "w2" {
        return Ok(ResolvedWitness {
            set: builtin_w2(),
            target: Some(cluster6()),
            shift: None,
            total_weight: None,
        });
    }
    if let Some(path) = selector.strip_prefix("graph:") {
        let graph = load_graph_file(Path::new(path))?;
        let n = graph.vertices();
        let generators = fewcopy_core::graph::canonical_generators(&graph);
        let group = stabilizer_group(n, &generators)?;
        let set = graph_witness(n, &group, None)?;
        eprintln!(
            "note: full-separability bound defaulted to the biseparable 3/4; \
             run `fewcopy bound` for a numeric estimate"
        );
        return Ok(ResolvedWitness {
            set,
            target: Some(graph_state(&graph)?),
            shift: None,
            total_weight: None,
        });
    }
    if let Some(path) = selector.strip_prefix("custom:") {
        let witness = load_witness_file(Path::new(path))?;
        let translation = translate(&witness)?;
        return Ok(ResolvedWitness {
            set: translation.set,
            target: None,
            shift: Some(translation.shift),
            total_weight: Some(translation.total_weight),
        });
    }
    bail!("unknown witness selector {selector:?}; expected w1, w2, graph:<file> or custom:<file>")
}

fn resolve_source(
    spec: &str,
    visibility: Option<f64>,
    target: Option<&PureState>,
) -> Result<StateSource> {
    match spec {
        "ideal" => {
            let target = target
                .ok_or_else(|| anyhow!("--source ideal needs a witness with a known target state"))?;
            Ok(StateSource::constant(MixedState::from_pure(target)))
        }
        "white-noise" => {
            let target = target.ok_or_else(|| {
                anyhow!("--source white-noise needs a witness with a known target state")
            })?;
            let v = visibility.ok_or_else(|| anyhow!("--source white-noise needs --visibility"))?;
            Ok(StateSource::white_noise(target, v)?)
        }
        "mixed" => {
            let n = target.map(PureState::qubits).unwrap_or(6);
            Ok(StateSource::constant(MixedState::maximally_mixed(n)?))
        }
        path => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading source config {path}"))?;
            let file: SourceFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing source config {path}"))?;
            if file.format != 1 {
                bail!("source config {path}: unsupported format {}", file.format);
            }
            Ok(file.config.build()?)
        }
    }
}

/// Seed precedence: flag, FEWCOPY_SEED, then OS entropy (printed so the run
/// can be reproduced).
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Ok(text) = std::env::var("FEWCOPY_SEED") {
        return text.parse().map_err(|_| anyhow!("FEWCOPY_SEED={text:?} is not a u64"));
    }
    let seed: u64 = rand::random();
    println!("seed: {seed} (generated; pass --seed {seed} to reproduce)");
    Ok(seed)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Translate { witness, out } => cmd_translate(&witness, &out),
        Command::Simulate { witness, source, visibility, rounds, seed, out } => {
            cmd_simulate(&witness, &source, visibility, rounds, seed, &out)
        }
        Command::Analyze { record, set, bound, curve_out, report_out, restarts, tol, seed } => {
            cmd_analyze(&record, &set, bound, curve_out, report_out, restarts, tol, seed)
        }
        Command::Bound { set, restarts, tol, seed, out } => cmd_bound(&set, restarts, tol, seed, out),
        Command::Ingest { csv, set, out } => cmd_ingest(&csv, &set, &out),
    }
}

fn cmd_translate(selector: &str, out: &Path) -> Result<i32> {
    let resolved = resolve_witness(selector)?;
    let set = &resolved.set;
    println!("settings: L = {}", set.len());
    if let Some(a) = resolved.shift {
        println!("shift:    a = {a}");
    }
    if let Some(tau) = resolved.total_weight {
        println!("weight:   tau = {tau}");
    }
    println!("p_s (full separability) = {}", set.full_sep_bound());
    if let Some(bs) = set.bisep_bound() {
        println!("p_s (biseparable)       = {bs}");
    }
    if let Some(pe) = set.entangled_value() {
        println!("p_e (target state)      = {pe}");
    }
    write_file(out, &set.to_json_string())?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_simulate(
    selector: &str,
    source_spec: &str,
    visibility: Option<f64>,
    rounds: usize,
    seed: Option<u64>,
    out: &Path,
) -> Result<i32> {
    if rounds == 0 {
        bail!("--rounds must be at least 1");
    }
    let resolved = resolve_witness(selector)?;
    let source = resolve_source(source_spec, visibility, resolved.target.as_ref())?;
    let seed = resolve_seed(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let record = run_protocol(&source, &resolved.set, rounds, &mut rng)?.with_seed(seed);
    write_file(out, &record.to_jsonl_string())?;
    println!(
        "simulated {} rounds on {}: S = {}",
        rounds,
        source.description(),
        record.successes()
    );
    println!("wrote {}", out.display());
    Ok(0)
}

fn print_readout(label: &str, readout: &fewcopy_core::protocol::BoundReadout) {
    if readout.confidence.conclusive {
        println!(
            "{label}: p_s = {:.6}, delta = {:+.6}, C_min = {:.6}",
            readout.bound, readout.deviation, readout.confidence.value
        );
    } else {
        println!(
            "{label}: p_s = {:.6}, delta = {:+.6} -> inconclusive",
            readout.bound, readout.deviation
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    record_path: &Path,
    set_path: &Path,
    bound: BoundChoice,
    curve_out: Option<PathBuf>,
    report_out: Option<PathBuf>,
    restarts: usize,
    tol: f64,
    seed: Option<u64>,
) -> Result<i32> {
    let file = fs::File::open(record_path)
        .with_context(|| format!("opening record {}", record_path.display()))?;
    let record = OutcomeRecord::read_jsonl(BufReader::new(file))?;
    let set_text = fs::read_to_string(set_path)
        .with_context(|| format!("reading set {}", set_path.display()))?;
    let mut set = MeasurementSet::from_json_str(&set_text)?;

    if bound == BoundChoice::Numeric {
        let seed = resolve_seed(seed)?;
        let options = SeesawOptions { restarts, tol, ..Default::default() };
        let numeric = full_separability_bound(&set, &options, seed);
        eprintln!(
            "warning: numeric bound {:.9} is a lower estimate of the separable maximum; \
             confidence against it is only sound if it matches the true bound",
            numeric.value
        );
        set = set.with_full_sep_bound(numeric.value)?;
    }
    if bound == BoundChoice::Bisep && set.bisep_bound().is_none() {
        bail!("the measurement set carries no biseparable bound");
    }

    let report = analyze(&record, &set)?;
    println!(
        "set {} (L = {}): N = {}, S = {}, p_obs = {:.6}",
        set.provenance(),
        set.len(),
        report.n,
        report.successes,
        report.p_obs
    );

    let mut conclusive = true;
    let show_full = matches!(bound, BoundChoice::Full | BoundChoice::Both | BoundChoice::Numeric);
    let show_bisep = matches!(bound, BoundChoice::Bisep | BoundChoice::Both);
    if show_full {
        print_readout("full separability", &report.full);
        conclusive &= report.full.confidence.conclusive;
    }
    if show_bisep {
        if let Some(readout) = &report.bisep {
            print_readout("biseparable     ", readout);
            conclusive &= readout.confidence.conclusive;
        }
    }
    if let Some(fidelity) = &report.fidelity {
        println!("fidelity: F = {:.4} +- {:.4}", fidelity.value, fidelity.std_error);
    }

    if let Some(path) = curve_out {
        write_file(&path, &report.curve_csv())?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = report_out {
        write_file(&path, &report.to_json_string())?;
        println!("wrote {}", path.display());
    }

    Ok(if conclusive { 0 } else { EXIT_INCONCLUSIVE })
}

fn cmd_bound(
    set_path: &Path,
    restarts: usize,
    tol: f64,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<i32> {
    let set_text = fs::read_to_string(set_path)
        .with_context(|| format!("reading set {}", set_path.display()))?;
    let set = MeasurementSet::from_json_str(&set_text)?;
    let seed = resolve_seed(seed)?;
    let options = SeesawOptions { restarts, tol, ..Default::default() };
    let result = full_separability_bound(&set, &options, seed);
    println!("estimated p_fs = {:.9}", result.value);
    println!("converged: {} ({} restarts)", result.converged, result.restarts_used);
    for (q, bloch) in result.argmax.iter().enumerate() {
        println!("qubit {q}: bloch = ({:+.6}, {:+.6}, {:+.6})", bloch[0], bloch[1], bloch[2]);
    }
    eprintln!(
        "warning: the see-saw value is a lower bound on the separable maximum; \
         use it as p_s only when it matches a known analytic value"
    );
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&BoundFile { format: 1, result: &result })?;
        write_file(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn cmd_ingest(csv_path: &Path, set_path: &Path, out: &Path) -> Result<i32> {
    let set_text = fs::read_to_string(set_path)
        .with_context(|| format!("reading set {}", set_path.display()))?;
    let set = MeasurementSet::from_json_str(&set_text)?;
    let text = fs::read_to_string(csv_path)
        .with_context(|| format!("reading CSV {}", csv_path.display()))?;

    let mut rounds = Vec::new();
    let mut skipped = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let first = fields.next().unwrap_or_default();
        if lineno == 0 && first.parse::<usize>().is_err() {
            continue; // header row
        }
        let setting: usize = first
            .parse()
            .map_err(|_| anyhow!("line {}: setting id {first:?} is not an integer", lineno + 1))?;
        if setting >= set.len() {
            return Err(fewcopy_core::Error::UnknownSettingId { setting, len: set.len() }.into());
        }
        let outcome_field = fields.next().unwrap_or_default();
        if outcome_field.is_empty() {
            // no coincidence registered for this draw; drop the row
            skipped += 1;
            continue;
        }
        let outcome = match outcome_field {
            "0" => false,
            "1" => true,
            other => return Err(fewcopy_core::Error::NonBinaryOutcome(other.into()).into()),
        };
        rounds.push((setting, outcome));
    }
    if rounds.is_empty() {
        bail!("no usable rows in {}", csv_path.display());
    }

    let record = OutcomeRecord::new(
        set.provenance(),
        rounds,
        fewcopy_core::RecordMeta {
            seed: None,
            source: Some(format!("ingested from {}", csv_path.display())),
            timestamp: None,
        },
    );
    write_file(out, &record.to_jsonl_string())?;
    println!("ingested {} rounds ({} empty-outcome rows dropped)", record.len(), skipped);
    println!("wrote {}", out.display());
    Ok(0)
}
