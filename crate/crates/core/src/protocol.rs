//! The detection protocol: draw a random observable per copy, collect one
//! bit per copy, and turn the success count into confidence statements.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::StateSource;
use crate::state::born_sample;
use crate::stats::{confidence_min, Confidence};
use crate::witness::{MeasurementSet, Provenance};

/// Header and rows of a protocol run. Per-round setting indices are kept so
/// fidelity and per-setting diagnostics stay computable after the fact.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    set_id: Provenance,
    rounds: Vec<(usize, bool)>,
    meta: RecordMeta,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl OutcomeRecord {
    pub fn new(set_id: Provenance, rounds: Vec<(usize, bool)>, meta: RecordMeta) -> Self {
        OutcomeRecord { set_id, rounds, meta }
    }

    pub fn set_id(&self) -> Provenance {
        self.set_id
    }

    pub fn rounds(&self) -> &[(usize, bool)] {
        &self.rounds
    }

    pub fn meta(&self) -> &RecordMeta {
        &self.meta
    }

    /// Record the master seed the run was produced with.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.meta.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn successes(&self) -> usize {
        self.rounds.iter().filter(|(_, outcome)| *outcome).count()
    }

    /// One header object, then one `{round, setting, outcome}` object per
    /// line.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        let header = RecordHeader {
            format: 1,
            set_id: self.set_id,
            rounds: self.rounds.len(),
            meta: self.meta.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for (idx, (setting, outcome)) in self.rounds.iter().enumerate() {
            let row = RecordRow { round: idx, setting: *setting, outcome: u8::from(*outcome) };
            serde_json::to_writer(&mut w, &row)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header_line = lines
            .next()
            .ok_or(Error::Format { what: "record", detail: "file is empty".into() })??;
        let header: RecordHeader = serde_json::from_str(&header_line)?;
        if header.format != 1 {
            return Err(Error::Format {
                what: "record",
                detail: format!("unsupported format {}", header.format),
            });
        }
        let mut rounds = Vec::with_capacity(header.rounds);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: RecordRow = serde_json::from_str(&line)?;
            if row.round != rounds.len() {
                return Err(Error::Format {
                    what: "record",
                    detail: format!("round {} out of order", row.round),
                });
            }
            let outcome = match row.outcome {
                0 => false,
                1 => true,
                other => return Err(Error::NonBinaryOutcome(other.to_string())),
            };
            rounds.push((row.setting, outcome));
        }
        if rounds.len() != header.rounds {
            return Err(Error::Format {
                what: "record",
                detail: format!(
                    "header promises {} rounds, found {}",
                    header.rounds,
                    rounds.len()
                ),
            });
        }
        Ok(OutcomeRecord { set_id: header.set_id, rounds, meta: header.meta })
    }

    pub fn from_jsonl_str(text: &str) -> Result<Self> {
        Self::read_jsonl(text.as_bytes())
    }

    fn check_against(&self, set: &MeasurementSet) -> Result<()> {
        if self.set_id != set.provenance() {
            return Err(Error::MismatchedSet(format!(
                "record was taken with {}, set is {}",
                self.set_id,
                set.provenance()
            )));
        }
        for (setting, _) in &self.rounds {
            if *setting >= set.len() {
                return Err(Error::MismatchedSet(format!(
                    "setting index {} out of range (L = {})",
                    setting,
                    set.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RecordHeader {
    format: u32,
    set_id: Provenance,
    rounds: usize,
    #[serde(flatten)]
    meta: RecordMeta,
}

#[derive(Serialize, Deserialize)]
struct RecordRow {
    round: usize,
    setting: usize,
    outcome: u8,
}

/// Confidence readout against one separability bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReadout {
    pub bound: f64,
    pub deviation: f64,
    pub confidence: Confidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub successes: usize,
    pub full: Confidence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisep: Option<Confidence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Full analysis of a record: headline counts, per-bound confidences, the
/// per-prefix confidence curve and (for uniform stabilizer sets) the
/// fidelity estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub format: u32,
    pub n: usize,
    pub successes: usize,
    pub p_obs: f64,
    pub full: BoundReadout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisep: Option<BoundReadout>,
    pub curve: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityEstimate>,
}

impl VerificationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Curve as CSV with columns N,S,C_min_full,C_min_bisep (last column
    /// empty when no biseparable bound was available).
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("N,S,C_min_full,C_min_bisep\n");
        for point in &self.curve {
            let bisep = point
                .bisep
                .map(|c| c.value.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                point.n, point.successes, point.full.value, bisep
            ));
        }
        out
    }
}

/// Draw index k with probability proportional to weights (which sum to 1).
fn draw_setting(weights: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}

/// Run the protocol for `n` rounds: per round, draw a setting with its
/// weight, take one copy from the source, and record the binary outcome.
pub fn run_protocol(
    source: &StateSource,
    set: &MeasurementSet,
    n: usize,
    rng: &mut impl Rng,
) -> Result<OutcomeRecord> {
    if n == 0 {
        return Err(Error::Domain("the protocol needs at least one round".into()));
    }
    if source.qubits() != set.qubits() {
        return Err(Error::DimensionMismatch { expected: set.qubits(), got: source.qubits() });
    }
    // A constant source sees the same state every round, so each setting's
    // success probability can be computed once.
    let mut cache: Vec<Option<f64>> = vec![None; set.len()];
    let mut rounds = Vec::with_capacity(n);
    for round in 0..n {
        let setting = draw_setting(set.weights(), rng);
        let p = if source.is_constant() {
            match cache[setting] {
                Some(p) => p,
                None => {
                    let p = set
                        .observable(setting)
                        .success_probability(source.next_state(round)?)?;
                    cache[setting] = Some(p);
                    p
                }
            }
        } else {
            set.observable(setting).success_probability(source.next_state(round)?)?
        };
        let outcome = born_sample(p, rng)?;
        rounds.push((setting, outcome));
    }
    Ok(OutcomeRecord {
        set_id: set.provenance(),
        rounds,
        meta: RecordMeta { seed: None, source: Some(source.description().into()), timestamp: None },
    })
}

/// Analyze a record against its measurement set: deviation, confidence per
/// available bound, the full per-prefix curve and, for uniform stabilizer
/// sets, the fidelity estimate.
pub fn analyze(record: &OutcomeRecord, set: &MeasurementSet) -> Result<VerificationReport> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    record.check_against(set)?;

    let n = record.len();
    let successes = record.successes();
    let p_obs = successes as f64 / n as f64;
    let p_fs = set.full_sep_bound();
    let p_bs = set.bisep_bound();

    let readout = |s: usize, rounds: usize, bound: f64| -> Result<BoundReadout> {
        let deviation = s as f64 / rounds as f64 - bound;
        Ok(BoundReadout {
            bound,
            deviation,
            confidence: confidence_min(deviation, bound, rounds as u64)?,
        })
    };

    let mut curve = Vec::with_capacity(n);
    let mut running = 0usize;
    for (idx, (_, outcome)) in record.rounds().iter().enumerate() {
        running += usize::from(*outcome);
        let prefix = idx + 1;
        curve.push(CurvePoint {
            n: prefix,
            successes: running,
            full: readout(running, prefix, p_fs)?.confidence,
            bisep: p_bs.map(|b| readout(running, prefix, b)).transpose()?.map(|r| r.confidence),
        });
    }

    let fidelity = if record.set_id.is_uniform_stabilizer() {
        Some(estimate_fidelity(record)?)
    } else {
        None
    };

    Ok(VerificationReport {
        format: 1,
        n,
        successes,
        p_obs,
        full: readout(successes, n, p_fs)?,
        bisep: p_bs.map(|b| readout(successes, n, b)).transpose()?,
        curve,
        fidelity,
    })
}

/// Fidelity readout for uniform stabilizer sampling: mean success is
/// (1 + F) / 2, so F = 2 S/N - 1 with the first-order binomial standard
/// error 2 sqrt(p (1 - p) / N).
pub fn estimate_fidelity(record: &OutcomeRecord) -> Result<FidelityEstimate> {
    if !record.set_id.is_uniform_stabilizer() {
        return Err(Error::WrongProvenance { found: record.set_id.to_string() });
    }
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let n = record.len() as f64;
    let p = record.successes() as f64 / n;
    Ok(FidelityEstimate {
        value: 2.0 * p - 1.0,
        std_error: 2.0 * (p * (1.0 - p) / n).sqrt(),
    })
}

/// Monte Carlo false-positive probe: run the protocol `trials` times on a
/// separable source and report the fraction of runs whose deviation from
/// the full separability bound reaches `delta_star`.
///
/// The caller asserts separability (weighted success <= the set's full
/// bound); under that premise the rate must stay below
/// exp(-N D(p_s + delta* || p_s)) up to Monte Carlo noise, drifting source
/// or not. Trial t draws from stream t of the master seed, so the estimate
/// is independent of any execution order.
pub fn false_positive_rate(
    source: &StateSource,
    set: &MeasurementSet,
    n: usize,
    delta_star: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if n == 0 || trials == 0 {
        return Err(Error::Domain("need at least one round and one trial".into()));
    }
    // Per-round, per-setting success probabilities; one row for a constant
    // source, one per round otherwise.
    let distinct_rounds = if source.is_constant() { 1 } else { n };
    let mut probs = Vec::with_capacity(distinct_rounds);
    for round in 0..distinct_rounds {
        let state = source.next_state(round)?;
        let row: Vec<f64> = set
            .observables()
            .iter()
            .map(|m| m.success_probability(state))
            .collect::<Result<_>>()?;
        probs.push(row);
    }

    let p_s = set.full_sep_bound();
    let threshold = p_s + delta_star;
    let mut exceedances = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut successes = 0usize;
        for round in 0..n {
            let setting = draw_setting(set.weights(), &mut rng);
            let p = probs[round.min(distinct_rounds - 1)][setting];
            if born_sample(p, &mut rng)? {
                successes += 1;
            }
        }
        if successes as f64 / n as f64 >= threshold {
            exceedances += 1;
        }
    }
    Ok(exceedances as f64 / trials as f64)
}
