//! Translation of entanglement witnesses into weighted sets of binary
//! observables.
//!
//! A witness in the form W = g_s I - O with O = sum_k W_k is turned into a
//! sampling experiment: shift every local term by the smallest constant `a`
//! that makes it positive semidefinite, spectrally decompose each shifted
//! term into eigen-projectors, and sample those projectors with weights
//! proportional to their eigenvalues. Any separable state then succeeds with
//! probability at most p_s = (g_s + a q) / tau, where tau is the total
//! eigenvalue mass. One observable, one copy, one bit per round.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{generators6, stabilizer_group};
use crate::linalg::CMatrix;
use crate::observable::BinaryObservable;
use crate::pauli::{check_qubit_count, PauliString};
use crate::state::{HermitianOperator, QuantumState};

const EIGENVALUE_CUTOFF: f64 = 1e-10;
const CLUSTERING_TOL: f64 = 1e-8;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Where a measurement set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Translated,
    BuiltinW1,
    BuiltinW2,
    GraphWitness,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Provenance::Translated => "translated",
            Provenance::BuiltinW1 => "builtin-w1",
            Provenance::BuiltinW2 => "builtin-w2",
            Provenance::GraphWitness => "graph-witness",
        };
        write!(f, "{s}")
    }
}

impl Provenance {
    /// Sets that uniformly sample a full stabilizer group; only these admit
    /// the fidelity readout F = 2 S/N - 1.
    pub fn is_uniform_stabilizer(&self) -> bool {
        matches!(self, Provenance::BuiltinW2 | Provenance::GraphWitness)
    }
}

/// A witness presented as W = g_s I - sum_k W_k, plus optionally the value
/// g_e the target entangled state achieves.
#[derive(Debug, Clone)]
pub struct WitnessSpec {
    n: usize,
    separable_bound: f64,
    entangled_value: Option<f64>,
    terms: Vec<HermitianOperator>,
}

impl WitnessSpec {
    pub fn new(
        n: usize,
        separable_bound: f64,
        entangled_value: Option<f64>,
        terms: Vec<HermitianOperator>,
    ) -> Result<Self> {
        check_qubit_count(n)?;
        if terms.is_empty() {
            return Err(Error::Format {
                what: "witness",
                detail: "a witness needs at least one local term".into(),
            });
        }
        if !separable_bound.is_finite() {
            return Err(Error::NonFiniteCoefficient(separable_bound));
        }
        for t in &terms {
            if t.qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: t.qubits() });
            }
        }
        Ok(WitnessSpec { n, separable_bound, entangled_value, terms })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn separable_bound(&self) -> f64 {
        self.separable_bound
    }

    pub fn entangled_value(&self) -> Option<f64> {
        self.entangled_value
    }

    pub fn terms(&self) -> &[HermitianOperator] {
        &self.terms
    }
}

/// Weighted set of binary observables with its separability bounds.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    n: usize,
    observables: Vec<BinaryObservable>,
    weights: Vec<f64>,
    full_sep_bound: f64,
    bisep_bound: Option<f64>,
    entangled_value: Option<f64>,
    provenance: Provenance,
}

impl MeasurementSet {
    pub fn new(
        n: usize,
        observables: Vec<BinaryObservable>,
        weights: Vec<f64>,
        full_sep_bound: f64,
        bisep_bound: Option<f64>,
        entangled_value: Option<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_qubit_count(n)?;
        if observables.is_empty() {
            return Err(Error::InvalidMeasurementSet("no observables".into()));
        }
        if observables.len() != weights.len() {
            return Err(Error::InvalidMeasurementSet(format!(
                "{} observables but {} weights",
                observables.len(),
                weights.len()
            )));
        }
        for m in &observables {
            if m.qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.qubits() });
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidMeasurementSet("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasurementSet(format!(
                "weights sum to {total}, not 1"
            )));
        }
        // bound chain: 0 <= p_s_full <= p_s_bisep (when present) < p_e <= 1
        if !(0.0..=1.0 + 1e-12).contains(&full_sep_bound) {
            return Err(Error::InvalidMeasurementSet(format!(
                "full separability bound {full_sep_bound} outside [0, 1]"
            )));
        }
        if let Some(bs) = bisep_bound {
            if bs < full_sep_bound - 1e-12 || bs > 1.0 + 1e-12 {
                return Err(Error::InvalidMeasurementSet(format!(
                    "biseparable bound {bs} below the full bound or above 1"
                )));
            }
        }
        if let Some(pe) = entangled_value {
            let floor = bisep_bound.unwrap_or(full_sep_bound);
            if pe <= floor || pe > 1.0 + 1e-12 {
                return Err(Error::InvalidMeasurementSet(format!(
                    "entangled value {pe} must exceed the separable bounds and stay <= 1"
                )));
            }
        }
        Ok(MeasurementSet {
            n,
            observables,
            weights,
            full_sep_bound: full_sep_bound.min(1.0),
            bisep_bound,
            entangled_value: entangled_value.map(|p| p.min(1.0)),
            provenance,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Number of measurement settings L.
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[BinaryObservable] {
        &self.observables
    }

    pub fn observable(&self, k: usize) -> &BinaryObservable {
        &self.observables[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn full_sep_bound(&self) -> f64 {
        self.full_sep_bound
    }

    pub fn bisep_bound(&self) -> Option<f64> {
        self.bisep_bound
    }

    pub fn entangled_value(&self) -> Option<f64> {
        self.entangled_value
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Replace the full separability bound (e.g. with a numerically derived
    /// value).
    pub fn with_full_sep_bound(self, bound: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.observables,
            self.weights,
            bound,
            self.bisep_bound,
            self.entangled_value,
            self.provenance,
        )
    }

    /// Attach a biseparable bound supplied by the caller.
    pub fn with_bisep_bound(self, bound: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.observables,
            self.weights,
            self.full_sep_bound,
            Some(bound),
            self.entangled_value,
            self.provenance,
        )
    }

    fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Weight-averaged success probability sum_k eps_k Tr(M_k rho).
    pub fn mean_success(&self, state: &impl QuantumState) -> Result<f64> {
        let mut p = 0.0;
        for (m, w) in self.observables.iter().zip(&self.weights) {
            p += w * m.success_probability(state)?;
        }
        Ok(p)
    }

    /// sum_k eps_k M_k as a dense operator.
    pub fn weighted_operator(&self) -> CMatrix {
        let mut a = CMatrix::zeros(1 << self.n);
        for (m, w) in self.observables.iter().zip(&self.weights) {
            a.add_scaled(Complex64::new(*w, 0.0), m.matrix());
        }
        a
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SetFile::from(self)).expect("serializable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&SetFile::from(self)).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SetFile = serde_json::from_str(text)?;
        file.build()
    }
}

/// Result of translating a witness: the sampling set plus the shift and
/// normalization the translation produced.
#[derive(Debug, Clone)]
pub struct Translation {
    pub set: MeasurementSet,
    /// Constant added to every local term to make it positive semidefinite.
    pub shift: f64,
    /// Total eigenvalue mass tau; weights are eigenvalue / tau.
    pub total_weight: f64,
}

/// Translate a witness into a measurement set.
///
/// Every local term is shifted by a single global constant
/// a = max(0, -min_k lambda_min(W_k)) and spectrally decomposed; eigenvalues
/// below 1e-10 are dropped and degenerate ones (within 1e-8) share one
/// eigen-projector. The separable bound becomes (g_s + a q) / tau, and when
/// the witness carries a target value g_e, the entangled value
/// (g_e + a q) / tau is filled in as well.
pub fn translate(witness: &WitnessSpec) -> Result<Translation> {
    let n = witness.qubits();
    let q = witness.terms().len();
    let matrices: Vec<CMatrix> = witness.terms().iter().map(|t| t.matrix()).collect();
    let decompositions: Vec<(Vec<f64>, CMatrix)> = matrices.iter().map(|m| m.eigh()).collect();

    let min_eig = decompositions
        .iter()
        .filter_map(|(vals, _)| vals.first().copied())
        .fold(f64::INFINITY, f64::min);
    let shift = (-min_eig).max(0.0);

    let mut observables = Vec::new();
    let mut eigenvalues = Vec::new();
    for (vals, vecs) in &decompositions {
        // shifted spectrum, grouped into one projector per distinct value
        let dim = vecs.dim();
        let mut idx = 0;
        while idx < dim {
            let lambda = vals[idx] + shift;
            if lambda <= EIGENVALUE_CUTOFF {
                idx += 1;
                continue;
            }
            let mut cluster = vec![idx];
            while idx + cluster.len() < dim
                && (vals[idx + cluster.len()] + shift - lambda).abs() <= CLUSTERING_TOL
            {
                cluster.push(idx + cluster.len());
            }
            let mut projector = CMatrix::zeros(dim);
            let mut lambda_sum = 0.0;
            for &c in &cluster {
                let col = vecs.column(c);
                projector.add_scaled(Complex64::new(1.0, 0.0), &CMatrix::outer(&col));
                lambda_sum += vals[c] + shift;
            }
            observables.push(BinaryObservable::from_matrix(n, projector)?);
            eigenvalues.push(lambda_sum / cluster.len() as f64);
            idx += cluster.len();
        }
    }

    if observables.is_empty() {
        return Err(Error::EmptyDecomposition);
    }

    let total_weight: f64 = eigenvalues.iter().sum();
    let weights: Vec<f64> = eigenvalues.iter().map(|l| l / total_weight).collect();
    let p_s = (witness.separable_bound() + shift * q as f64) / total_weight;
    if !(0.0..=1.0 + 1e-9).contains(&p_s) {
        return Err(Error::Domain(format!(
            "translated separable bound {p_s} leaves [0, 1]; check g_s"
        )));
    }
    let p_e = witness
        .entangled_value()
        .map(|ge| (ge + shift * q as f64) / total_weight);

    let set = MeasurementSet::new(
        n,
        observables,
        weights,
        p_s.min(1.0),
        None,
        p_e,
        Provenance::Translated,
    )?;
    Ok(Translation { set, shift, total_weight })
}

/// The uniform stabilizer-sampling set: one observable (I + S_k) / 2 per
/// group element, weight 1 / 2^n each.
///
/// The biseparable bound 3/4 comes with the construction; the tighter full
/// separability bound must be supplied by the caller (usually from the
/// numeric optimizer) and falls back to the safe 3/4 otherwise.
pub fn graph_witness(
    n: usize,
    stabilizers: &[PauliString],
    full_sep_bound: Option<f64>,
) -> Result<MeasurementSet> {
    check_qubit_count(n)?;
    let len = stabilizers.len();
    if len == 0 || len & (len - 1) != 0 {
        return Err(Error::NotAGroup(format!("{len} elements is not a power of two")));
    }
    let identity = PauliString::identity(n)?;
    if !stabilizers.contains(&identity) {
        return Err(Error::NotAGroup("the +1 identity is missing".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in stabilizers {
        if s.qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.qubits() });
        }
        let key: String = s.letters().iter().map(|l| l.to_char()).collect();
        if !seen.insert(key) {
            return Err(Error::NotAGroup(format!("{s} appears twice up to sign")));
        }
    }
    for a in stabilizers {
        for b in stabilizers {
            let prod = a.multiply(b).map_err(|_| {
                Error::NotAGroup(format!("{a} and {b} do not commute"))
            })?;
            if !stabilizers.contains(&prod) {
                return Err(Error::NotAGroup(format!("{a} * {b} = {prod} is not a member")));
            }
        }
    }

    let observables = stabilizers
        .iter()
        .map(|s| BinaryObservable::from_factors(n, vec![s.clone()]))
        .collect::<Result<Vec<_>>>()?;
    let weights = vec![1.0 / len as f64; len];
    MeasurementSet::new(
        n,
        observables,
        weights,
        full_sep_bound.unwrap_or(0.75),
        Some(0.75),
        Some(1.0),
        Provenance::GraphWitness,
    )
}

/// The two-setting witness set for the six-qubit cluster state:
/// M1 = (I+G1)(I+G3)(I+G5)/8 and M2 = (I+G2)(I+G4)(I+G6)/8, drawn uniformly.
pub fn builtin_w1() -> MeasurementSet {
    let g = generators6();
    let m1 = BinaryObservable::from_factors(6, vec![g[0].clone(), g[2].clone(), g[4].clone()])
        .expect("static observable");
    let m2 = BinaryObservable::from_factors(6, vec![g[1].clone(), g[3].clone(), g[5].clone()])
        .expect("static observable");
    MeasurementSet::new(
        6,
        vec![m1, m2],
        vec![0.5, 0.5],
        9.0 / 16.0,
        Some(0.75),
        Some(1.0),
        Provenance::BuiltinW1,
    )
    .expect("static set")
}

/// Uniform sampling over all 64 cluster-state stabilizers.
pub fn builtin_w2() -> MeasurementSet {
    let group = stabilizer_group(6, &generators6()).expect("static group");
    graph_witness(6, &group, Some(5.0 / 8.0))
        .expect("static set")
        .with_provenance(Provenance::BuiltinW2)
}

// --- file format ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SetFile {
    format: u32,
    n: usize,
    provenance: Provenance,
    observables: Vec<ObservableRepr>,
    weights: Vec<f64>,
    p_s_full: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_s_bisep: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_e: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ObservableRepr {
    Factors { factors: Vec<PauliString> },
    Matrix { matrix: String },
}

impl From<&MeasurementSet> for SetFile {
    fn from(set: &MeasurementSet) -> Self {
        let observables = set
            .observables
            .iter()
            .map(|m| match m.factors() {
                Some(fs) => ObservableRepr::Factors { factors: fs.to_vec() },
                None => ObservableRepr::Matrix { matrix: encode_matrix(m.matrix()) },
            })
            .collect();
        SetFile {
            format: 1,
            n: set.n,
            provenance: set.provenance,
            observables,
            weights: set.weights.clone(),
            p_s_full: set.full_sep_bound,
            p_s_bisep: set.bisep_bound,
            p_e: set.entangled_value,
        }
    }
}

impl SetFile {
    fn build(self) -> Result<MeasurementSet> {
        if self.format != 1 {
            return Err(Error::Format {
                what: "measurement set file",
                detail: format!("unsupported format {}", self.format),
            });
        }
        let observables = self
            .observables
            .into_iter()
            .map(|o| match o {
                ObservableRepr::Factors { factors } => {
                    BinaryObservable::from_factors(self.n, factors)
                }
                ObservableRepr::Matrix { matrix } => {
                    BinaryObservable::from_matrix(self.n, decode_matrix(&matrix, 1 << self.n)?)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementSet::new(
            self.n,
            observables,
            self.weights,
            self.p_s_full,
            self.p_s_bisep,
            self.p_e,
            self.provenance,
        )
    }
}

/// Row-major (re, im) little-endian f64 pairs, base64.
fn encode_matrix(m: &CMatrix) -> String {
    let mut bytes = Vec::with_capacity(m.data().len() * 16);
    for z in m.data() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn decode_matrix(text: &str, dim: usize) -> Result<CMatrix> {
    let bytes = BASE64.decode(text.trim()).map_err(|e| Error::Format {
        what: "matrix payload",
        detail: e.to_string(),
    })?;
    if bytes.len() != dim * dim * 16 {
        return Err(Error::Format {
            what: "matrix payload",
            detail: format!("expected {} bytes, got {}", dim * dim * 16, bytes.len()),
        });
    }
    let mut m = CMatrix::zeros(dim);
    for (idx, chunk) in bytes.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        m[(idx / dim, idx % dim)] = Complex64::new(re, im);
    }
    Ok(m)
}
