//! Few-copy probabilistic entanglement verification.
//!
//! This crate turns entanglement witnesses into sets of weighted binary
//! observables, runs the random-sampling detection protocol against
//! simulated (or ingested) state copies, and evaluates the exponentially
//! converging confidence bounds the scheme provides: each copy answers one
//! randomly drawn yes/no question, and a success rate above the separable
//! bound certifies entanglement with confidence 1 - exp(-N D(p_obs || p_s)).
//!
//! The pieces, bottom to top:
//!
//! - [`pauli`], [`linalg`]: exact signed Pauli algebra and the small dense
//!   complex-matrix toolkit (dense simulation is capped at 12 qubits);
//! - [`state`]: pure/mixed states, expectation values, Born sampling;
//! - [`graph`], [`source`]: graph states, the six-qubit cluster state with
//!   its stabilizer group, and per-round state sources including noise and
//!   drift models;
//! - [`observable`], [`witness`]: binary observables with their local
//!   measurement settings, and the translation of any witness into a
//!   weighted sampling set;
//! - [`stats`], [`seesaw`]: Kullback-Leibler confidence machinery, copy
//!   count estimates, and the numeric full-separability bound;
//! - [`protocol`]: the detection loop, record analysis, fidelity
//!   estimation and false-positive Monte Carlo.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod observable;
pub mod pauli;
pub mod protocol;
pub mod seesaw;
pub mod source;
pub mod state;
pub mod stats;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{cluster6, generators6, graph_state, h_graph6, stabilizer_group, Graph};
pub use observable::{BinaryObservable, LocalSetting};
pub use pauli::{PauliLetter, PauliString, MAX_QUBITS};
pub use protocol::{
    analyze, estimate_fidelity, false_positive_rate, run_protocol, FidelityEstimate,
    OutcomeRecord, RecordMeta, VerificationReport,
};
pub use seesaw::{full_separability_bound, BoundResult, SeesawOptions};
pub use source::{SourceConfig, SourceFile, StateSource, StateSpec};
pub use state::{born_sample, expectation, HermitianOperator, MixedState, PureState, QuantumState};
pub use stats::{confidence_min, kl_divergence, n_max, rate_constant, Confidence, RateApproximation};
pub use witness::{
    builtin_w1, builtin_w2, graph_witness, translate, MeasurementSet, Provenance, Translation,
    WitnessSpec,
};
