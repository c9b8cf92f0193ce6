//! Per-round state sources for the protocol.
//!
//! A `StateSource` yields the density operator consumed in each round. The
//! constant kinds model a stable preparation; the drift schedule models a
//! source whose output changes between rounds, which is exactly the regime
//! where the i.i.d. assumption breaks down.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cluster6, graph_state, Graph};
use crate::linalg::CMatrix;
use crate::state::{MixedState, PureState};

/// Named state constructors usable from JSON configs. Drift schedules refer
/// to these rather than embedding raw matrices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum StateSpec {
    /// The ideal six-qubit cluster state.
    Cluster6,
    /// |+>^n.
    Plus { n: usize },
    /// Computational basis state given as a bit string, e.g. "000000".
    Basis { bits: String },
    /// Graph state for the given edge list.
    Graph { n: usize, edges: Vec<(usize, usize)> },
    /// Product state from per-qubit Bloch vectors (|r| <= 1; |r| < 1 gives a
    /// mixed qubit).
    Product { bloch: Vec<[f64; 3]> },
}

impl StateSpec {
    pub fn build(&self) -> Result<MixedState> {
        match self {
            StateSpec::Cluster6 => Ok(MixedState::from_pure(&cluster6())),
            StateSpec::Plus { n } => Ok(MixedState::from_pure(&PureState::all_plus(*n)?)),
            StateSpec::Basis { bits } => {
                let n = bits.len();
                let mut index = 0usize;
                for c in bits.chars() {
                    index = (index << 1)
                        | match c {
                            '0' => 0,
                            '1' => 1,
                            _ => {
                                return Err(Error::Format {
                                    what: "basis state",
                                    detail: format!("bit character {c:?}"),
                                })
                            }
                        };
                }
                Ok(MixedState::from_pure(&PureState::basis(n, index)?))
            }
            StateSpec::Graph { n, edges } => {
                let g = Graph::new(*n, edges.iter().copied())?;
                Ok(MixedState::from_pure(&graph_state(&g)?))
            }
            StateSpec::Product { bloch } => product_from_bloch(bloch),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StateSpec::Cluster6 => "cluster6".into(),
            StateSpec::Plus { n } => format!("plus(n={n})"),
            StateSpec::Basis { bits } => format!("basis({bits})"),
            StateSpec::Graph { n, edges } => format!("graph(n={n}, {} edges)", edges.len()),
            StateSpec::Product { bloch } => format!("product({} qubits)", bloch.len()),
        }
    }
}

/// rho = tensor product of (I + r . sigma) / 2 over the listed qubits.
pub fn product_from_bloch(bloch: &[[f64; 3]]) -> Result<MixedState> {
    if bloch.is_empty() {
        return Err(Error::Format { what: "product state", detail: "no qubits listed".into() });
    }
    let mut m = CMatrix::identity(1);
    for (q, r) in bloch.iter().enumerate() {
        let len2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        if len2 > 1.0 + 1e-9 {
            return Err(Error::Format {
                what: "product state",
                detail: format!("Bloch vector of qubit {q} has length > 1"),
            });
        }
        let mut qm = CMatrix::zeros(2);
        qm[(0, 0)] = Complex64::new((1.0 + r[2]) / 2.0, 0.0);
        qm[(1, 1)] = Complex64::new((1.0 - r[2]) / 2.0, 0.0);
        qm[(0, 1)] = Complex64::new(r[0] / 2.0, -r[1] / 2.0);
        qm[(1, 0)] = Complex64::new(r[0] / 2.0, r[1] / 2.0);
        m = m.kron(&qm);
    }
    MixedState::new(bloch.len(), m)
}

/// Kind-plus-parameters description of a source, as found in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceConfig {
    Constant {
        state: StateSpec,
    },
    WhiteNoise {
        visibility: f64,
        state: StateSpec,
    },
    LocalDephasing {
        rate: f64,
        state: StateSpec,
    },
    DriftSchedule {
        schedule: Vec<StateSpec>,
        /// Tile the schedule this many times (1 = as listed).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        repeat: Option<usize>,
    },
}

/// On-disk wrapper with the format version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceFile {
    pub format: u32,
    #[serde(flatten)]
    pub config: SourceConfig,
}

impl SourceConfig {
    pub fn build(&self) -> Result<StateSource> {
        match self {
            SourceConfig::Constant { state } => Ok(StateSource::constant_described(
                state.build()?,
                format!("constant {}", state.describe()),
            )),
            SourceConfig::WhiteNoise { visibility, state } => {
                let base = state.build()?;
                StateSource::white_noise_mixed(&base, *visibility, state.describe())
            }
            SourceConfig::LocalDephasing { rate, state } => {
                StateSource::local_dephasing(&state.build()?, *rate)
            }
            SourceConfig::DriftSchedule { schedule, repeat } => {
                let reps = repeat.unwrap_or(1).max(1);
                let mut states = Vec::with_capacity(schedule.len() * reps);
                for _ in 0..reps {
                    for spec in schedule {
                        states.push(spec.build()?);
                    }
                }
                StateSource::drift(states)
            }
        }
    }
}

/// Source of one state per protocol round.
#[derive(Debug, Clone)]
pub struct StateSource {
    description: String,
    states: Vec<MixedState>,
    drift: bool,
}

impl StateSource {
    pub fn constant(state: MixedState) -> Self {
        Self::constant_described(state, "constant".into())
    }

    fn constant_described(state: MixedState, description: String) -> Self {
        StateSource { description, states: vec![state], drift: false }
    }

    /// v |psi><psi| + (1 - v) I / 2^n, the same every round.
    pub fn white_noise(target: &PureState, visibility: f64) -> Result<Self> {
        Ok(StateSource {
            description: format!("white-noise(v={visibility})"),
            states: vec![MixedState::white_noise(target, visibility)?],
            drift: false,
        })
    }

    fn white_noise_mixed(base: &MixedState, visibility: f64, target: String) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::OutOfRange(visibility));
        }
        let n = base.qubits();
        let dim = 1usize << n;
        let mut m = base.matrix().clone();
        m.scale(Complex64::new(visibility, 0.0));
        for i in 0..dim {
            m[(i, i)] += Complex64::new((1.0 - visibility) / dim as f64, 0.0);
        }
        Ok(StateSource {
            description: format!("white-noise(v={visibility}) on {target}"),
            states: vec![MixedState::new(n, m)?],
            drift: false,
        })
    }

    /// Independent Z-dephasing at the given rate on every qubit of a base
    /// state, the same every round.
    pub fn local_dephasing(base: &MixedState, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::OutOfRange(rate));
        }
        let n = base.qubits();
        let dim = 1usize << n;
        // (1 - r) rho + r Z rho Z per qubit: off-diagonal entries shrink by
        // (1 - 2r) for each qubit on which the two indices disagree.
        let m = CMatrix::from_fn(dim, |i, j| {
            let differing = (i ^ j).count_ones();
            base.matrix()[(i, j)] * (1.0 - 2.0 * rate).powi(differing as i32)
        });
        Ok(StateSource {
            description: format!("local-dephasing(rate={rate})"),
            states: vec![MixedState::new(n, m)?],
            drift: false,
        })
    }

    /// One listed state per round; rounds past the end are an error.
    pub fn drift(states: Vec<MixedState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Format {
                what: "drift schedule",
                detail: "schedule is empty".into(),
            });
        }
        let n = states[0].qubits();
        for s in &states {
            if s.qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.qubits() });
            }
        }
        Ok(StateSource {
            description: format!("drift-schedule({} states)", states.len()),
            states,
            drift: true,
        })
    }

    pub fn qubits(&self) -> usize {
        self.states[0].qubits()
    }

    /// True when every round sees the same state (enables per-setting
    /// probability caching in the protocol loop).
    pub fn is_constant(&self) -> bool {
        !self.drift
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// The state consumed in the given round.
    pub fn next_state(&self, round: usize) -> Result<&MixedState> {
        if self.drift {
            self.states
                .get(round)
                .ok_or(Error::ScheduleExhausted { round, len: self.states.len() })
        } else {
            Ok(&self.states[0])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cluster6;

    #[test]
    fn white_noise_fidelity_follows_the_closed_form() {
        let target = cluster6();
        // F = v + (1 - v) / 64
        let src = StateSource::white_noise(&target, 0.746).unwrap();
        let f = src.next_state(0).unwrap().fidelity_with(&target);
        assert!((f - 0.75).abs() < 1e-3, "fidelity {f}");
        assert!((f - (0.746 + 0.254 / 64.0)).abs() < 1e-12);

        let pure = StateSource::white_noise(&target, 1.0).unwrap();
        assert!((pure.next_state(0).unwrap().fidelity_with(&target) - 1.0).abs() < 1e-12);

        let mixed = StateSource::white_noise(&target, 0.0).unwrap();
        assert!((mixed.next_state(0).unwrap().fidelity_with(&target) - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn constant_source_repeats_itself() {
        let src = StateSource::constant(MixedState::from_pure(&cluster6()));
        let a = src.next_state(0).unwrap().clone();
        let b = src.next_state(10_000).unwrap().clone();
        assert_eq!(a, b);
    }

    #[test]
    fn drift_schedule_is_ordered_and_finite() {
        let s0 = MixedState::from_pure(&PureState::basis(2, 0).unwrap());
        let s1 = MixedState::from_pure(&PureState::all_plus(2).unwrap());
        let src = StateSource::drift(vec![s0.clone(), s1.clone()]).unwrap();
        assert_eq!(src.next_state(0).unwrap(), &s0);
        assert_eq!(src.next_state(1).unwrap(), &s1);
        assert!(matches!(
            src.next_state(2),
            Err(Error::ScheduleExhausted { round: 2, len: 2 })
        ));
    }

    #[test]
    fn dephasing_yields_a_valid_density_operator() {
        let base = MixedState::from_pure(&cluster6());
        for rate in [0.0, 0.1, 0.5, 1.0] {
            let src = StateSource::local_dephasing(&base, rate).unwrap();
            // construction re-validates trace/Hermiticity/PSD
            let rho = src.next_state(3).unwrap();
            assert_eq!(rho.qubits(), 6);
        }
    }

    #[test]
    fn dephasing_at_half_rate_kills_coherences() {
        let base = MixedState::from_pure(&PureState::all_plus(1).unwrap());
        let src = StateSource::local_dephasing(&base, 0.5).unwrap();
        let rho = src.next_state(0).unwrap();
        assert!(rho.matrix()[(0, 1)].norm() < 1e-15);
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn source_config_round_trips_through_json() {
        let cfg = SourceFile {
            format: 1,
            config: SourceConfig::WhiteNoise {
                visibility: 0.746,
                state: StateSpec::Cluster6,
            },
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SourceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.config, cfg.config);
        let src = back.config.build().unwrap();
        assert_eq!(src.qubits(), 6);
    }

    #[test]
    fn drift_config_builds_with_repeats() {
        let cfg = SourceConfig::DriftSchedule {
            schedule: vec![
                StateSpec::Basis { bits: "00".into() },
                StateSpec::Plus { n: 2 },
            ],
            repeat: Some(3),
        };
        let src = cfg.build().unwrap();
        assert!(src.next_state(5).is_ok());
        assert!(src.next_state(6).is_err());
    }

    #[test]
    fn product_spec_builds_mixed_products() {
        let spec = StateSpec::Product {
            bloch: vec![[0.0, 0.0, 1.0], [0.5, 0.0, 0.0]],
        };
        let rho = spec.build().unwrap();
        assert_eq!(rho.qubits(), 2);
        // qubit 0 is |0>, so <ZI> = 1
        let zi: crate::pauli::PauliString = "ZI".parse().unwrap();
        use crate::state::QuantumState;
        assert!((rho.expect_pauli(&zi).unwrap().re - 1.0).abs() < 1e-12);
    }
}
