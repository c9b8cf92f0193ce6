//! Graph states, the six-qubit cluster state and its stabilizer group.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{check_qubit_count, PauliLetter, PauliString};
use crate::state::PureState;

/// Simple undirected graph on vertices 0..n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        check_qubit_count(n)?;
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Format {
                    what: "graph",
                    detail: format!("self-loop at vertex {a}"),
                });
            }
            if a >= n || b >= n {
                return Err(Error::Format {
                    what: "graph",
                    detail: format!("edge ({a}, {b}) leaves the vertex range 0..{n}"),
                });
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// The H-shaped six-vertex graph: two columns of three qubits bridged in the
/// middle.
pub fn h_graph6() -> Graph {
    Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5), (1, 4)]).expect("static graph")
}

/// CZ_edges |+>^n, written down in closed form: every amplitude is
/// 2^{-n/2} with sign (-1)^(number of edges whose endpoints are both 1).
pub fn graph_state(g: &Graph) -> Result<PureState> {
    let n = g.vertices();
    let dim = 1usize << n;
    let base = 1.0 / (dim as f64).sqrt();
    let amps: Vec<Complex64> = (0..dim)
        .map(|idx| {
            let mut sign = 1.0;
            for (a, b) in g.edges() {
                if (idx >> (n - 1 - a)) & 1 == 1 && (idx >> (n - 1 - b)) & 1 == 1 {
                    sign = -sign;
                }
            }
            Complex64::new(sign * base, 0.0)
        })
        .collect();
    PureState::new(n, amps)
}

/// Canonical graph-state generators X_v prod_{u in N(v)} Z_u.
pub fn canonical_generators(g: &Graph) -> Vec<PauliString> {
    let n = g.vertices();
    (0..n)
        .map(|v| {
            let mut letters = vec![PauliLetter::I; n];
            letters[v] = PauliLetter::X;
            for u in g.neighbors(v) {
                letters[u] = PauliLetter::Z;
            }
            PauliString::new(letters, false).expect("valid generator")
        })
        .collect()
}

/// The ideal six-qubit cluster state: amplitude +1/2 on |000000>, |000111>,
/// |111000> and -1/2 on |111111>.
pub fn cluster6() -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 64];
    amps[0b000000] = Complex64::new(0.5, 0.0);
    amps[0b000111] = Complex64::new(0.5, 0.0);
    amps[0b111000] = Complex64::new(0.5, 0.0);
    amps[0b111111] = Complex64::new(-0.5, 0.0);
    PureState::new(6, amps).expect("static amplitudes")
}

/// The six generators of the cluster state, all with +1 sign.
pub fn generators6() -> Vec<PauliString> {
    ["ZZIIII", "XXXIZI", "IZZIII", "IIIZZI", "IZIXXX", "IIIIZZ"]
        .iter()
        .map(|s| s.parse().expect("static generator"))
        .collect()
}

/// All 2^k subset products of `gens`, with accumulated signs.
///
/// `n` fixes the qubit count (needed for the empty generator list). The
/// generators must mutually commute and be independent; dependence shows up
/// as colliding subset products and is rejected.
pub fn stabilizer_group(n: usize, gens: &[PauliString]) -> Result<Vec<PauliString>> {
    check_qubit_count(n)?;
    for (i, g) in gens.iter().enumerate() {
        if g.qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.qubits() });
        }
        for (j, h) in gens.iter().enumerate().skip(i + 1) {
            if !g.commutes_with(h) {
                return Err(Error::NonCommutingGenerators { i, j });
            }
        }
    }
    let mut elements = vec![PauliString::identity(n)?];
    for g in gens {
        let mut extended = Vec::with_capacity(elements.len() * 2);
        for e in &elements {
            extended.push(e.clone());
            // commuting +-1 words always multiply to a +-1 word
            extended.push(e.multiply(g)?);
        }
        elements = extended;
    }
    let mut seen = BTreeSet::new();
    for e in &elements {
        let key: String = e.letters().iter().map(|l| l.to_char()).collect();
        if !seen.insert(key) {
            return Err(Error::DependentGenerators);
        }
    }
    Ok(elements)
}
