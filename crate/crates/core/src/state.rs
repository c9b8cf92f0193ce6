//! Dense pure and mixed state representations, expectation values and the
//! Born-rule coin flip behind every protocol round.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::{check_qubit_count, PauliString};

const NORM_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

/// Normalized n-qubit state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amps.len() });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(PureState { n, amps })
    }

    /// Computational basis state |index>.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { n, amps })
    }

    /// |+>^n, the all-plus product state.
    pub fn all_plus(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(PureState { n, amps: vec![a; dim] })
    }

    /// Haar-random state on the full 2^n-dimensional space.
    pub fn haar_random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps: Vec<Complex64> = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
        normalize(&mut amps);
        Ok(PureState { n, amps })
    }

    /// Product of independent Haar-random single-qubit states.
    pub fn haar_product(n: usize, rng: &mut impl Rng) -> Result<Self> {
        check_qubit_count(n)?;
        let qubits: Vec<[Complex64; 2]> = (0..n).map(|_| haar_qubit(rng)).collect();
        Ok(PureState { n, amps: product_vector(&qubits) })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Density operator: trace one, Hermitian, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    n: usize,
    matrix: CMatrix,
}

impl MixedState {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        check_qubit_count(n)?;
        if matrix.dim() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: matrix.dim() });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::NotDensityMatrix { reason: format!("trace is {tr}") });
        }
        let herm = matrix.hermiticity_error();
        if herm > NORM_TOL {
            return Err(Error::NotDensityMatrix {
                reason: format!("Hermiticity violated by {herm:e}"),
            });
        }
        if !matrix.is_psd_within(PSD_TOL) {
            return Err(Error::NotDensityMatrix {
                reason: "an eigenvalue is negative beyond tolerance".into(),
            });
        }
        Ok(MixedState { n, matrix })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        MixedState { n: psi.n, matrix: CMatrix::outer(&psi.amps) }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let mut m = CMatrix::identity(dim);
        m.scale(Complex64::new(1.0 / dim as f64, 0.0));
        Ok(MixedState { n, matrix: m })
    }

    /// v * |psi><psi| + (1 - v) * I / 2^n.
    pub fn white_noise(psi: &PureState, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::OutOfRange(visibility));
        }
        let dim = 1usize << psi.n;
        let mut m = CMatrix::outer(&psi.amps);
        m.scale(Complex64::new(visibility, 0.0));
        let floor = (1.0 - visibility) / dim as f64;
        for i in 0..dim {
            m[(i, i)] += Complex64::new(floor, 0.0);
        }
        Ok(MixedState { n: psi.n, matrix: m })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// <psi| rho |psi>.
    pub fn fidelity_with(&self, psi: &PureState) -> f64 {
        let v = self.matrix.matvec(psi.amplitudes());
        let f: Complex64 = psi.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        f.re
    }
}

/// Anything with Pauli-word and dense-operator expectation values.
pub trait QuantumState {
    fn qubits(&self) -> usize;
    fn expect_pauli(&self, word: &PauliString) -> Result<Complex64>;
    fn expect_matrix(&self, op: &CMatrix) -> Result<Complex64>;
}

impl QuantumState for PureState {
    fn qubits(&self) -> usize {
        self.n
    }

    fn expect_pauli(&self, word: &PauliString) -> Result<Complex64> {
        if word.qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: word.qubits() });
        }
        let v = word.apply(&self.amps);
        Ok(self.amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }

    fn expect_matrix(&self, op: &CMatrix) -> Result<Complex64> {
        if op.dim() != 1 << self.n {
            return Err(Error::DimensionMismatch { expected: 1 << self.n, got: op.dim() });
        }
        let v = op.matvec(&self.amps);
        Ok(self.amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }
}

impl QuantumState for MixedState {
    fn qubits(&self) -> usize {
        self.n
    }

    fn expect_pauli(&self, word: &PauliString) -> Result<Complex64> {
        if word.qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: word.qubits() });
        }
        Ok(word.trace_with(&self.matrix))
    }

    fn expect_matrix(&self, op: &CMatrix) -> Result<Complex64> {
        let dim = 1usize << self.n;
        if op.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: op.dim() });
        }
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                tr += op[(i, j)] * self.matrix[(j, i)];
            }
        }
        Ok(tr)
    }
}

/// Real linear combination of Pauli words. Signs are folded into the
/// coefficients and duplicate words are merged on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl HermitianOperator {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        check_qubit_count(n)?;
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        for (coeff, word) in terms {
            if !coeff.is_finite() {
                return Err(Error::NonFiniteCoefficient(coeff));
            }
            if word.qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: word.qubits() });
            }
            let signed = coeff * word.sign();
            let canon = word.unsigned();
            match merged.iter_mut().find(|(_, w)| *w == canon) {
                Some((c, _)) => *c += signed,
                None => merged.push((signed, canon)),
            }
        }
        Ok(HermitianOperator { n, terms: merged })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(1 << self.n);
        for (coeff, word) in &self.terms {
            m.add_scaled(Complex64::new(*coeff, 0.0), &word.matrix());
        }
        m
    }
}

/// Tr(op * rho), asserted real.
pub fn expectation(state: &impl QuantumState, op: &HermitianOperator) -> Result<f64> {
    if op.qubits() != state.qubits() {
        return Err(Error::DimensionMismatch { expected: state.qubits(), got: op.qubits() });
    }
    let mut value = Complex64::new(0.0, 0.0);
    for (coeff, word) in op.terms() {
        value += Complex64::new(*coeff, 0.0) * state.expect_pauli(word)?;
    }
    assert!(value.im.abs() <= 1e-9, "expectation of a Hermitian operator came out complex: {value}");
    Ok(value.re)
}

/// One protocol coin flip: 1 with probability `p`, deterministic given the
/// generator state.
pub fn born_sample(p: f64, rng: &mut impl Rng) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    Ok(rng.gen::<f64>() < p)
}

pub(crate) fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    // Box-Muller; two uniforms per complex sample.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

pub(crate) fn haar_qubit(rng: &mut impl Rng) -> [Complex64; 2] {
    loop {
        let a = complex_gaussian(rng);
        let b = complex_gaussian(rng);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm > 1e-12 {
            return [a / norm, b / norm];
        }
    }
}

pub(crate) fn product_vector(qubits: &[[Complex64; 2]]) -> Vec<Complex64> {
    let n = qubits.len();
    let dim = 1usize << n;
    (0..dim)
        .map(|idx| {
            qubits
                .iter()
                .enumerate()
                .map(|(q, amps)| amps[(idx >> (n - 1 - q)) & 1])
                .product()
        })
        .collect()
}

fn normalize(amps: &mut [Complex64]) {
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps {
        *a /= norm;
    }
}
