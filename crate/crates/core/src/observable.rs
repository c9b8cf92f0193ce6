//! Binary observables: the yes/no questions asked of each state copy.
//!
//! An observable is a projector M; a round succeeds with probability
//! Tr(M rho). Most observables here are stabilizer products
//! prod_k (I + G_k) / 2, which admit a purely local implementation: measure
//! each qubit in a fixed Pauli basis and accept iff every factor's outcome
//! parity comes out right. The projector route and the parity route are kept
//! fully independent so they can check each other.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::{check_qubit_count, PauliLetter, PauliString};
use crate::state::{PureState, QuantumState};

const PROJECTOR_TOL: f64 = 1e-9;
const PROB_SLACK: f64 = 1e-9;

/// Projector-valued observable, stored dense along with the factor list it
/// was built from (when it was built from one).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryObservable {
    n: usize,
    factors: Option<Vec<PauliString>>,
    matrix: CMatrix,
}

impl BinaryObservable {
    /// prod_k (I + P_k) / 2 for mutually commuting signed Pauli words.
    pub fn from_factors(n: usize, factors: Vec<PauliString>) -> Result<Self> {
        check_qubit_count(n)?;
        for (i, f) in factors.iter().enumerate() {
            if f.qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: f.qubits() });
            }
            for (j, g) in factors.iter().enumerate().skip(i + 1) {
                if !f.commutes_with(g) {
                    return Err(Error::NonCommutingGenerators { i, j });
                }
            }
        }
        let dim = 1usize << n;
        let mut matrix = CMatrix::identity(dim);
        for f in &factors {
            let mut half = CMatrix::identity(dim);
            half.add_scaled(Complex64::new(1.0, 0.0), &f.matrix());
            half.scale(Complex64::new(0.5, 0.0));
            matrix = matrix.mul(&half);
        }
        Self::checked(n, Some(factors), matrix)
    }

    /// Explicit projector matrix (e.g. an eigen-projector from a witness
    /// decomposition).
    pub fn from_matrix(n: usize, matrix: CMatrix) -> Result<Self> {
        check_qubit_count(n)?;
        if matrix.dim() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: matrix.dim() });
        }
        Self::checked(n, None, matrix)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_factors(n, Vec::new())
    }

    fn checked(n: usize, factors: Option<Vec<PauliString>>, matrix: CMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let idempotency = matrix.mul(&matrix).max_abs_diff(&matrix);
        if idempotency > PROJECTOR_TOL {
            return Err(Error::NotAProjector { deviation: idempotency });
        }
        Ok(BinaryObservable { n, factors, matrix })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> Option<&[PauliString]> {
        self.factors.as_deref()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Tr(M rho), clamped to [0, 1] after checking it only strays by
    /// floating-point rounding.
    pub fn success_probability(&self, state: &impl QuantumState) -> Result<f64> {
        let value = state.expect_matrix(&self.matrix)?;
        assert!(
            value.im.abs() <= PROB_SLACK,
            "projector expectation has imaginary part {:e}",
            value.im
        );
        let p = value.re;
        assert!(
            (-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p),
            "projector expectation {p} outside [0, 1]"
        );
        Ok(p.clamp(0.0, 1.0))
    }

    /// The local measurement implementing this observable, when one exists.
    pub fn local_setting(&self) -> Result<LocalSetting> {
        let factors = self.factors.as_ref().ok_or(Error::NoFactorList)?;
        let mut bases: Vec<Option<PauliLetter>> = vec![None; self.n];
        for f in factors {
            for q in f.support() {
                let want = f.letter(q);
                match bases[q] {
                    None => bases[q] = Some(want),
                    Some(have) if have == want => {}
                    Some(have) => {
                        return Err(Error::IncompatibleSupports {
                            qubit: q,
                            have: have.to_char(),
                            want: want.to_char(),
                        })
                    }
                }
            }
        }
        let rules = factors
            .iter()
            .map(|f| ParityRule { qubits: f.support(), expect_negative: f.is_negative() })
            .collect();
        Ok(LocalSetting { n: self.n, bases, rules })
    }
}

/// One factor's acceptance condition: the product of the +-1 outcomes on
/// `qubits` must equal the factor's sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityRule {
    pub qubits: Vec<usize>,
    pub expect_negative: bool,
}

impl ParityRule {
    fn satisfied(&self, outcome_bits: usize, n: usize) -> bool {
        let ones = self
            .qubits
            .iter()
            .filter(|&&q| (outcome_bits >> (n - 1 - q)) & 1 == 1)
            .count();
        (ones % 2 == 1) == self.expect_negative
    }
}

/// Per-qubit measurement bases plus the parity rules that decide success.
/// Qubits outside every factor's support may be measured in any basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSetting {
    n: usize,
    bases: Vec<Option<PauliLetter>>,
    rules: Vec<ParityRule>,
}

impl LocalSetting {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn basis(&self, qubit: usize) -> Option<PauliLetter> {
        self.bases[qubit]
    }

    pub fn rules(&self) -> &[ParityRule] {
        &self.rules
    }

    /// Exact probability that all parity rules accept, computed by rotating
    /// the state into the measurement eigenbasis and summing Born
    /// probabilities over the local-outcome lattice. Never touches the
    /// projector matrix.
    pub fn success_probability(&self, state: &PureState) -> Result<f64> {
        if state.qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: state.qubits() });
        }
        let mut amps = state.amplitudes().to_vec();
        for (q, basis) in self.bases.iter().enumerate() {
            match basis {
                Some(PauliLetter::X) => rotate_qubit(&mut amps, self.n, q, &HADAMARD),
                Some(PauliLetter::Y) => rotate_qubit(&mut amps, self.n, q, &Y_TO_Z),
                _ => {}
            }
        }
        let p = amps
            .iter()
            .enumerate()
            .filter(|(bits, _)| self.rules.iter().all(|r| r.satisfied(*bits, self.n)))
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>();
        Ok(p.clamp(0.0, 1.0))
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Maps the X eigenbasis onto the computational basis.
static HADAMARD: [[Complex64; 2]; 2] = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
];

/// Maps the Y eigenbasis onto the computational basis: rows are <+i| and
/// <-i|.
static Y_TO_Z: [[Complex64; 2]; 2] = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, -FRAC_1_SQRT_2)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)],
];

fn rotate_qubit(amps: &mut [Complex64], n: usize, qubit: usize, u: &[[Complex64; 2]; 2]) {
    let stride = 1usize << (n - 1 - qubit);
    let dim = amps.len();
    let mut i = 0;
    while i < dim {
        for k in i..i + stride {
            let a0 = amps[k];
            let a1 = amps[k + stride];
            amps[k] = u[0][0] * a0 + u[0][1] * a1;
            amps[k + stride] = u[1][0] * a0 + u[1][1] * a1;
        }
        i += 2 * stride;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cluster6, generators6};
    use crate::state::MixedState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w1_m1() -> BinaryObservable {
        let g = generators6();
        BinaryObservable::from_factors(6, vec![g[0].clone(), g[2].clone(), g[4].clone()]).unwrap()
    }

    #[test]
    fn stabilizer_products_are_projectors() {
        let m = w1_m1();
        let sq = m.matrix().mul(m.matrix());
        assert!(sq.max_abs_diff(m.matrix()) < 1e-9);
        assert!(m.matrix().hermiticity_error() < 1e-12);
    }

    #[test]
    fn non_projector_matrices_are_rejected() {
        let mut m = CMatrix::identity(2);
        m.scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            BinaryObservable::from_matrix(1, m),
            Err(Error::NotAProjector { .. })
        ));
    }

    #[test]
    fn non_commuting_factors_are_rejected() {
        let factors: Vec<PauliString> = vec!["XI".parse().unwrap(), "ZI".parse().unwrap()];
        assert!(matches!(
            BinaryObservable::from_factors(2, factors),
            Err(Error::NonCommutingGenerators { .. })
        ));
    }

    #[test]
    fn cluster_state_always_succeeds() {
        let psi = MixedState::from_pure(&cluster6());
        let m = w1_m1();
        assert!((m.success_probability(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zeros_state_succeeds_half_the_time_on_m1() {
        // only the identity, G1, G3 and G1 G3 terms of the 8-term expansion
        // survive on |0...0>, giving 4/8.
        let zeros = PureState::basis(6, 0).unwrap();
        let m = w1_m1();
        assert!((m.success_probability(&zeros).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_state_hits_a_single_stabilizer_at_half() {
        let rho = MixedState::maximally_mixed(6).unwrap();
        let g = generators6();
        let m = BinaryObservable::from_factors(6, vec![g[1].clone()]).unwrap();
        assert!((m.success_probability(&rho).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn local_setting_of_m1_measures_z_then_x_blocks() {
        let setting = w1_m1().local_setting().unwrap();
        for q in 0..3 {
            assert_eq!(setting.basis(q), Some(PauliLetter::Z), "qubit {q}");
        }
        for q in 3..6 {
            assert_eq!(setting.basis(q), Some(PauliLetter::X), "qubit {q}");
        }
        assert_eq!(setting.rules().len(), 3);
    }

    #[test]
    fn single_stabilizer_setting_is_a_two_qubit_parity() {
        let m = BinaryObservable::from_factors(6, vec!["ZZIIII".parse().unwrap()]).unwrap();
        let setting = m.local_setting().unwrap();
        assert_eq!(setting.basis(0), Some(PauliLetter::Z));
        assert_eq!(setting.basis(1), Some(PauliLetter::Z));
        assert_eq!(setting.basis(2), None);
        assert_eq!(setting.rules(), &[ParityRule { qubits: vec![0, 1], expect_negative: false }]);
    }

    #[test]
    fn conflicting_supports_are_reported() {
        // ZZ and XX commute (two anticommuting positions) but cannot share
        // a single-basis measurement on either qubit.
        let factors: Vec<PauliString> = vec!["ZZ".parse().unwrap(), "XX".parse().unwrap()];
        let m = BinaryObservable::from_factors(2, factors).unwrap();
        assert!(matches!(
            m.local_setting(),
            Err(Error::IncompatibleSupports { qubit: 0, have: 'Z', want: 'X' })
        ));
    }

    #[test]
    fn matrix_observables_have_no_local_setting() {
        let m = BinaryObservable::from_matrix(1, CMatrix::identity(2)).unwrap();
        assert!(matches!(m.local_setting(), Err(Error::NoFactorList)));
    }

    #[test]
    fn parity_route_matches_projector_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = generators6();
        let observables = vec![
            w1_m1(),
            BinaryObservable::from_factors(6, vec![g[1].clone(), g[3].clone(), g[5].clone()])
                .unwrap(),
            BinaryObservable::from_factors(6, vec![g[0].multiply(&g[1]).unwrap()]).unwrap(),
        ];
        for _ in 0..20 {
            let psi = PureState::haar_random(6, &mut rng).unwrap();
            for m in &observables {
                let direct = m.success_probability(&psi).unwrap();
                let parity = m.local_setting().unwrap().success_probability(&psi).unwrap();
                assert!((direct - parity).abs() < 1e-12, "direct {direct} parity {parity}");
            }
        }
    }

    #[test]
    fn negative_factor_flips_the_parity_rule() {
        // -ZZ accepts odd parity: |01> succeeds, |00> fails.
        let m = BinaryObservable::from_factors(2, vec!["-ZZ".parse().unwrap()]).unwrap();
        let s01 = PureState::basis(2, 1).unwrap();
        let s00 = PureState::basis(2, 0).unwrap();
        assert!((m.success_probability(&s01).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.success_probability(&s00).unwrap() < 1e-12);
        let setting = m.local_setting().unwrap();
        assert!((setting.success_probability(&s01).unwrap() - 1.0).abs() < 1e-12);
        assert!(setting.success_probability(&s00).unwrap() < 1e-12);
    }
}
