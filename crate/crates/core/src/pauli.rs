//! Signed Pauli strings.
//!
//! A `PauliString` is a tensor product of single-qubit Pauli operators with
//! an overall sign of +1 or -1. Products whose accumulated phase would be
//! imaginary are rejected: inside a stabilizer group (the only place this
//! crate multiplies strings) phases stay real, so an imaginary phase always
//! means the caller left that setting.
//!
//! Qubit 1 of the usual physics numbering is index 0 here and owns the most
//! significant bit of every amplitude index.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Dense simulation is capped here; beyond this the 4^n memory cost stops
/// being a reasonable oracle.
pub const MAX_QUBITS: usize = 12;

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn to_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    fn from_char(c: char, pos: usize) -> Result<Self> {
        match c {
            'I' => Ok(PauliLetter::I),
            'X' => Ok(PauliLetter::X),
            'Y' => Ok(PauliLetter::Y),
            'Z' => Ok(PauliLetter::Z),
            _ => Err(Error::BadPauliLetter { letter: c, pos }),
        }
    }
}

/// Single-qubit product table: returns the resulting letter and the power of
/// i it contributes (XY = iZ and cyclic, reversed order picks up i^3).
fn letter_product(a: PauliLetter, b: PauliLetter) -> (PauliLetter, u32) {
    use PauliLetter::*;
    match (a, b) {
        (I, p) => (p, 0),
        (p, I) => (p, 0),
        (X, X) | (Y, Y) | (Z, Z) => (I, 0),
        (X, Y) => (Z, 1),
        (Y, X) => (Z, 3),
        (Y, Z) => (X, 1),
        (Z, Y) => (X, 3),
        (Z, X) => (Y, 1),
        (X, Z) => (Y, 3),
    }
}

/// Signed n-qubit Pauli word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>, negative: bool) -> Result<Self> {
        check_qubit_count(letters.len())?;
        Ok(PauliString { letters, negative })
    }

    /// The +1-phase identity word.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![PauliLetter::I; n], false)
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        self.letters[qubit]
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> f64 {
        if self.negative { -1.0 } else { 1.0 }
    }

    /// Same word with the opposite sign.
    pub fn negated(&self) -> Self {
        PauliString { letters: self.letters.clone(), negative: !self.negative }
    }

    /// Word with the sign stripped (canonical +1 representative).
    pub fn unsigned(&self) -> Self {
        PauliString { letters: self.letters.clone(), negative: false }
    }

    pub fn is_identity_word(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != PauliLetter::I).count()
    }

    /// Qubits on which the word acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != PauliLetter::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// Operator product. Errors if the phase of the product is +-i, which
    /// can only happen for anticommuting operands.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.qubits() != other.qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.qubits(),
                got: other.qubits(),
            });
        }
        let mut ipow: u32 = 0;
        if self.negative {
            ipow += 2;
        }
        if other.negative {
            ipow += 2;
        }
        let letters: Vec<PauliLetter> = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (l, k) = letter_product(a, b);
                ipow += k;
                l
            })
            .collect();
        match ipow % 4 {
            0 => Ok(PauliString { letters, negative: false }),
            2 => Ok(PauliString { letters, negative: true }),
            _ => Err(Error::NonRealPhase),
        }
    }

    /// Commutation check via the parity of anticommuting positions.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| {
                a != PauliLetter::I && b != PauliLetter::I && a != b
            })
            .count();
        anti % 2 == 0
    }

    /// Bit mask of amplitude-index bits flipped by this word (X and Y).
    fn flip_mask(&self) -> usize {
        let n = self.qubits();
        let mut mask = 0usize;
        for (q, &l) in self.letters.iter().enumerate() {
            if matches!(l, PauliLetter::X | PauliLetter::Y) {
                mask |= 1 << (n - 1 - q);
            }
        }
        mask
    }

    /// Amplitude factor picked up when the word acts on basis state `index`
    /// (the output basis state is `index ^ flip_mask`).
    fn basis_factor(&self, index: usize) -> Complex64 {
        let n = self.qubits();
        let mut factor = Complex64::new(self.sign(), 0.0);
        for (q, &l) in self.letters.iter().enumerate() {
            let bit = (index >> (n - 1 - q)) & 1;
            match l {
                PauliLetter::I | PauliLetter::X => {}
                PauliLetter::Z => {
                    if bit == 1 {
                        factor = -factor;
                    }
                }
                PauliLetter::Y => {
                    // Y|0> = i|1>, Y|1> = -i|0>
                    factor *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                }
            }
        }
        factor
    }

    /// Apply the word to a state vector.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let dim = 1usize << self.qubits();
        assert_eq!(amps.len(), dim);
        let mask = self.flip_mask();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (col, &a) in amps.iter().enumerate() {
            out[col ^ mask] = self.basis_factor(col) * a;
        }
        out
    }

    /// Trace of `self * rho` for a dense density matrix.
    pub fn trace_with(&self, rho: &CMatrix) -> Complex64 {
        let dim = 1usize << self.qubits();
        assert_eq!(rho.dim(), dim);
        let mask = self.flip_mask();
        (0..dim)
            .map(|j| self.basis_factor(j ^ mask) * rho[(j ^ mask, j)])
            .sum()
    }

    /// Dense matrix form (a signed, phased permutation).
    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.qubits();
        let mask = self.flip_mask();
        let mut m = CMatrix::zeros(dim);
        for col in 0..dim {
            m[(col ^ mask, col)] = self.basis_factor(col);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for &l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Text form: optional sign then one letter per qubit, e.g. "+ZZIIII".
    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(Error::Format {
                what: "Pauli string",
                detail: "no letters after the sign".into(),
            });
        }
        let letters = body
            .chars()
            .enumerate()
            .map(|(pos, c)| PauliLetter::from_char(c, pos))
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters, negative)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
