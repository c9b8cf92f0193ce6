//! Numerical full-separability bound by see-saw ascent over product states.
//!
//! The quantity of interest is the maximum of
//! f(phi_1, ..., phi_n) = sum_k eps_k <phi|M_k|phi> over pure product states
//! phi = phi_1 x ... x phi_n. Coordinate ascent makes each step exact: fixing
//! all qubits but one reduces f to <phi_j|B|phi_j> for an effective 2x2
//! Hermitian operator B, whose maximizer is B's principal eigenvector. The
//! objective therefore never decreases, and the best value over many random
//! restarts is a certified *lower* estimate of the true separable maximum
//! (mixed separable states cannot do better than the best product state,
//! f being linear in the state).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::state::{haar_qubit, product_vector};
use crate::witness::MeasurementSet;

/// See-saw controls. The defaults reproduce the known six-qubit bounds in
/// seconds.
#[derive(Debug, Clone, Copy)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions { restarts: 256, tol: 1e-9, max_sweeps: 500 }
    }
}

/// Outcome of the product-state ascent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundResult {
    /// Best weighted success probability found (a lower estimate of the
    /// separable maximum).
    pub value: f64,
    /// Bloch vectors (x, y, z) of the best product state, one per qubit.
    pub argmax: Vec<[f64; 3]>,
    pub restarts_used: usize,
    /// Whether the restart that produced `value` met the sweep tolerance.
    pub converged: bool,
}

/// Estimate the full-separability bound of a measurement set.
///
/// Restart r draws its Haar-random initial product state from stream r of
/// the master seed, so results are reproducible and independent of any
/// execution order; adding restarts can only raise the reported maximum.
pub fn full_separability_bound(
    set: &MeasurementSet,
    options: &SeesawOptions,
    seed: u64,
) -> BoundResult {
    let n = set.qubits();
    let weighted = set.weighted_operator();
    let restarts = options.restarts.max(1);

    let mut best_value = f64::NEG_INFINITY;
    let mut best_qubits: Vec<[Complex64; 2]> = Vec::new();
    let mut best_converged = false;

    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let mut qubits: Vec<[Complex64; 2]> = (0..n).map(|_| haar_qubit(&mut rng)).collect();

        let mut value = objective(&weighted, &qubits);
        let mut converged = false;
        for _sweep in 0..options.max_sweeps {
            for j in 0..n {
                let b = effective_operator(&weighted, &qubits, j);
                qubits[j] = principal_eigenvector(&b, &qubits[j]);
            }
            let updated = objective(&weighted, &qubits);
            if updated - value < options.tol {
                value = value.max(updated);
                converged = true;
                break;
            }
            value = updated;
        }

        if value > best_value {
            best_value = value;
            best_qubits = qubits;
            best_converged = converged;
        }
    }

    BoundResult {
        value: best_value.clamp(0.0, 1.0),
        argmax: best_qubits.iter().map(bloch_vector).collect(),
        restarts_used: restarts,
        converged: best_converged,
    }
}

fn objective(weighted: &CMatrix, qubits: &[[Complex64; 2]]) -> f64 {
    let v = product_vector(qubits);
    let av = weighted.matvec(&v);
    v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

/// Contract the weighted operator with every qubit except `target`,
/// producing the 2x2 Hermitian operator the target qubit sees.
fn effective_operator(
    weighted: &CMatrix,
    qubits: &[[Complex64; 2]],
    target: usize,
) -> [[Complex64; 2]; 2] {
    let basis = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let mut frame = qubits.to_vec();
    let mut vectors = Vec::with_capacity(2);
    for b in basis {
        frame[target] = b;
        vectors.push(product_vector(&frame));
    }
    let images: Vec<Vec<Complex64>> = vectors.iter().map(|v| weighted.matvec(v)).collect();
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for s in 0..2 {
        for t in 0..2 {
            out[s][t] = vectors[s].iter().zip(&images[t]).map(|(a, b)| a.conj() * b).sum();
        }
    }
    out
}

/// Unit eigenvector of the larger eigenvalue of a 2x2 Hermitian matrix.
/// Falls back to the current state in the fully degenerate case so a sweep
/// never moves without improving.
fn principal_eigenvector(b: &[[Complex64; 2]; 2], current: &[Complex64; 2]) -> [Complex64; 2] {
    let b00 = b[0][0].re;
    let b11 = b[1][1].re;
    let b01 = b[0][1];
    let mid = 0.5 * (b00 + b11);
    let radius = (0.25 * (b00 - b11) * (b00 - b11) + b01.norm_sqr()).sqrt();
    if radius < 1e-15 {
        return *current;
    }
    let lambda = mid + radius;
    let (v0, v1) = if b01.norm() > 1e-15 {
        (b01, Complex64::new(lambda - b00, 0.0))
    } else if b00 >= b11 {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    [v0 / norm, v1 / norm]
}

fn bloch_vector(q: &[Complex64; 2]) -> [f64; 3] {
    let cross = q[0].conj() * q[1];
    [
        2.0 * cross.re,
        2.0 * cross.im,
        q[0].norm_sqr() - q[1].norm_sqr(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observable::BinaryObservable;
    use crate::source::product_from_bloch;
    use crate::witness::{builtin_w1, builtin_w2, MeasurementSet, Provenance};

    fn quick() -> SeesawOptions {
        SeesawOptions { restarts: 32, tol: 1e-10, max_sweeps: 500 }
    }

    #[test]
    fn product_projector_is_maximized_exactly() {
        // single observable |00><00|: maximum 1 at |0>|0>
        let m = BinaryObservable::from_factors(
            2,
            vec!["ZI".parse().unwrap(), "IZ".parse().unwrap()],
        )
        .unwrap();
        let set = MeasurementSet::new(
            2,
            vec![m],
            vec![1.0],
            1.0,
            None,
            None,
            Provenance::Translated,
        )
        .unwrap();
        let result = full_separability_bound(&set, &quick(), 1);
        assert!((result.value - 1.0).abs() < 1e-9, "value {}", result.value);
        assert!(result.converged);
        for bloch in &result.argmax {
            assert!((bloch[2] - 1.0).abs() < 1e-6, "argmax is not |0>: {bloch:?}");
        }
    }

    #[test]
    fn identity_observable_saturates_at_one() {
        let set = MeasurementSet::new(
            3,
            vec![BinaryObservable::identity(3).unwrap()],
            vec![1.0],
            1.0,
            None,
            None,
            Provenance::Translated,
        )
        .unwrap();
        let result = full_separability_bound(&set, &quick(), 2);
        assert!((result.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w1_bound_lands_on_nine_sixteenths() {
        let result = full_separability_bound(&builtin_w1(), &quick(), 7);
        assert!((result.value - 9.0 / 16.0).abs() < 1e-6, "value {}", result.value);
    }

    #[test]
    fn w2_bound_lands_on_five_eighths() {
        let result = full_separability_bound(&builtin_w2(), &quick(), 7);
        assert!((result.value - 5.0 / 8.0).abs() < 1e-6, "value {}", result.value);
    }

    #[test]
    fn argmax_state_achieves_the_reported_value() {
        let set = builtin_w1();
        let result = full_separability_bound(&set, &quick(), 3);
        let rho = product_from_bloch(&result.argmax).unwrap();
        let achieved = set.mean_success(&rho).unwrap();
        assert!((achieved - result.value).abs() < 1e-9);
    }

    #[test]
    fn more_restarts_never_lower_the_maximum() {
        let set = builtin_w1();
        let few = full_separability_bound(
            &set,
            &SeesawOptions { restarts: 4, ..quick() },
            11,
        );
        let many = full_separability_bound(
            &set,
            &SeesawOptions { restarts: 16, ..quick() },
            11,
        );
        assert!(many.value >= few.value - 1e-15);
    }

    #[test]
    fn bound_is_deterministic_for_a_seed() {
        let set = builtin_w1();
        let a = full_separability_bound(&set, &quick(), 5);
        let b = full_separability_bound(&set, &quick(), 5);
        assert_eq!(a.value, b.value);
        assert_eq!(a.argmax, b.argmax);
    }
}
