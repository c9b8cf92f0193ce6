//! Cross-module invariants, exercised harder than the per-module unit
//! tests: group structure under multiplication, agreement of independent
//! probability routes, and the ordering/monotonicity properties the
//! confidence machinery promises.

use fewcopy_core::protocol::run_protocol;
use fewcopy_core::seesaw::{full_separability_bound, SeesawOptions};
use fewcopy_core::source::StateSource;
use fewcopy_core::state::{HermitianOperator, MixedState, PureState, QuantumState};
use fewcopy_core::stats::{confidence_min, kl_divergence, n_max};
use fewcopy_core::witness::{builtin_w1, builtin_w2, translate, WitnessSpec};
use fewcopy_core::{cluster6, generators6, stabilizer_group, PauliString};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cluster_group() -> Vec<PauliString> {
    stabilizer_group(6, &generators6()).unwrap()
}

proptest! {
    #[test]
    fn cluster_group_is_closed_and_associative(
        a in 0usize..64, b in 0usize..64, c in 0usize..64
    ) {
        let group = cluster_group();
        let ab = group[a].multiply(&group[b]).unwrap();
        prop_assert!(group.contains(&ab)); // closure, phases stay +-1
        let left = ab.multiply(&group[c]).unwrap();
        let right = group[a].multiply(&group[b].multiply(&group[c]).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn kl_divergence_is_nonnegative_and_zero_on_the_diagonal(
        x in 0.0f64..=1.0, y in 0.01f64..0.99
    ) {
        let d = kl_divergence(x, y).unwrap();
        prop_assert!(d >= 0.0);
        let same = kl_divergence(y, y).unwrap();
        prop_assert!(same.abs() < 1e-15);
    }

    #[test]
    fn confidence_grows_with_copies_and_deviation(
        p_s in 0.05f64..0.9,
        delta_frac in 0.05f64..1.0,
        n in 1u64..500,
    ) {
        let delta = delta_frac * (1.0 - p_s);
        let c = confidence_min(delta, p_s, n).unwrap();
        let more_copies = confidence_min(delta, p_s, n + 1).unwrap();
        prop_assert!(more_copies.value >= c.value);
        let larger_delta = confidence_min((delta * 1.1).min(1.0 - p_s), p_s, n).unwrap();
        prop_assert!(larger_delta.value >= c.value - 1e-15);
    }

    #[test]
    fn confidence_decreases_in_the_separable_bound(
        p_lo in 0.1f64..0.5,
        gap in 0.05f64..0.3,
        n in 1u64..300,
    ) {
        // for a fixed observed rate, a smaller separable bound can only help:
        // full-sep confidence >= bisep confidence when both are conclusive
        let p_hi = p_lo + gap;
        let observed = 0.95;
        prop_assume!(observed > p_hi);
        let against_lo = confidence_min(observed - p_lo, p_lo, n).unwrap();
        let against_hi = confidence_min(observed - p_hi, p_hi, n).unwrap();
        prop_assert!(against_lo.value >= against_hi.value - 1e-15);
    }
}

#[test]
fn every_projector_in_the_builtin_sets_is_sound() {
    for set in [builtin_w1(), builtin_w2()] {
        for m in set.observables() {
            let sq = m.matrix().mul(m.matrix());
            assert!(sq.max_abs_diff(m.matrix()) < 1e-9);
            assert!(m.matrix().hermiticity_error() < 1e-12);
        }
    }
}

#[test]
fn pure_and_mixed_success_probabilities_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let set = builtin_w1();
    for _ in 0..25 {
        let psi = PureState::haar_random(6, &mut rng).unwrap();
        let rho = MixedState::from_pure(&psi);
        for m in set.observables() {
            let via_pure = m.success_probability(&psi).unwrap();
            let via_mixed = m.success_probability(&rho).unwrap();
            assert!((via_pure - via_mixed).abs() < 1e-12);
        }
    }
}

#[test]
fn mean_success_equals_the_weighted_operator_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    let set = builtin_w2();
    let weighted = set.weighted_operator();
    for _ in 0..10 {
        let psi = PureState::haar_random(6, &mut rng).unwrap();
        let by_sum = set.mean_success(&psi).unwrap();
        let by_operator = psi.expect_matrix(&weighted).unwrap().re;
        assert!((by_sum - by_operator).abs() < 1e-12);
    }
}

/// 2 * prod_{k in picks} (I + G_k) / 2 as a Pauli expansion.
fn w1_term(picks: [usize; 3]) -> HermitianOperator {
    let g = generators6();
    let mut terms: Vec<(f64, PauliString)> = Vec::new();
    for subset in 0u32..8 {
        let mut word = PauliString::identity(6).unwrap();
        for (bit, &pick) in picks.iter().enumerate() {
            if subset >> bit & 1 == 1 {
                word = word.multiply(&g[pick]).unwrap();
            }
        }
        terms.push((0.25, word));
    }
    HermitianOperator::new(6, terms).unwrap()
}

#[test]
fn no_product_state_beats_the_numeric_bound_of_a_translated_set() {
    // translate the two-setting witness, bound it numerically, then throw
    // 1000 Haar product states at it
    let witness =
        WitnessSpec::new(6, 3.0, Some(4.0), vec![w1_term([0, 2, 4]), w1_term([1, 3, 5])]).unwrap();
    let translation = translate(&witness).unwrap();
    let numeric = full_separability_bound(
        &translation.set,
        &SeesawOptions { restarts: 64, ..Default::default() },
        606,
    );
    let set = translation.set.with_full_sep_bound(numeric.value).unwrap();
    assert!((set.full_sep_bound() - 9.0 / 16.0).abs() < 1e-6);

    let weighted = set.weighted_operator();
    let mut rng = ChaCha8Rng::seed_from_u64(607);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let product = PureState::haar_product(6, &mut rng).unwrap();
        let p = product.expect_matrix(&weighted).unwrap().re;
        worst = worst.max(p);
        assert!(p <= set.full_sep_bound() + 1e-9, "product state reached {p}");
    }
    // random product states should at least clear the trivial floor
    assert!(worst > 0.25, "sampling looks broken, best product state only reached {worst}");
}

#[test]
fn seesaw_never_shrinks_with_extra_restarts() {
    let set = builtin_w2();
    let mut prev = 0.0;
    for restarts in [1, 2, 4, 8, 16] {
        let result = full_separability_bound(
            &set,
            &SeesawOptions { restarts, ..Default::default() },
            909,
        );
        assert!(result.value >= prev - 1e-15, "restarts {restarts}");
        assert!(result.value <= 1.0);
        prev = result.value;
    }
}

#[test]
fn whitenoise_confidence_crosses_at_the_predicted_copy_count() {
    // expected success rate for the uniform stabilizer set is (1 + F)/2;
    // the first N with C >= 0.99 must sit within one copy of n_max
    let p_s = 5.0 / 8.0;
    for v in [0.5, 0.6, 0.75, 0.9] {
        let fidelity = v + (1.0 - v) / 64.0;
        let p_exp = (1.0 + fidelity) / 2.0;
        let predicted = n_max(0.99, p_s, p_exp).unwrap();
        let first = (1..10_000u64)
            .find(|&n| confidence_min(p_exp - p_s, p_s, n).unwrap().value >= 0.99)
            .expect("confidence never crossed 0.99");
        assert!(
            (first as f64 - predicted).abs() <= 1.0,
            "v = {v}: first crossing {first}, predicted {predicted}"
        );
    }
}

#[test]
fn protocol_consumes_exactly_one_state_per_round() {
    let set = builtin_w2();
    let state = MixedState::from_pure(&cluster6());
    let n = 12;
    // a schedule of exactly N states works...
    let source = StateSource::drift(vec![state.clone(); n]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    assert!(run_protocol(&source, &set, n, &mut rng).is_ok());
    // ...one fewer does not
    let short = StateSource::drift(vec![state; n - 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    assert!(run_protocol(&short, &set, n, &mut rng).is_err());
}

#[test]
fn setting_frequencies_match_the_weights() {
    let set = builtin_w2();
    let source = StateSource::constant(MixedState::from_pure(&cluster6()));
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let record = run_protocol(&source, &set, n, &mut rng).unwrap();
    let mut counts = vec![0usize; set.len()];
    for (setting, _) in record.rounds() {
        counts[*setting] += 1;
    }
    let expected = n as f64 / set.len() as f64;
    let sigma = (n as f64 * (1.0 / 64.0) * (63.0 / 64.0)).sqrt();
    for (k, count) in counts.iter().enumerate() {
        assert!(
            (*count as f64 - expected).abs() < 5.0 * sigma,
            "setting {k} drawn {count} times, expected about {expected}"
        );
    }
}
