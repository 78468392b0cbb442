use approx::assert_relative_eq;
use bellconc::io;
use bellconc::lhv::{classical_bounds, enumerate_strategies, normalize, positivize, strategy_behaviour};
use bellconc::montecarlo::random_normalized_functional;
use bellconc::nets::{dist_assemblages, dist_functionals, povm_to_params};
use bellconc::quantum::{behaviour_of, evaluate_q, random_povm, sample_haar_state, Assemblage, BellOperator};
use bellconc::{BellFunctional, Scenario};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=3, 1usize..=3, 2usize..=3).prop_map(|(n, m, v)| Scenario::new(n, m, v).unwrap())
}

fn small_scenario() -> impl Strategy<Value = (Scenario, usize)> {
    prop_oneof![
        Just((2, 2, 2, 2)),
        Just((3, 2, 2, 2)),
        Just((2, 3, 2, 2)),
        Just((2, 2, 3, 2)),
        Just((2, 2, 2, 3)),
    ]
    .prop_map(|(n, m, v, d)| (Scenario::new(n, m, v).unwrap(), d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_index_round_trip(s in scenario(), seed in any::<u64>()) {
        let idx = ChaCha8Rng::seed_from_u64(seed).gen_range(0..s.behaviour_len());
        let (a, x) = s.unflatten(idx).unwrap();
        prop_assert_eq!(s.flat_index(&a, &x).unwrap(), idx);
        prop_assert_eq!(s.join(s.outcome_index(&a), s.setting_index(&x)), idx);
    }

    #[test]
    fn deterministic_behaviours_are_valid_and_inside_bounds(s in scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let (lo, hi) = classical_bounds(&t).unwrap();
        prop_assert!((lo, hi) == (-1.0, 1.0) || (lo.abs().max(hi.abs()) - 1.0).abs() < 1e-12);
        for strategy in enumerate_strategies(s).unwrap().take(200) {
            let b = strategy_behaviour(&strategy);
            prop_assert!(b.validate(1e-12).is_valid());
            let value = t.evaluate(&b).unwrap();
            prop_assert!(lo - 1e-12 <= value && value <= hi + 1e-12);
        }
    }

    #[test]
    fn q_is_linear_in_the_functional((s, d) in small_scenario(), seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let u = random_normalized_functional(s, &mut rng).unwrap();
        let a = Assemblage::random(s, d, &mut rng).unwrap();
        let psi = sample_haar_state(d, s.parties(), &mut rng).unwrap();
        let combo = t.linear_combination(alpha, &u, beta).unwrap();
        let lhs = evaluate_q(&psi, &combo, &a).unwrap();
        let rhs = alpha * evaluate_q(&psi, &t, &a).unwrap() + beta * evaluate_q(&psi, &u, &a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn q_matches_behaviour_evaluation((s, d) in small_scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let a = Assemblage::random(s, d, &mut rng).unwrap();
        let psi = sample_haar_state(d, s.parties(), &mut rng).unwrap();
        let p = behaviour_of(&psi, &a).unwrap();
        prop_assert!(p.validate(1e-10).is_valid());
        prop_assert!(p.check_nonsignalling(1e-10).worst <= 1e-10);
        let direct = evaluate_q(&psi, &t, &a).unwrap();
        let via = t.evaluate(&p).unwrap();
        prop_assert!((direct - via).abs() <= 1e-10);
        let op = BellOperator::new(&t, &a).unwrap();
        prop_assert!((op.expectation(&psi).unwrap() - direct).abs() <= 1e-10);
    }

    #[test]
    fn distances_satisfy_triangle_inequality((s, d) in small_scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Assemblage> = (0..3).map(|_| Assemblage::random(s, d, &mut rng).unwrap()).collect();
        let t: Vec<BellFunctional> = (0..3).map(|_| random_normalized_functional(s, &mut rng).unwrap()).collect();
        let da = |i: usize, j: usize| dist_assemblages(&a[i], &a[j]).unwrap();
        let dt = |i: usize, j: usize| dist_functionals(&t[i], &t[j], 2.0).unwrap();
        prop_assert_eq!(da(0, 0), 0.0);
        prop_assert_eq!(da(0, 1), da(1, 0));
        prop_assert!(da(0, 2) <= da(0, 1) + da(1, 2) + 1e-15);
        prop_assert!(dt(0, 2) <= dt(0, 1) + dt(1, 2) + 1e-15);
    }

    #[test]
    fn operator_norm_bridge(d in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(d, 2, &mut rng).unwrap();
        let q = random_povm(d, 2, &mut rng).unwrap();
        let diff = p.element(0) - q.element(0);
        let max_param = povm_to_params(&diff).unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let norm = diff.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        prop_assert!(norm <= 2.0 * (d * d) as f64 * max_param + 1e-12);
    }

    #[test]
    fn normalize_is_idempotent_and_positivize_is_equivalent(s in scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let again = normalize(&t).unwrap();
        for (x, y) in t.coeffs().iter().zip(again.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let (_, hi) = classical_bounds(&t).unwrap();
        let p = positivize(&t).unwrap();
        prop_assert!(p.coeffs().iter().all(|&c| (-1e-12..=1.0 + 1e-12).contains(&c)));
        let (_, phi) = classical_bounds(&p).unwrap();
        prop_assert!((phi - 1.0).abs() <= 1e-12);
        // same ordering of behaviours relative to the bound
        let a = Assemblage::random(s, 2, &mut rng).unwrap();
        let psi = sample_haar_state(2, s.parties(), &mut rng).unwrap();
        let b = behaviour_of(&psi, &a).unwrap();
        let (tv, pv) = (t.evaluate(&b).unwrap(), p.evaluate(&b).unwrap());
        prop_assert_eq!(tv > hi + 1e-9, pv > 1.0 + 1e-9);
    }
}

#[test]
fn json_round_trips_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = Scenario::new(3, 2, 3).unwrap();
    let a = Assemblage::random(s, 3, &mut rng).unwrap();
    let back = io::assemblage_from_json(&io::assemblage_to_json(&a, Some(12)).unwrap()).unwrap();
    assert_eq!(dist_assemblages(&a, &back).unwrap(), 0.0);
    let psi = sample_haar_state(3, 3, &mut rng).unwrap();
    let back = io::state_from_json(&io::state_to_json(&psi, None).unwrap()).unwrap();
    assert_eq!(psi.amplitudes(), back.amplitudes());
    let t = random_normalized_functional(s, &mut rng).unwrap();
    let back = io::functional_from_json(&io::functional_to_json(&t).unwrap()).unwrap();
    assert_eq!(t.coeffs(), back.coeffs());
    let b = behaviour_of(&psi, &a).unwrap();
    let back = io::behaviour_from_json(&io::behaviour_to_json(&b).unwrap()).unwrap();
    assert_eq!(b.probs(), back.probs());
}

#[test]
fn product_states_never_exceed_the_local_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let s = Scenario::new(3, 2, 2).unwrap();
    for _ in 0..100 {
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let a = Assemblage::random(s, 2, &mut rng).unwrap();
        let local: Vec<_> = (0..3)
            .map(|_| sample_haar_state(2, 1, &mut rng).unwrap().amplitudes().to_vec())
            .collect();
        let psi = bellconc::quantum::PureState::product(&local).unwrap();
        assert!(evaluate_q(&psi, &t, &a).unwrap().abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn dense_and_streamed_operators_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let s = Scenario::new(3, 2, 3).unwrap();
    let t = random_normalized_functional(s, &mut rng).unwrap();
    let a = Assemblage::random(s, 2, &mut rng).unwrap();
    let op = BellOperator::new(&t, &a).unwrap();
    let dense = op.to_dense().unwrap();
    let psi = sample_haar_state(2, 3, &mut rng).unwrap();
    let x = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let streamed = op.apply(psi.amplitudes()).unwrap();
    for (u, v) in (&dense * &x).iter().zip(&streamed) {
        assert_relative_eq!(u.re, v.re, epsilon = 1e-12);
        assert_relative_eq!(u.im, v.im, epsilon = 1e-12);
    }
    let trace: f64 = (0..dense.nrows()).map(|i| dense[(i, i)].re).sum::<f64>() / dense.nrows() as f64;
    assert_relative_eq!(trace, op.normalized_trace(), epsilon = 1e-12);
}
