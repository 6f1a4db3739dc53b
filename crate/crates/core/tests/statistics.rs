//! Monte Carlo frequencies against closed forms and exact enumerations.

use std::f64::consts::PI;

use qcoin::harness::{monte_carlo, naive_monte_carlo, within_sigmas};
use qcoin::naive::{reroll_distribution, run_naive, NaiveStrategy};
use qcoin::protocol::derive_params;
use qcoin::strategies::{attack_analytics_at, best_guess_success, StrategySpec};

/// Upper 0.1% point of χ² with 3 degrees of freedom.
const CHI2_3DOF_999: f64 = 16.266;

fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn naive_honest_outcomes_are_uniform() {
    let mut counts = [0u64; 4];
    for seed in 0..20_000 {
        let out = run_naive(2, NaiveStrategy::Honest, seed).unwrap();
        assert!(!out.aborted);
        assert_eq!(out.alice_outcomes, out.bob_outcomes);
        counts[(out.alice_outcomes[0] * 2 + out.alice_outcomes[1]) as usize] += 1;
    }
    let stat = chi_square(&counts, &[0.25; 4]);
    assert!(stat < CHI2_3DOF_999, "χ² = {stat}, counts {counts:?}");
}

#[test]
fn naive_honest_bases_and_bits_are_independent() {
    // (basis, Alice's bit) at a single position: four equally likely cells
    let mut counts = [0u64; 4];
    for seed in 0..20_000 {
        let out = run_naive(1, NaiveStrategy::Honest, seed).unwrap();
        let basis = (out.bases[0] == qcoin::naive::Basis::Diagonal) as usize;
        counts[basis * 2 + out.alice_outcomes[0] as usize] += 1;
    }
    let stat = chi_square(&counts, &[0.25; 4]);
    assert!(stat < CHI2_3DOF_999, "χ² = {stat}, counts {counts:?}");
}

#[test]
fn naive_reroll_matches_enumeration() {
    for m in [2, 3, 5] {
        for target in [0, 1] {
            let [hit, miss, abort] = reroll_distribution(m).unwrap();
            let est = naive_monte_carlo(m, NaiveStrategy::Reroll { target }, 20_000, 3, 1).unwrap();
            let (hits, misses) = if target == 0 {
                (est.tally.zeros, est.tally.ones)
            } else {
                (est.tally.ones, est.tally.zeros)
            };
            assert!(within_sigmas(hits, est.trials, hit, 4.0), "m={m} {est:?}");
            assert_eq!(misses as f64, miss * est.trials as f64);
            assert!(
                within_sigmas(est.tally.aborts, est.trials, abort, 4.0),
                "m={m} {est:?}"
            );
            assert_eq!(est.tally.disagreements, 0);
        }
    }
}

#[test]
fn best_guess_matches_its_success_formula() {
    let theta = PI / 9.0;
    let m = 3;
    let params = derive_params(m, theta).unwrap();
    for round in [1, 8, 20] {
        let expected = best_guess_success(m, theta, round).unwrap();
        let bob = StrategySpec::BestGuess {
            target: 0,
            round: Some(round),
        };
        let est = monte_carlo(&params, &StrategySpec::Honest, &bob, 20_000, 17, 1).unwrap();
        assert!(
            within_sigmas(est.tally.zeros, est.trials, expected, 4.0),
            "round {round}: p0 = {} expected {expected}",
            est.p0
        );
    }
}

#[test]
fn conclusive_attack_at_other_rounds() {
    // measuring early loses conclusiveness, measuring late loses the swap
    let theta = PI / 9.0;
    let m = 2;
    let params = derive_params(m, theta).unwrap();
    for round in [5, params.n] {
        let a = attack_analytics_at(m, theta, round).unwrap();
        let bob = StrategySpec::Conclusive {
            target: 0,
            round: Some(round),
        };
        let est = monte_carlo(&params, &StrategySpec::Honest, &bob, 20_000, 23, 1).unwrap();
        assert!(
            within_sigmas(est.tally.zeros, est.trials, a.p0, 4.0),
            "{a:?} {est:?}"
        );
        assert!(
            within_sigmas(est.tally.all_conclusive, est.trials, a.pc, 4.0),
            "{a:?} {est:?}"
        );
    }
}

#[test]
fn selective_abort_never_shows_the_other_bit() {
    let params = derive_params(3, PI / 9.0).unwrap();
    let est = monte_carlo(
        &params,
        &StrategySpec::Honest,
        &StrategySpec::SelectiveAbort { target: 1 },
        5_000,
        4,
        1,
    )
    .unwrap();
    assert_eq!(est.tally.zeros, 0);
    assert!(within_sigmas(est.tally.ones, est.trials, 0.5, 4.0));
    assert!(within_sigmas(est.tally.aborts, est.trials, 0.5, 4.0));
}
