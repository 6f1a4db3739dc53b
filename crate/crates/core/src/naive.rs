//! The EPR-based coin toss and the basis re-roll attack against it.
//!
//! Alice prepares `m` pairs `(|00⟩ + |11⟩)/√2` and sends the second qubit
//! of each to Bob. Bob picks a basis (`+` or `×`) per position, announces
//! it and measures his qubit; Alice measures hers in the announced bases and
//! announces her `m` outcomes; Bob checks them against his own. Each side's
//! bit is the parity of its outcomes.
//!
//! Each pair is a real 4-vector over `|00⟩, |01⟩, |10⟩, |11⟩` with Alice's
//! qubit first.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::Party;
use crate::rng::{self, DrawKey, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `+`: `|0⟩, |1⟩`.
    Rectilinear,
    /// `×`: `(|0⟩ ± |1⟩)/√2`.
    Diagonal,
}

impl Basis {
    /// Amplitudes of the basis vector for `outcome`.
    pub fn vector(self, outcome: u8) -> [f64; 2] {
        match (self, outcome) {
            (Basis::Rectilinear, 0) => [1.0, 0.0],
            (Basis::Rectilinear, _) => [0.0, 1.0],
            (Basis::Diagonal, 0) => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            (Basis::Diagonal, _) => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        }
    }
}

/// `m` two-qubit registers, one per position.
#[derive(Clone, Debug, PartialEq)]
pub struct EprRegister {
    pairs: Vec<[f64; 4]>,
}

impl EprRegister {
    pub fn new(m: usize) -> Self {
        Self {
            pairs: vec![[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]; m],
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// State of the pair at 1-based position `j`.
    pub fn state(&self, j: usize) -> [f64; 4] {
        self.pairs[j - 1]
    }

    pub fn norm(&self, j: usize) -> f64 {
        self.pairs[j - 1].iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    fn index(qubit: Party, own: usize, other: usize) -> usize {
        match qubit {
            Party::Alice => 2 * own + other,
            Party::Bob => 2 * other + own,
        }
    }

    /// Amplitudes of the other qubit after projecting `qubit` onto the
    /// basis vector for `outcome` (unnormalised).
    fn project(&self, j: usize, qubit: Party, basis: Basis, outcome: u8) -> [f64; 2] {
        let v = basis.vector(outcome);
        let psi = self.pairs[j - 1];
        let mut rest = [0.0; 2];
        for (other, r) in rest.iter_mut().enumerate() {
            *r = (0..2)
                .map(|own| v[own] * psi[Self::index(qubit, own, other)])
                .sum();
        }
        rest
    }

    /// Probability of `outcome` when `qubit` of pair `j` is measured in `basis`.
    pub fn probability(&self, j: usize, qubit: Party, basis: Basis, outcome: u8) -> f64 {
        let rest = self.project(j, qubit, basis, outcome);
        rest[0] * rest[0] + rest[1] * rest[1]
    }

    /// Measures `qubit` of pair `j` with the uniform draw `u` and collapses
    /// the pair onto the observed outcome.
    pub fn measure(&mut self, j: usize, qubit: Party, basis: Basis, u: f64) -> u8 {
        let outcome = (u >= self.probability(j, qubit, basis, 0)) as u8;
        self.collapse(j, qubit, basis, outcome);
        outcome
    }

    /// Projects `qubit` of pair `j` onto the basis vector for `outcome` and
    /// renormalises; returns the outcome's probability.
    pub fn collapse(&mut self, j: usize, qubit: Party, basis: Basis, outcome: u8) -> f64 {
        let rest = self.project(j, qubit, basis, outcome);
        let p = rest[0] * rest[0] + rest[1] * rest[1];
        let v = basis.vector(outcome);
        let mut next = [0.0; 4];
        for own in 0..2 {
            for other in 0..2 {
                next[Self::index(qubit, own, other)] = v[own] * rest[other] / p.sqrt();
            }
        }
        self.pairs[j - 1] = next;
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NaiveStrategy {
    Honest,
    /// Measure everything in `+` first; when the parity misses `target`,
    /// announce `×` at position `m` and accept only a re-rolled parity
    /// equal to `target`.
    Reroll {
        target: u8,
    },
}

impl fmt::Display for NaiveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NaiveStrategy::Honest => f.write_str("naive-honest"),
            NaiveStrategy::Reroll { target } => write!(f, "naive-reroll:target={target}"),
        }
    }
}

impl FromStr for NaiveStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive-honest" => Ok(NaiveStrategy::Honest),
            "naive-reroll" | "naive-reroll:target=0" => Ok(NaiveStrategy::Reroll { target: 0 }),
            "naive-reroll:target=1" => Ok(NaiveStrategy::Reroll { target: 1 }),
            other => Err(Error::InvalidParameter(format!(
                "unknown naive strategy '{other}'"
            ))),
        }
    }
}

/// Result of one run of the EPR-based protocol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaiveOutcome {
    pub bases: Vec<Basis>,
    pub alice_outcomes: Vec<u8>,
    pub bob_outcomes: Vec<u8>,
    /// Bob's verification failed (or, for the attack, was made to fail).
    pub aborted: bool,
    pub alice_bit: Option<u8>,
    pub bob_bit: Option<u8>,
}

fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, b| acc ^ b)
}

fn draw(seed: u64, who: Party, purpose: Purpose, j: usize, k: usize) -> f64 {
    let party = match who {
        Party::Alice => 1,
        Party::Bob => 2,
    };
    rng::uniform(seed, DrawKey::new(party, purpose, 0, j).with_k(k))
}

/// Runs one session with an honest Alice against `bob`.
pub fn run_naive(m: usize, bob: NaiveStrategy, seed: u64) -> Result<NaiveOutcome> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut register = EprRegister::new(m);
    let mut bob_outcomes = Vec::with_capacity(m);
    let bases: Vec<Basis> = match bob {
        NaiveStrategy::Honest => (1..=m)
            .map(|j| {
                let basis = if draw(seed, Party::Bob, Purpose::BasisChoice, j, 0) < 0.5 {
                    Basis::Rectilinear
                } else {
                    Basis::Diagonal
                };
                let u = draw(seed, Party::Bob, Purpose::EprMeasurement, j, 0);
                bob_outcomes.push(register.measure(j, Party::Bob, basis, u));
                basis
            })
            .collect(),
        NaiveStrategy::Reroll { target } => {
            if m < 2 {
                return Err(Error::InvalidParameter(
                    "the re-roll attack needs m ≥ 2".into(),
                ));
            }
            for j in 1..=m {
                let u = draw(seed, Party::Bob, Purpose::EprMeasurement, j, 0);
                bob_outcomes.push(register.measure(j, Party::Bob, Basis::Rectilinear, u));
            }
            let mut bases = vec![Basis::Rectilinear; m];
            if parity(&bob_outcomes) != target {
                bases[m - 1] = Basis::Diagonal;
            }
            bases
        }
    };

    let alice_outcomes: Vec<u8> = (1..=m)
        .map(|j| {
            let u = draw(seed, Party::Alice, Purpose::EprMeasurement, j, 0);
            register.measure(j, Party::Alice, bases[j - 1], u)
        })
        .collect();

    let aborted = match bob {
        NaiveStrategy::Honest => alice_outcomes != bob_outcomes,
        NaiveStrategy::Reroll { target } => {
            if bases[m - 1] == Basis::Diagonal {
                // fresh × reading of his half, reported as the outcome at m
                let u = draw(seed, Party::Bob, Purpose::EprMeasurement, m, 1);
                bob_outcomes[m - 1] = register.measure(m, Party::Bob, Basis::Diagonal, u);
                if parity(&alice_outcomes) == target {
                    bob_outcomes[m - 1] = alice_outcomes[m - 1];
                    false
                } else {
                    true
                }
            } else {
                false
            }
        }
    };

    let (alice_bit, bob_bit) = if aborted {
        (None, None)
    } else {
        (Some(parity(&alice_outcomes)), Some(parity(&bob_outcomes)))
    };
    Ok(NaiveOutcome {
        bases,
        alice_outcomes,
        bob_outcomes,
        aborted,
        alice_bit,
        bob_bit,
    })
}

/// Exact `[p_target, p_other, abort]` of the re-roll attack, by enumerating
/// every measurement branch with its Born probability.
pub fn reroll_distribution(m: usize) -> Result<[f64; 3]> {
    if !(2..=16).contains(&m) {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            range: "[2, 16]",
        });
    }
    let target = 0;
    let mut dist = [0.0; 3];
    // Bob's + outcomes
    for bob_bits in 0u32..(1 << m) {
        let mut register = EprRegister::new(m);
        let mut weight = 1.0;
        let bob: Vec<u8> = (0..m).map(|k| ((bob_bits >> k) & 1) as u8).collect();
        for j in 1..=m {
            weight *= register.collapse(j, Party::Bob, Basis::Rectilinear, bob[j - 1]);
        }
        if parity(&bob) == target {
            // Alice's + outcomes copy Bob's
            dist[0] += weight;
            continue;
        }
        // Alice's × outcome at m decides
        for outcome in 0..2u8 {
            let p = register.probability(m, Party::Alice, Basis::Diagonal, outcome);
            let alice_parity = parity(&bob[..m - 1]) ^ outcome;
            if alice_parity == target {
                dist[0] += weight * p;
            } else {
                dist[2] += weight * p;
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_measurements() {
        let mut r = EprRegister::new(2);
        for basis in [Basis::Rectilinear, Basis::Diagonal] {
            for qubit in [Party::Alice, Party::Bob] {
                assert!((r.probability(1, qubit, basis, 0) - 0.5).abs() < 1e-15);
            }
        }
        let b = r.measure(1, Party::Bob, Basis::Diagonal, 0.7);
        assert!((r.norm(1) - 1.0).abs() < 1e-12);
        assert!((r.probability(1, Party::Alice, Basis::Diagonal, b) - 1.0).abs() < 1e-12);
        assert!((r.probability(1, Party::Alice, Basis::Rectilinear, 0) - 0.5).abs() < 1e-12);
        // the other pair is untouched
        assert_eq!(r.state(2), EprRegister::new(1).state(1));
    }

    #[test]
    fn honest_runs_agree() {
        for seed in 0..500 {
            let out = run_naive(3, NaiveStrategy::Honest, seed).unwrap();
            assert!(!out.aborted);
            assert_eq!(out.alice_outcomes, out.bob_outcomes);
            assert_eq!(out.alice_bit, out.bob_bit);
        }
        let single = run_naive(1, NaiveStrategy::Honest, 3).unwrap();
        assert_eq!(single.alice_bit, single.bob_bit);
        assert!(run_naive(0, NaiveStrategy::Honest, 3).is_err());
    }

    #[test]
    fn reroll_enumeration() {
        for m in 2..=6 {
            let [hit, miss, abort] = reroll_distribution(m).unwrap();
            assert!((hit - 0.75).abs() < 1e-12);
            assert!(miss.abs() < 1e-12);
            assert!((abort - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn reroll_never_yields_the_other_bit() {
        for seed in 0..500 {
            let out = run_naive(4, NaiveStrategy::Reroll { target: 1 }, seed).unwrap();
            if !out.aborted {
                assert_eq!(out.alice_bit, Some(1));
                assert_eq!(out.bob_bit, Some(1));
            }
        }
    }

    #[test]
    fn names_parse() {
        for s in [
            NaiveStrategy::Honest,
            NaiveStrategy::Reroll { target: 0 },
            NaiveStrategy::Reroll { target: 1 },
        ] {
            assert_eq!(s.to_string().parse::<NaiveStrategy>().unwrap(), s);
        }
        assert!("naive".parse::<NaiveStrategy>().is_err());
    }
}
