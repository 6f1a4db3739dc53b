//! Party behaviours and their closed-form figures.
//!
//! A [`Strategy`] is a set of hooks the session engine calls in schedule
//! order. Every hook defaults to honest play, so an attack only overrides
//! the points where it deviates.

mod analytics;

pub use analytics::{
    attack_analytics, attack_analytics_at, best_guess_success, bias_grid_maximum, bias_objective,
    bias_upper_bound, critical_ratio, critical_round, AttackAnalytics, BiasBound,
};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discrimination::{Conclusion, ParityHelstrom, MAX_DENSE_M};
use crate::error::{Error, Result};
use crate::protocol::{Ctx, Dispatch, Party, ProtocolParams, Variant, Which};
use crate::rng::Purpose;

/// What a strategy observed, for the harness tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyReport {
    /// Every discrimination measurement was conclusive.
    pub all_conclusive: bool,
    /// The committed bit was switched after the measurement.
    pub swapped: bool,
}

pub trait Strategy {
    fn name(&self) -> String;

    fn is_honest(&self) -> bool {
        true
    }

    /// Step 1: one bit per position.
    fn secret_bits(&mut self, ctx: &mut Ctx<'_>) -> Vec<u8> {
        (1..=ctx.params().m)
            .map(|j| ctx.random_bit(Purpose::SecretBit, 0, j))
            .collect()
    }

    /// Step 2, slot `(i, j)`.
    fn send(&mut self, ctx: &mut Ctx<'_>, i: usize, j: usize) -> Dispatch {
        match ctx.params().variant {
            Variant::WithReturn => Dispatch::Pair {
                mask: ctx.random_bit(Purpose::Mask, i, j),
            },
            Variant::NoReturn => Dispatch::Fresh(ctx.secret(j)),
        }
    }

    /// Step 3: the announced `secret ⊕ mask`.
    fn announce_mask(&mut self, ctx: &mut Ctx<'_>, i: usize, j: usize) -> Result<u8> {
        let mask = ctx.mask(i, j).ok_or_else(|| {
            Error::InvalidParameter(format!("no pair was sent in slot ({i}, {j})"))
        })?;
        Ok(ctx.secret(j) ^ mask)
    }

    /// Step 3: which particle of the partner's pair to send back, given the
    /// partner's announcement. Keeping `ψ(partner secret)` means returning
    /// the second particle when the announcement is 0.
    fn choose_return(&mut self, _ctx: &mut Ctx<'_>, _i: usize, _j: usize, announced: u8) -> Which {
        if announced == 0 {
            Which::Second
        } else {
            Which::First
        }
    }

    /// Step 4.
    fn reveal(&mut self, ctx: &mut Ctx<'_>, j: usize) -> u8 {
        ctx.secret(j)
    }

    /// Whether this party performs its step-4 and step-5 tests.
    fn runs_own_tests(&self) -> bool {
        true
    }

    /// Last chance to walk away after seeing the final bit.
    fn accept(&mut self, _ctx: &mut Ctx<'_>, _bit: u8) -> bool {
        true
    }

    fn report(&self) -> StrategyReport {
        StrategyReport::default()
    }
}

/// A strategy description, independent of any session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategySpec {
    Honest,
    /// Bob measures every position unambiguously at `round` (default: the
    /// critical round) and switches `b_m` when all outcomes are conclusive
    /// and the final bit would miss `target`.
    Conclusive {
        target: u8,
        round: Option<usize>,
    },
    /// Bob guesses the parity of Alice's bits with the minimum-error
    /// measurement at `round` and switches `b_m` accordingly.
    BestGuess {
        target: u8,
        round: Option<usize>,
    },
    /// No-return variant only: Bob forwards Alice's particles as his own.
    Reflection,
    /// Honest play, declining any final bit other than `target`.
    SelectiveAbort {
        target: u8,
    },
}

impl StrategySpec {
    pub fn is_honest(&self) -> bool {
        matches!(self, StrategySpec::Honest)
    }

    fn inapplicable(&self, reason: &'static str) -> Error {
        Error::Inapplicable {
            strategy: self.to_string(),
            reason,
        }
    }

    /// Checks the spec against a role and parameters and precomputes
    /// anything shared between sessions.
    pub fn resolve(&self, role: Party, params: &ProtocolParams) -> Result<ResolvedStrategy> {
        let bob_only = |spec: &Self| {
            if role == Party::Bob {
                Ok(())
            } else {
                Err(spec.inapplicable("this attack is played by Bob"))
            }
        };
        let with_return = |spec: &Self| {
            if params.variant == Variant::WithReturn {
                Ok(())
            } else {
                Err(spec.inapplicable("requires the with-return variant"))
            }
        };
        let round_for = |round: Option<usize>| -> Result<usize> {
            let round = match round {
                Some(r) => r,
                None => critical_round(params.m, params.theta)?,
            };
            if round == 0 || round > params.n {
                return Err(Error::InvalidParameter(format!(
                    "attack round {round} outside 1..={}",
                    params.n
                )));
            }
            Ok(round)
        };
        let check_target = |target: u8| {
            if target > 1 {
                Err(Error::InvalidParameter(format!(
                    "target must be 0 or 1, got {target}"
                )))
            } else {
                Ok(())
            }
        };
        Ok(match *self {
            StrategySpec::Honest => ResolvedStrategy::Honest,
            StrategySpec::Conclusive { target, round } => {
                bob_only(self)?;
                with_return(self)?;
                check_target(target)?;
                ResolvedStrategy::Swap {
                    target,
                    round: round_for(round)?,
                    measurement: None,
                }
            }
            StrategySpec::BestGuess { target, round } => {
                bob_only(self)?;
                with_return(self)?;
                check_target(target)?;
                if params.m > MAX_DENSE_M {
                    return Err(Error::Resource {
                        what: "best-guess parity measurement m",
                        limit: MAX_DENSE_M,
                    });
                }
                let round = round_for(round)?;
                let omega = params.gamma().powi(round as i32).acos();
                ResolvedStrategy::Swap {
                    target,
                    round,
                    measurement: Some(Arc::new(ParityHelstrom::new(params.m, omega)?)),
                }
            }
            StrategySpec::Reflection => {
                bob_only(self)?;
                if params.variant != Variant::NoReturn {
                    return Err(self.inapplicable(
                        "the pair-and-return structure prevents forwarding the partner's particles",
                    ));
                }
                ResolvedStrategy::Reflection
            }
            StrategySpec::SelectiveAbort { target } => {
                check_target(target)?;
                ResolvedStrategy::SelectiveAbort { target }
            }
        })
    }

    pub fn instantiate(&self, role: Party, params: &ProtocolParams) -> Result<Box<dyn Strategy>> {
        Ok(self.resolve(role, params)?.spawn())
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let with_round =
            |f: &mut fmt::Formatter<'_>, name: &str, target: u8, round: Option<usize>| {
                write!(f, "{name}:target={target}")?;
                match round {
                    Some(r) => write!(f, ",round={r}"),
                    None => Ok(()),
                }
            };
        match *self {
            StrategySpec::Honest => f.write_str("honest"),
            StrategySpec::Conclusive { target, round } => {
                with_round(f, "conclusive", target, round)
            }
            StrategySpec::BestGuess { target, round } => with_round(f, "best-guess", target, round),
            StrategySpec::Reflection => f.write_str("reflection"),
            StrategySpec::SelectiveAbort { target } => write!(f, "selective-abort:target={target}"),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    /// Parses `name` or `name:key=value,...`, the format written by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut target = 0u8;
        let mut round = None;
        for pair in args.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key=value in strategy '{s}'"))
            })?;
            let bad =
                || Error::InvalidParameter(format!("bad value for '{key}' in strategy '{s}'"));
            match key {
                "target" => target = value.parse().ok().filter(|&t| t <= 1).ok_or_else(bad)?,
                "round" => round = Some(value.parse().map_err(|_| bad())?),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown key '{key}' in strategy '{s}'"
                    )))
                }
            }
        }
        let no_args = |spec: StrategySpec| {
            if args.is_empty() {
                Ok(spec)
            } else {
                Err(Error::InvalidParameter(format!(
                    "strategy '{name}' takes no arguments"
                )))
            }
        };
        let no_round = |spec: StrategySpec| {
            if round.is_none() {
                Ok(spec)
            } else {
                Err(Error::InvalidParameter(format!(
                    "strategy '{name}' takes no round"
                )))
            }
        };
        match name {
            "honest" => no_args(StrategySpec::Honest),
            "conclusive" => Ok(StrategySpec::Conclusive { target, round }),
            "best-guess" => Ok(StrategySpec::BestGuess { target, round }),
            "reflection" => no_args(StrategySpec::Reflection),
            "selective-abort" => no_round(StrategySpec::SelectiveAbort { target }),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy '{other}'"
            ))),
        }
    }
}

/// A validated strategy ready to spawn per-session instances cheaply.
#[derive(Clone, Debug)]
pub enum ResolvedStrategy {
    Honest,
    Swap {
        target: u8,
        round: usize,
        /// `None` for unambiguous discrimination, otherwise the parity
        /// measurement used by the best-guess attack.
        measurement: Option<Arc<ParityHelstrom>>,
    },
    Reflection,
    SelectiveAbort {
        target: u8,
    },
}

impl ResolvedStrategy {
    pub fn is_honest(&self) -> bool {
        matches!(self, ResolvedStrategy::Honest)
    }

    pub fn spawn(&self) -> Box<dyn Strategy> {
        match self {
            ResolvedStrategy::Honest => Box::new(Honest),
            ResolvedStrategy::Swap {
                target,
                round,
                measurement,
            } => Box::new(SwapAttack::new(*target, *round, measurement.clone())),
            ResolvedStrategy::Reflection => Box::new(Reflection),
            ResolvedStrategy::SelectiveAbort { target } => {
                Box::new(SelectiveAbort { target: *target })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Honest;

impl Strategy for Honest {
    fn name(&self) -> String {
        StrategySpec::Honest.to_string()
    }
}

/// Bob plays honestly until slot `(round, m)` of step 3. There, before his
/// own announcement, he measures the `round` particles he keeps at every
/// position to learn `A = ⊕ a_j`, then picks `b̂_m = target ⊕ A ⊕ B^{[m−1]}`.
/// If that differs from `b_m` he announces and reveals as if his bit had
/// been `b̂_m` from that round on.
#[derive(Clone, Debug)]
pub struct SwapAttack {
    target: u8,
    round: usize,
    measurement: Option<Arc<ParityHelstrom>>,
    committed: Option<u8>,
    report: StrategyReport,
}

impl SwapAttack {
    pub fn new(target: u8, round: usize, measurement: Option<Arc<ParityHelstrom>>) -> Self {
        Self {
            target,
            round,
            measurement,
            committed: None,
            report: StrategyReport::default(),
        }
    }

    /// The parity of Alice's bits, or `None` if a measurement was inconclusive.
    fn learn_parity(&mut self, ctx: &mut Ctx<'_>, i: usize) -> Result<Option<u8>> {
        let m = ctx.params().m;
        let groups: Vec<_> = (1..=m).map(|j| ctx.kept_from_partner(j)).collect();
        if let Some(measurement) = &self.measurement {
            self.report.all_conclusive = true;
            return ctx.measure_parity(&groups, measurement, i, m).map(Some);
        }
        let mut parity = 0;
        let mut conclusive = true;
        for (k, ids) in groups.iter().enumerate() {
            match ctx.measure_unambiguous(ids, i, k + 1)? {
                Conclusion::Bit(b) => parity ^= b,
                Conclusion::Inconclusive => conclusive = false,
            }
        }
        self.report.all_conclusive = conclusive;
        Ok(conclusive.then_some(parity))
    }

    /// Bob's effective bit at position `j` from round `i` on.
    fn bit(&self, ctx: &Ctx<'_>, i: usize, j: usize) -> u8 {
        match self.committed {
            Some(b) if j == ctx.params().m && i >= self.round => b,
            _ => ctx.secret(j),
        }
    }
}

impl Strategy for SwapAttack {
    fn name(&self) -> String {
        let spec = match self.measurement {
            None => StrategySpec::Conclusive {
                target: self.target,
                round: Some(self.round),
            },
            Some(_) => StrategySpec::BestGuess {
                target: self.target,
                round: Some(self.round),
            },
        };
        spec.to_string()
    }

    fn is_honest(&self) -> bool {
        false
    }

    fn announce_mask(&mut self, ctx: &mut Ctx<'_>, i: usize, j: usize) -> Result<u8> {
        let m = ctx.params().m;
        if i == self.round && j == m {
            if let Some(alice_parity) = self.learn_parity(ctx, i)? {
                let others = (1..m).fold(0, |acc, k| acc ^ ctx.secret(k));
                let wanted = self.target ^ alice_parity ^ others;
                self.report.swapped = wanted != ctx.secret(m);
                self.committed = Some(wanted);
            }
        }
        let mask = ctx.mask(i, j).ok_or_else(|| {
            Error::InvalidParameter(format!("no pair was sent in slot ({i}, {j})"))
        })?;
        Ok(self.bit(ctx, i, j) ^ mask)
    }

    fn reveal(&mut self, ctx: &mut Ctx<'_>, j: usize) -> u8 {
        self.bit(ctx, self.round, j)
    }

    fn runs_own_tests(&self) -> bool {
        false
    }

    fn report(&self) -> StrategyReport {
        self.report
    }
}

/// Forwards every particle Alice sends and echoes her revealed bits, so
/// each `a_j ⊕ b_j` is 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct Reflection;

impl Strategy for Reflection {
    fn name(&self) -> String {
        StrategySpec::Reflection.to_string()
    }

    fn is_honest(&self) -> bool {
        false
    }

    fn send(&mut self, ctx: &mut Ctx<'_>, i: usize, j: usize) -> Dispatch {
        match ctx.received(i, j).first() {
            Some(&id) => Dispatch::Forward(id),
            // Alice sent nothing: fall back to a fresh particle
            None => Dispatch::Fresh(ctx.secret(j)),
        }
    }

    fn reveal(&mut self, ctx: &mut Ctx<'_>, j: usize) -> u8 {
        ctx.partner_reveal(j).unwrap_or_else(|| ctx.secret(j))
    }

    fn runs_own_tests(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SelectiveAbort {
    pub target: u8,
}

impl Strategy for SelectiveAbort {
    fn name(&self) -> String {
        StrategySpec::SelectiveAbort {
            target: self.target,
        }
        .to_string()
    }

    fn is_honest(&self) -> bool {
        false
    }

    fn accept(&mut self, _ctx: &mut Ctx<'_>, bit: u8) -> bool {
        bit == self.target
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{derive_params, run_session, AbortCause, SessionResult, TestKind};
    use std::f64::consts::PI;

    #[test]
    fn names_round_trip() {
        let specs = [
            StrategySpec::Honest,
            StrategySpec::Conclusive {
                target: 1,
                round: Some(27),
            },
            StrategySpec::Conclusive {
                target: 0,
                round: None,
            },
            StrategySpec::BestGuess {
                target: 0,
                round: Some(3),
            },
            StrategySpec::Reflection,
            StrategySpec::SelectiveAbort { target: 1 },
        ];
        for spec in specs {
            assert_eq!(spec.to_string().parse::<StrategySpec>().unwrap(), spec);
        }
        assert_eq!(
            "conclusive".parse::<StrategySpec>().unwrap(),
            StrategySpec::Conclusive {
                target: 0,
                round: None
            }
        );
        for bad in [
            "",
            "lazy",
            "honest:target=1",
            "conclusive:target=2",
            "conclusive:x=1",
            "selective-abort:round=3",
        ] {
            assert!(bad.parse::<StrategySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn role_and_variant_guards() {
        let p = derive_params(4, PI / 9.0).unwrap();
        let no_return = p.with_variant(Variant::NoReturn);
        let conclusive = StrategySpec::Conclusive {
            target: 0,
            round: None,
        };
        assert!(matches!(
            StrategySpec::Reflection.resolve(Party::Bob, &p),
            Err(Error::Inapplicable { .. })
        ));
        assert!(StrategySpec::Reflection
            .resolve(Party::Bob, &no_return)
            .is_ok());
        assert!(StrategySpec::Reflection
            .resolve(Party::Alice, &no_return)
            .is_err());
        assert!(conclusive.resolve(Party::Alice, &p).is_err());
        assert!(conclusive.resolve(Party::Bob, &no_return).is_err());
        let too_late = StrategySpec::Conclusive {
            target: 0,
            round: Some(p.n + 1),
        };
        assert!(too_late.resolve(Party::Bob, &p).is_err());
        match conclusive.resolve(Party::Bob, &p).unwrap() {
            ResolvedStrategy::Swap { round, .. } => assert_eq!(round, 27),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reflection_forces_zero() {
        let p = derive_params(3, PI / 9.0)
            .unwrap()
            .with_variant(Variant::NoReturn);
        for seed in 0..50 {
            let out =
                run_session(&p, &StrategySpec::Honest, &StrategySpec::Reflection, seed).unwrap();
            assert_eq!(out.result, SessionResult::Completed);
            assert_eq!(out.alice_bit, Some(0));
        }
    }

    #[test]
    fn selective_abort_declines_the_other_bit() {
        let p = derive_params(2, PI / 9.0).unwrap();
        let spec = StrategySpec::SelectiveAbort { target: 1 };
        let mut seen = [0; 2];
        for seed in 0..100 {
            let out = run_session(&p, &StrategySpec::Honest, &spec, seed).unwrap();
            match out.result {
                SessionResult::Completed => {
                    assert_eq!(out.alice_bit, Some(1));
                    seen[0] += 1;
                }
                SessionResult::Aborted(info) => {
                    assert_eq!(info.cause, AbortCause::Declined);
                    assert_eq!(info.by, Party::Bob);
                    seen[1] += 1;
                }
            }
        }
        assert!(seen[0] > 20 && seen[1] > 20);
    }

    #[test]
    fn conclusive_attack_outcomes_are_consistent() {
        // early round with a large angle so both branches show up often
        let p = ProtocolParams::new(2, 4, 1.2, Variant::WithReturn).unwrap();
        let spec = StrategySpec::Conclusive {
            target: 0,
            round: Some(2),
        };
        let mut swapped_runs = 0;
        for seed in 0..400 {
            let out = run_session(&p, &StrategySpec::Honest, &spec, seed).unwrap();
            let report = out.report(Party::Bob);
            assert!(!report.swapped || report.all_conclusive);
            if report.all_conclusive && !report.swapped {
                assert_eq!(out.alice_bit, Some(0), "seed {seed}");
            }
            if report.swapped {
                swapped_runs += 1;
                match &out.result {
                    SessionResult::Completed => assert_eq!(out.alice_bit, Some(0)),
                    SessionResult::Aborted(info) => {
                        assert_eq!((info.step, info.j, info.by), (4, Some(2), Party::Alice));
                        assert_eq!(
                            info.cause,
                            AbortCause::TestFailed {
                                test: TestKind::Kept
                            }
                        );
                    }
                }
            } else {
                assert!(out.is_completed(), "seed {seed}: {:?}", out.result);
            }
        }
        assert!(swapped_runs > 0);
    }
}
