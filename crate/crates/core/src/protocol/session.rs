//! Session engine.
//!
//! Quantum state is tracked symbolically: every particle carries the label
//! of the `ψ(·)` it was prepared in and its current holder. Every strategy in
//! this crate prepares product states of `ψ(0)`/`ψ(1)` and measures disjoint
//! particle groups, so outcome probabilities follow from products of
//! single-particle overlaps and no `2ⁿ`-dimensional vector is ever built.

use super::message::{AbortCause, Message, TestKind, Transcript, TranscriptHeader};
use super::{Party, ProtocolParams, Variant};
use crate::discrimination::{
    logical_coordinates, unambiguous_probabilities, Conclusion, ParityHelstrom,
};
use crate::error::{Error, Result};
use crate::qmath::{born_probability, ProductState};
use crate::rng::{self, DrawKey, Purpose};
use crate::strategies::{Strategy, StrategyReport, StrategySpec};

pub type ParticleId = usize;

/// Step number recorded when a party declines the final bit.
pub const FINAL_STEP: u8 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Particle {
    /// The particle is in `ψ(label)`.
    pub label: u8,
    pub holder: Party,
    /// Set once a strategy has measured it; its post-measurement state is
    /// no longer a product state and cannot be tested again.
    pub measured: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    particles: Vec<Particle>,
}

impl Registry {
    fn create(&mut self, label: u8, holder: Party) -> ParticleId {
        self.particles.push(Particle {
            label,
            holder,
            measured: false,
        });
        self.particles.len() - 1
    }

    pub fn get(&self, id: ParticleId) -> Option<&Particle> {
        self.particles.get(id)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    fn holds(&self, who: Party, id: ParticleId) -> bool {
        self.particles
            .get(id)
            .is_some_and(|p| p.holder == who && !p.measured)
    }

    fn product_state(&self, params: &ProtocolParams, ids: &[ParticleId]) -> ProductState {
        ProductState::new(
            ids.iter()
                .map(|&id| params.psi(self.particles[id].label))
                .collect(),
        )
    }
}

/// Where a party is in the schedule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Phase {
    pub step: u8,
    pub i: usize,
    pub j: usize,
}

/// One party's view: its own choices, what it received, what the partner
/// announced. Indexed by 1-based `(i, j)` through the accessors.
#[derive(Clone, Debug)]
pub struct PartyState {
    pub role: Party,
    m: usize,
    /// `a_j` or `b_j` as chosen at step 1.
    pub secret: Vec<u8>,
    masks: Vec<Option<u8>>,
    received: Vec<Vec<ParticleId>>,
    returned_to_me: Vec<Vec<ParticleId>>,
    partner_masks: Vec<Option<u8>>,
    /// Bits this party announced at step 4.
    pub revealed: Vec<Option<u8>>,
    pub partner_reveals: Vec<Option<u8>>,
    /// `ã_j` / `b̃_j`: the partner's revealed bit once it passed this party's test.
    pub partner_outcomes: Vec<Option<u8>>,
    pub phase: Phase,
}

impl PartyState {
    fn new(role: Party, params: &ProtocolParams) -> Self {
        let slots = params.n * params.m;
        Self {
            role,
            m: params.m,
            secret: Vec::new(),
            masks: vec![None; slots],
            received: vec![Vec::new(); slots],
            returned_to_me: vec![Vec::new(); slots],
            partner_masks: vec![None; slots],
            revealed: vec![None; params.m],
            partner_reveals: vec![None; params.m],
            partner_outcomes: vec![None; params.m],
            phase: Phase::default(),
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.m + (j - 1)
    }

    fn rounds(&self) -> usize {
        self.masks.len() / self.m
    }

    pub fn mask(&self, i: usize, j: usize) -> Option<u8> {
        self.masks[self.slot(i, j)]
    }

    pub fn partner_mask(&self, i: usize, j: usize) -> Option<u8> {
        self.partner_masks[self.slot(i, j)]
    }

    /// Particles the partner sent in slot `(i, j)`, in arrival order.
    pub fn received(&self, i: usize, j: usize) -> &[ParticleId] {
        &self.received[self.slot(i, j)]
    }

    /// Particles received from the partner at position `j` and kept, ordered
    /// by round. A pair counts only once one of its particles went back.
    pub fn kept_from_partner(&self, registry: &Registry, j: usize) -> Vec<ParticleId> {
        let mut kept = Vec::new();
        for i in 1..=self.rounds() {
            let slot = &self.received[self.slot(i, j)];
            let held: Vec<ParticleId> = slot
                .iter()
                .copied()
                .filter(|&id| registry.particles[id].holder == self.role)
                .collect();
            if slot.len() == 1 || held.len() < slot.len() {
                kept.extend(held);
            }
        }
        kept
    }

    /// Own particles the partner sent back at position `j`, ordered by round.
    pub fn returned_at(&self, j: usize) -> Vec<ParticleId> {
        (1..=self.rounds())
            .flat_map(|i| self.returned_to_me[self.slot(i, j)].iter().copied())
            .collect()
    }
}

/// What a party puts on the channel in a step-2 slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dispatch {
    /// `ψ(mask) ⊗ ψ(¬mask)` (with-return).
    Pair { mask: u8 },
    /// A freshly prepared `ψ(bit)` (no-return).
    Fresh(u8),
    /// A particle the party currently holds (no-return).
    Forward(ParticleId),
}

/// A strategy's handle on the session: its own state, keyed randomness,
/// and measurements restricted to particles it holds.
pub struct Ctx<'a> {
    params: &'a ProtocolParams,
    seed: u64,
    me: &'a PartyState,
    registry: &'a mut Registry,
}

impl Ctx<'_> {
    pub fn params(&self) -> &ProtocolParams {
        self.params
    }

    pub fn role(&self) -> Party {
        self.me.role
    }

    pub fn state(&self) -> &PartyState {
        self.me
    }

    fn key(&self, purpose: Purpose, i: usize, j: usize) -> DrawKey {
        DrawKey::new(self.me.role.key(), purpose, i, j)
    }

    pub fn random_bit(&self, purpose: Purpose, i: usize, j: usize) -> u8 {
        rng::bit(self.seed, self.key(purpose, i, j))
    }

    pub fn uniform(&self, purpose: Purpose, i: usize, j: usize, k: usize) -> f64 {
        rng::uniform(self.seed, self.key(purpose, i, j).with_k(k))
    }

    /// The step-1 bit at position `j`.
    pub fn secret(&self, j: usize) -> u8 {
        self.me.secret[j - 1]
    }

    pub fn mask(&self, i: usize, j: usize) -> Option<u8> {
        self.me.mask(i, j)
    }

    pub fn partner_mask(&self, i: usize, j: usize) -> Option<u8> {
        self.me.partner_mask(i, j)
    }

    pub fn partner_reveal(&self, j: usize) -> Option<u8> {
        self.me.partner_reveals[j - 1]
    }

    pub fn received(&self, i: usize, j: usize) -> &[ParticleId] {
        self.me.received(i, j)
    }

    pub fn kept_from_partner(&self, j: usize) -> Vec<ParticleId> {
        self.me.kept_from_partner(self.registry, j)
    }

    fn check_held(&self, ids: &[ParticleId]) -> Result<()> {
        match ids
            .iter()
            .find(|&&id| !self.registry.holds(self.me.role, id))
        {
            Some(id) => Err(Error::InvalidParameter(format!(
                "{} cannot measure particle {id}: not held or already measured",
                self.me.role
            ))),
            None => Ok(()),
        }
    }

    fn mark_measured(&mut self, ids: &[ParticleId]) {
        for &id in ids {
            self.registry.particles[id].measured = true;
        }
    }

    /// Optimal unambiguous discrimination between `Φ_k(0)` and `Φ_k(1)`,
    /// `k = ids.len()`, on the held particles. The draw is keyed by `(i, j)`.
    pub fn measure_unambiguous(
        &mut self,
        ids: &[ParticleId],
        i: usize,
        j: usize,
    ) -> Result<Conclusion> {
        self.check_held(ids)?;
        let held = self.registry.product_state(self.params, ids);
        let phi0 = self.params.psi_power(0, ids.len());
        let phi1 = self.params.psi_power(1, ids.len());
        let [p0, p1, _] = unambiguous_probabilities(&held, &phi0, &phi1)?;
        let u = self.uniform(Purpose::Measurement, i, j, 0);
        self.mark_measured(ids);
        Ok(if u < p0 {
            Conclusion::Bit(0)
        } else if u < p0 + p1 {
            Conclusion::Bit(1)
        } else {
            Conclusion::Inconclusive
        })
    }

    /// Minimum-error guess of the parity of the bits encoded in `groups`,
    /// one group per position, all groups the same size.
    pub fn measure_parity(
        &mut self,
        groups: &[Vec<ParticleId>],
        measurement: &ParityHelstrom,
        i: usize,
        j: usize,
    ) -> Result<u8> {
        if groups.len() != measurement.m() {
            return Err(Error::Dimension {
                expected: measurement.m(),
                found: groups.len(),
            });
        }
        let mut logical = vec![1.0];
        for group in groups {
            self.check_held(group)?;
            let held = self.registry.product_state(self.params, group);
            let phi0 = self.params.psi_power(0, group.len());
            let phi1 = self.params.psi_power(1, group.len());
            let [plus, minus] = logical_coordinates(&held, &phi0, &phi1)?;
            logical = logical
                .iter()
                .flat_map(|&x| [x * plus, x * minus])
                .collect();
        }
        let p1 = measurement.probability_guess_one(&logical);
        let u = self.uniform(Purpose::Measurement, i, j, 0);
        for group in groups {
            self.mark_measured(group);
        }
        Ok((u < p1) as u8)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbortInfo {
    pub step: u8,
    pub j: Option<usize>,
    /// The detecting party for failed tests and declines; the offending
    /// party for protocol violations.
    pub by: Party,
    pub cause: AbortCause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionResult {
    Completed,
    Aborted(AbortInfo),
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub result: SessionResult,
    pub alice_bit: Option<u8>,
    pub bob_bit: Option<u8>,
    pub transcript: Transcript,
    pub reports: [StrategyReport; 2],
    pub parties: [PartyState; 2],
    pub registry: Registry,
}

impl SessionOutcome {
    pub fn is_completed(&self) -> bool {
        self.result == SessionResult::Completed
    }

    pub fn abort(&self) -> Option<&AbortInfo> {
        match &self.result {
            SessionResult::Aborted(info) => Some(info),
            SessionResult::Completed => None,
        }
    }

    pub fn report(&self, who: Party) -> &StrategyReport {
        &self.reports[who.index()]
    }

    pub fn party(&self, who: Party) -> &PartyState {
        &self.parties[who.index()]
    }

    pub fn bit(&self, who: Party) -> Option<u8> {
        match who {
            Party::Alice => self.alice_bit,
            Party::Bob => self.bob_bit,
        }
    }
}

/// The rank-1 test `(E_b, E_b^⊥)` with `E_b = |Φ(b)⟩⟨Φ(b)|`, sampled with
/// the uniform draw `u`. Accepts with probability `|⟨Φ(b)|held⟩|²`.
pub fn commitment_test(
    held: &ProductState,
    claimed_bit: u8,
    params: &ProtocolParams,
    u: f64,
) -> Result<bool> {
    if held.len() != params.n {
        return Err(Error::Dimension {
            expected: params.n,
            found: held.len(),
        });
    }
    Ok(u < born_probability(held, &params.phi(claimed_bit))?)
}

/// `(A ⊕ B̃, Ã ⊕ B)` from the two parties' final states.
pub fn final_bits(alice: &PartyState, bob: &PartyState) -> Result<(u8, u8)> {
    let xor_all = |bits: &[Option<u8>]| -> Result<u8> {
        bits.iter().try_fold(0u8, |acc, b| {
            b.map(|b| acc ^ b)
                .ok_or_else(|| Error::InvalidParameter("session has not completed".into()))
        })
    };
    let a = xor_all(&alice.revealed)? ^ xor_all(&alice.partner_outcomes)?;
    let b = xor_all(&bob.partner_outcomes)? ^ xor_all(&bob.revealed)?;
    Ok((a, b))
}

enum Stop {
    Abort(AbortInfo),
    Fail(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Fail(e)
    }
}

type Flow = std::result::Result<(), Stop>;

struct Engine<'p> {
    params: &'p ProtocolParams,
    seed: u64,
    registry: Registry,
    parties: [PartyState; 2],
    messages: Vec<Message>,
}

const ORDER: [Party; 2] = [Party::Alice, Party::Bob];

impl<'p> Engine<'p> {
    fn new(params: &'p ProtocolParams, seed: u64) -> Self {
        let messages = Vec::with_capacity(6 * params.n * params.m + 2 * params.m + 1);
        Self {
            params,
            seed,
            registry: Registry::default(),
            parties: [
                PartyState::new(Party::Alice, params),
                PartyState::new(Party::Bob, params),
            ],
            messages,
        }
    }

    fn ctx(&mut self, who: Party) -> Ctx<'_> {
        Ctx {
            params: self.params,
            seed: self.seed,
            me: &self.parties[who.index()],
            registry: &mut self.registry,
        }
    }

    fn party(&mut self, who: Party) -> &mut PartyState {
        &mut self.parties[who.index()]
    }

    fn violation(who: Party, step: u8, j: Option<usize>, detail: impl Into<String>) -> Stop {
        Stop::Abort(AbortInfo {
            step,
            j,
            by: who,
            cause: AbortCause::ProtocolViolation {
                detail: detail.into(),
            },
        })
    }

    fn play(&mut self, s: &mut [&mut dyn Strategy; 2]) -> Flow {
        let (m, n) = (self.params.m, self.params.n);

        for who in ORDER {
            self.party(who).phase = Phase {
                step: 1,
                i: 0,
                j: 0,
            };
            let bits = s[who.index()].secret_bits(&mut self.ctx(who));
            if bits.len() != m || bits.iter().any(|&b| b > 1) {
                return Err(Self::violation(
                    who,
                    1,
                    None,
                    "secret bits must be m values in {0, 1}",
                ));
            }
            self.party(who).secret = bits;
        }

        for i in 1..=n {
            for j in 1..=m {
                for who in ORDER {
                    self.party(who).phase = Phase { step: 2, i, j };
                    let d = s[who.index()].send(&mut self.ctx(who), i, j);
                    self.dispatch(who, i, j, d)?;
                }
            }
        }

        if self.params.variant == Variant::WithReturn {
            for i in 1..=n {
                for j in 1..=m {
                    for who in ORDER {
                        self.announce_and_return(s, who, i, j)?;
                    }
                }
            }
        }

        for j in 1..=m {
            for who in ORDER {
                self.party(who).phase = Phase { step: 4, i: 0, j };
                let bit = s[who.index()].reveal(&mut self.ctx(who), j);
                if bit > 1 {
                    return Err(Self::violation(
                        who,
                        4,
                        Some(j),
                        "revealed value is not a bit",
                    ));
                }
                let partner = who.other();
                self.party(who).revealed[j - 1] = Some(bit);
                self.party(partner).partner_reveals[j - 1] = Some(bit);
                self.messages.push(Message::Reveal {
                    sender: who,
                    j,
                    bit,
                });

                if s[partner.index()].runs_own_tests() {
                    let ids = self.parties[partner.index()].kept_from_partner(&self.registry, j);
                    if !self.test(partner, &ids, bit, 4, j)? {
                        return Err(Stop::Abort(AbortInfo {
                            step: 4,
                            j: Some(j),
                            by: partner,
                            cause: AbortCause::TestFailed {
                                test: TestKind::Kept,
                            },
                        }));
                    }
                }
                self.party(partner).partner_outcomes[j - 1] = Some(bit);
            }
        }

        if self.params.variant == Variant::WithReturn {
            for j in 1..=m {
                for who in ORDER {
                    self.party(who).phase = Phase { step: 5, i: 0, j };
                    if !s[who.index()].runs_own_tests() {
                        continue;
                    }
                    let me = &self.parties[who.index()];
                    let ids = me.returned_at(j);
                    let claimed = 1 - me.revealed[j - 1].expect("revealed at step 4");
                    if !self.test(who, &ids, claimed, 5, j)? {
                        return Err(Stop::Abort(AbortInfo {
                            step: 5,
                            j: Some(j),
                            by: who,
                            cause: AbortCause::TestFailed {
                                test: TestKind::Returned,
                            },
                        }));
                    }
                }
            }
        }

        let (alice_bit, bob_bit) = final_bits(&self.parties[0], &self.parties[1])?;
        for (who, bit) in [(Party::Alice, alice_bit), (Party::Bob, bob_bit)] {
            self.party(who).phase = Phase {
                step: FINAL_STEP,
                i: 0,
                j: 0,
            };
            if !s[who.index()].accept(&mut self.ctx(who), bit) {
                return Err(Stop::Abort(AbortInfo {
                    step: FINAL_STEP,
                    j: None,
                    by: who,
                    cause: AbortCause::Declined,
                }));
            }
        }
        Ok(())
    }

    fn dispatch(&mut self, who: Party, i: usize, j: usize, d: Dispatch) -> Flow {
        let partner = who.other();
        let slot = self.parties[0].slot(i, j);
        match (self.params.variant, d) {
            (Variant::WithReturn, Dispatch::Pair { mask }) if mask <= 1 => {
                let first = self.registry.create(mask, partner);
                let second = self.registry.create(1 - mask, partner);
                self.party(who).masks[slot] = Some(mask);
                self.party(partner).received[slot] = vec![first, second];
                self.messages.push(Message::PairSend {
                    sender: who,
                    i,
                    j,
                    states: [mask, 1 - mask],
                });
            }
            (Variant::NoReturn, Dispatch::Fresh(bit)) if bit <= 1 => {
                let id = self.registry.create(bit, partner);
                self.party(partner).received[slot] = vec![id];
                self.messages.push(Message::StateSend {
                    sender: who,
                    i,
                    j,
                    state: bit,
                });
            }
            (Variant::NoReturn, Dispatch::Forward(id)) => {
                if !self.registry.holds(who, id) {
                    return Err(Self::violation(
                        who,
                        2,
                        Some(j),
                        format!("forwarded particle {id} it does not hold"),
                    ));
                }
                self.registry.particles[id].holder = partner;
                let state = self.registry.particles[id].label;
                self.party(partner).received[slot] = vec![id];
                self.messages.push(Message::StateSend {
                    sender: who,
                    i,
                    j,
                    state,
                });
            }
            (variant, d) => {
                return Err(Self::violation(
                    who,
                    2,
                    Some(j),
                    format!("{d:?} is not a valid step-2 message in the {variant} variant"),
                ));
            }
        }
        Ok(())
    }

    /// `who` announces its mask for `(i, j)`; the partner sends back one
    /// particle of `who`'s pair.
    fn announce_and_return(
        &mut self,
        s: &mut [&mut dyn Strategy; 2],
        who: Party,
        i: usize,
        j: usize,
    ) -> Flow {
        let partner = who.other();
        let slot = self.parties[0].slot(i, j);
        self.party(who).phase = Phase { step: 3, i, j };
        let bit = s[who.index()].announce_mask(&mut self.ctx(who), i, j)?;
        if bit > 1 {
            return Err(Self::violation(
                who,
                3,
                Some(j),
                "announced mask is not a bit",
            ));
        }
        self.party(partner).partner_masks[slot] = Some(bit);
        self.messages.push(Message::MaskAnnounce {
            sender: who,
            i,
            j,
            bit,
        });

        self.party(partner).phase = Phase { step: 3, i, j };
        let which = s[partner.index()].choose_return(&mut self.ctx(partner), i, j, bit);
        let id = self.parties[partner.index()].received[slot]
            .get(which.index())
            .copied();
        let Some(id) = id.filter(|&id| self.registry.holds(partner, id)) else {
            return Err(Self::violation(
                partner,
                3,
                Some(j),
                format!("cannot return the {which:?} particle of slot ({i}, {j})"),
            ));
        };
        self.registry.particles[id].holder = who;
        self.party(who).returned_to_me[slot].push(id);
        self.messages.push(Message::ParticleReturn {
            sender: partner,
            i,
            j,
            which,
        });
        Ok(())
    }

    fn test(
        &self,
        tester: Party,
        ids: &[ParticleId],
        claimed: u8,
        step: u8,
        j: usize,
    ) -> std::result::Result<bool, Stop> {
        if ids.len() != self.params.n {
            return Ok(false);
        }
        if ids.iter().any(|&id| self.registry.particles[id].measured) {
            return Err(Stop::Fail(Error::InvalidParameter(format!(
                "{tester} cannot test particles that were already measured"
            ))));
        }
        let held = self.registry.product_state(self.params, ids);
        let u = rng::uniform(
            self.seed,
            DrawKey::new(tester.key(), Purpose::CommitmentTest, step as usize, j),
        );
        Ok(commitment_test(&held, claimed, self.params, u)?)
    }
}

/// Runs one session between the strategies described by `alice` and `bob`.
pub fn run_session(
    params: &ProtocolParams,
    alice: &StrategySpec,
    bob: &StrategySpec,
    seed: u64,
) -> Result<SessionOutcome> {
    let mut a = alice.instantiate(Party::Alice, params)?;
    let mut b = bob.instantiate(Party::Bob, params)?;
    run_session_with(params, a.as_mut(), b.as_mut(), seed)
}

/// Runs one session with caller-provided strategy objects.
pub fn run_session_with(
    params: &ProtocolParams,
    alice: &mut dyn Strategy,
    bob: &mut dyn Strategy,
    seed: u64,
) -> Result<SessionOutcome> {
    let header = TranscriptHeader {
        m: params.m,
        n: params.n,
        theta: params.theta,
        variant: params.variant,
        seed,
        alice: alice.name(),
        bob: bob.name(),
    };
    let mut engine = Engine::new(params, seed);
    let mut strategies: [&mut dyn Strategy; 2] = [alice, bob];
    let result = match engine.play(&mut strategies) {
        Ok(()) => SessionResult::Completed,
        Err(Stop::Fail(e)) => return Err(e),
        Err(Stop::Abort(info)) => {
            let sender = match info.cause {
                AbortCause::ProtocolViolation { .. } => info.by.other(),
                _ => info.by,
            };
            engine.messages.push(Message::AbortNotice {
                sender,
                step: info.step,
                j: info.j,
                reason: info.cause.clone(),
            });
            SessionResult::Aborted(info)
        }
    };
    let (alice_bit, bob_bit) = match result {
        SessionResult::Completed => {
            let (a, b) = final_bits(&engine.parties[0], &engine.parties[1])?;
            (Some(a), Some(b))
        }
        SessionResult::Aborted(_) => (None, None),
    };
    let reports = [strategies[0].report(), strategies[1].report()];
    Ok(SessionOutcome {
        result,
        alice_bit,
        bob_bit,
        transcript: Transcript {
            header,
            messages: engine.messages,
        },
        reports,
        parties: engine.parties,
        registry: engine.registry,
    })
}
