//! The coin-tossing protocol: parameters, messages, session engine.
//!
//! Step 1 picks the secret bits, step 2 exchanges particle pairs, step 3
//! announces masks and returns one particle of every pair, step 4 reveals
//! the secret bits and tests the kept particles, step 5 tests the returned
//! particles. Steps 2 and 3 run `for i in 1..=n { for j in 1..=m }`, so the
//! `m` procedures advance round by round in lockstep.

mod message;
mod session;

pub use message::{AbortCause, Message, TestKind, Transcript, TranscriptHeader, Which};
pub use session::{
    commitment_test, final_bits, run_session, run_session_with, AbortInfo, Ctx, Dispatch,
    ParticleId, PartyState, Registry, SessionOutcome, SessionResult, FINAL_STEP,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discrimination::encoding_state;
use crate::error::{Error, Result};
use crate::qmath::{ProductState, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Self {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Party::Alice => 0,
            Party::Bob => 1,
        }
    }

    pub(crate) fn key(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// Protocol variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Pairs are sent at step 2 and one particle of each is asked back.
    WithReturn,
    /// Earlier design: `ψ(a_j)` is sent directly, steps 3 and 5 are skipped.
    NoReturn,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::WithReturn => "with-return",
            Variant::NoReturn => "no-return",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with-return" => Ok(Variant::WithReturn),
            "no-return" => Ok(Variant::NoReturn),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Number of interleaved procedures.
    pub m: usize,
    /// Particles per side per procedure.
    pub n: usize,
    /// Angle between `ψ(0)` and `ψ(1)`.
    pub theta: f64,
    pub variant: Variant,
}

impl ProtocolParams {
    pub fn new(m: usize, n: usize, theta: f64, variant: Variant) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "m must be at least 2, got {m}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::OutOfRange {
                name: "θ",
                value: theta,
                range: "(0, π/2)",
            });
        }
        Ok(Self {
            m,
            n,
            theta,
            variant,
        })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Self::new(self.m, n, self.theta, self.variant)
    }

    /// `γ = cos θ`, the overlap of the two single-particle states.
    pub fn gamma(&self) -> f64 {
        self.theta.cos()
    }

    /// `cos Θ = γⁿ`, the overlap of the two full commitments.
    pub fn commitment_overlap(&self) -> f64 {
        self.gamma().powi(self.n as i32)
    }

    pub fn psi(&self, bit: u8) -> PureState {
        encoding_state(bit, self.theta)
    }

    /// `ψ(bit)^⊗count`.
    pub fn psi_power(&self, bit: u8, count: usize) -> ProductState {
        ProductState::repeated(self.psi(bit), count)
    }

    /// `Φ(bit) = ψ(bit)^⊗n`.
    pub fn phi(&self, bit: u8) -> ProductState {
        self.psi_power(bit, self.n)
    }

    /// Particles prepared during one complete session.
    pub fn particles_per_session(&self) -> usize {
        match self.variant {
            Variant::WithReturn => 4 * self.n * self.m,
            Variant::NoReturn => 2 * self.n * self.m,
        }
    }
}

/// Default parameters for `m` procedures at angle `theta`: with-return,
/// `n = i* + ⌈log₂ m⌉` where `i*` is the attack's critical round.
pub fn derive_params(m: usize, theta: f64) -> Result<ProtocolParams> {
    let critical = crate::strategies::critical_round(m, theta)?;
    let log2_m = (usize::BITS - (m - 1).leading_zeros()) as usize;
    ProtocolParams::new(m, critical + log2_m, theta, Variant::WithReturn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn derive_params_examples() {
        let p = derive_params(10, PI / 9.0).unwrap();
        assert_eq!(p.n, 39 + 4);
        let p = derive_params(2, PI / 9.0).unwrap();
        assert_eq!(p.n, 23 + 1);
        // close to π/2 the first power already clears (m−1)/m² = 1/4
        let p = derive_params(2, FRAC_PI_2 - 1e-3).unwrap();
        assert_eq!(p.n, 2);
        let p = derive_params(4, PI / 9.0).unwrap();
        assert_eq!(p.n, 27 + 2);
        assert_eq!(p.particles_per_session(), 4 * 29 * 4);
    }

    #[test]
    fn derive_params_rejects_bad_input() {
        assert!(derive_params(1, 0.3).is_err());
        assert!(derive_params(4, 0.0).is_err());
        assert!(derive_params(4, FRAC_PI_2).is_err());
        assert!(ProtocolParams::new(3, 0, 0.3, Variant::WithReturn).is_err());
    }

    #[test]
    fn n_grows_logarithmically() {
        let theta = PI / 9.0;
        let n16 = derive_params(16, theta).unwrap().n as f64;
        let n1024 = derive_params(1024, theta).unwrap().n as f64;
        // ln((m−1)/m²) ~ −ln m, so n roughly scales with log m
        assert!(n1024 / n16 < 3.0);
    }

    #[test]
    fn commitment_overlap_is_gamma_power() {
        let p = ProtocolParams::new(3, 7, 0.4, Variant::WithReturn).unwrap();
        let o = crate::qmath::product_overlap(&p.phi(0), &p.phi(1)).unwrap();
        assert!((o - p.commitment_overlap()).abs() < 1e-14);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [Variant::WithReturn, Variant::NoReturn] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("sideways".parse::<Variant>().is_err());
    }
}
