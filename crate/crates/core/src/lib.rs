//! Simulation and analysis of a multi-round quantum coin-tossing protocol.
//!
//! The protocol runs `m` biased coin-tossing procedures with their rounds
//! interleaved; the shared bit is the parity of the `m` procedure outputs.
//! This crate executes honest and adversarial sessions by exact Born-rule
//! sampling over a symbolic product-state registry, evaluates the closed-form
//! discrimination and attack formulas, and checks them against brute-force
//! density-matrix oracles.
//!
//! Layout:
//! - [`qmath`]: real qubit-plane states, dense symmetric matrices, Jacobi
//!   eigensolver, trace distance, POVM validation.
//! - [`discrimination`]: Helstrom/unambiguous quantities for pure-state
//!   pairs and for the parity of `m` encoded bits.
//! - [`protocol`]: parameters, message grammar, session engine, transcripts.
//! - [`strategies`]: the adversary interface, concrete attacks and their
//!   analytic success formulas.
//! - [`naive`]: the EPR-based protocol and the basis re-roll attack on it.
//! - [`harness`]: Monte Carlo engine, sweeps and verification reports.

pub mod discrimination;
pub mod error;
pub mod harness;
pub mod naive;

pub mod protocol;
pub mod qmath;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
