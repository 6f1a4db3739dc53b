//! Optimal measurements for two pure states at angle Ω, and for the parity
//! of `m` bits each encoded in such a pair.
//!
//! The pair is `ψ(0) = c|0⟩ + s|1⟩`, `ψ(1) = c|0⟩ − s|1⟩` with
//! `c = cos(Ω/2)`, `s = sin(Ω/2)`, i.e. half-angles `±Ω/2`.
//!
//! Closed forms live next to the brute-force oracle that checks them: the
//! oracle builds the two `2^m × 2^m` parity density matrices explicitly and
//! takes the trace distance with the Jacobi eigensolver.

use std::f64::consts::FRAC_PI_2;

use crate::error::{check_range, Error, Result};
use crate::qmath::{
    eigen_sym, product_overlap, trace_distance, Povm, PovmLabel, ProductState, PureState, SymMatrix,
};

/// Largest `m` for which dense parity matrices are built (dimension 1024).
pub const MAX_DENSE_M: usize = 10;
/// Largest `m` for which block multiplicities fit in `u128`.
pub const MAX_BLOCK_M: usize = 120;

const OMEGA_RANGE: &str = "[0, π/2]";

fn check_omega(omega: f64) -> Result<()> {
    check_range("Ω", omega, 0.0, FRAC_PI_2, OMEGA_RANGE)
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(())
}

/// The encoding state for `bit` at pair angle `omega`.
pub fn encoding_state(bit: u8, omega: f64) -> PureState {
    PureState::new(if bit == 0 { omega / 2.0 } else { -omega / 2.0 })
}

/// `points` evenly spaced angles covering `[0, π/2]` inclusive.
pub fn omega_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![FRAC_PI_2 / 2.0],
        _ => (0..points)
            .map(|k| {
                if k + 1 == points {
                    FRAC_PI_2
                } else {
                    FRAC_PI_2 * k as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

/// Minimum error probability for guessing a uniformly random bit, `(1/2)(1 − sin Ω)`.
pub fn helstrom_error(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(0.5 * (1.0 - omega.sin()))
}

/// The same quantity in its `sin²(π/4 − Ω/2)` form.
pub fn helstrom_error_sin_form(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok((std::f64::consts::FRAC_PI_4 - omega / 2.0).sin().powi(2))
}

/// Optimal unambiguous (conclusive) discrimination rate, `1 − cos Ω`.
pub fn conclusive_rate(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(1.0 - omega.cos())
}

/// Probability that a state claimed to be its partner passes the partner's
/// rank-1 test, `cos² Ω`.
pub fn false_claim_pass(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(omega.cos().powi(2))
}

/// Three-outcome unambiguous discrimination POVM for `ψ(0)`, `ψ(1)`.
///
/// The conclusive-`a` element is `|ψ(1−a)^⊥⟩⟨ψ(1−a)^⊥| / (1 + cos Ω)`; the
/// inconclusive element takes the remainder. At `Ω = π/2` this is the
/// projective measurement with a zero inconclusive element.
pub fn build_unambiguous_povm(omega: f64) -> Result<Povm> {
    check_omega(omega)?;
    if omega == 0.0 {
        return Err(Error::Degenerate(
            "Ω = 0: identical states admit no conclusive outcome",
        ));
    }
    let scale = 1.0 / (1.0 + omega.cos());
    let conclusive0 = encoding_state(1, omega)
        .orthogonal()
        .projector()
        .scaled(scale);
    let conclusive1 = encoding_state(0, omega)
        .orthogonal()
        .projector()
        .scaled(scale);
    let inconclusive = SymMatrix::identity(2)
        .sub(&conclusive0)?
        .sub(&conclusive1)?;
    Povm::new(vec![
        (PovmLabel::Zero, conclusive0),
        (PovmLabel::One, conclusive1),
        (PovmLabel::Inconclusive, inconclusive),
    ])
}

/// Outcome of an unambiguous discrimination measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    Bit(u8),
    Inconclusive,
}

/// Outcome probabilities `[conclusive 0, conclusive 1, inconclusive]` of the
/// optimal unambiguous measurement between product states `phi0` and `phi1`,
/// applied to the product state `held`.
///
/// The measurement lives on the span of `phi0`, `phi1`; any component of
/// `held` outside that span lands on the inconclusive outcome.
pub fn unambiguous_probabilities(
    held: &ProductState,
    phi0: &ProductState,
    phi1: &ProductState,
) -> Result<[f64; 3]> {
    let cos_omega = product_overlap(phi0, phi1)?.abs();
    let sin_sq = 1.0 - cos_omega * cos_omega;
    if sin_sq <= 0.0 {
        return Ok([0.0, 0.0, 1.0]);
    }
    let sin_omega = sin_sq.sqrt();
    let h0 = product_overlap(held, phi0)?;
    let h1 = product_overlap(held, phi1)?;
    let scale = 1.0 / (1.0 + cos_omega);
    // components along the states orthogonal to phi1 and phi0 within the span
    let along_not1 = (h0 - cos_omega * h1) / sin_omega;
    let along_not0 = (h1 - cos_omega * h0) / sin_omega;
    let p0 = scale * along_not1 * along_not1;
    let p1 = scale * along_not0 * along_not0;
    Ok([p0, p1, (1.0 - p0 - p1).max(0.0)])
}

/// One block of the parity density matrices after reordering rows and
/// columns so that each basis string sits next to its complement.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityBlock {
    /// Hamming weight of the lighter string of the pair.
    pub k: usize,
    /// Number of identical blocks of this type.
    pub multiplicity: u128,
    /// Trace of one block, the probability of landing in it.
    pub trace: f64,
    /// Block of the parity-0 matrix.
    pub block_plus: [[f64; 2]; 2],
    /// Block of the parity-1 matrix (off-diagonal sign flipped).
    pub block_minus: [[f64; 2]; 2],
    /// Angle between the two normalized pure states the block represents.
    pub block_angle: f64,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Block decomposition of the parity density matrices.
///
/// For odd `m` the blocks are `k = 0..=(m−1)/2` with multiplicity `C(m,k)`.
/// For even `m` the self-complementary weight `k = m/2` contributes a
/// further `C(m, m/2)/2` blocks.
pub fn parity_blocks(m: usize, omega: f64) -> Result<Vec<ParityBlock>> {
    check_m(m)?;
    check_omega(omega)?;
    if m > MAX_BLOCK_M {
        return Err(Error::Resource {
            what: "parity block m",
            limit: MAX_BLOCK_M,
        });
    }
    let c = (omega / 2.0).cos();
    let s = (omega / 2.0).sin();
    let off = c.powi(m as i32) * s.powi(m as i32);
    let mut blocks = Vec::with_capacity(m / 2 + 1);
    for k in 0..=m / 2 {
        let multiplicity = if 2 * k == m {
            binomial(m, k) / 2
        } else {
            binomial(m, k)
        };
        let heavy = c.powi(2 * (m - k) as i32) * s.powi(2 * k as i32);
        let light = c.powi(2 * k as i32) * s.powi(2 * (m - k) as i32);
        let trace = heavy + light;
        let block_angle = 2.0 * light.sqrt().atan2(heavy.sqrt());
        blocks.push(ParityBlock {
            k,
            multiplicity,
            trace,
            block_plus: [[heavy, off], [off, light]],
            block_minus: [[heavy, -off], [-off, light]],
            block_angle,
        });
    }
    Ok(blocks)
}

/// Minimum error for guessing the parity of `m` encoded bits,
/// `(1/2)(1 − sin^m Ω)`.
pub fn parity_error_exact(m: usize, omega: f64) -> Result<f64> {
    check_m(m)?;
    check_omega(omega)?;
    Ok(0.5 * (1.0 - omega.sin().powi(m as i32)))
}

/// Upper bound `1 − 2·PE(m) = sin^m Ω` on a conclusive parity outcome.
pub fn parity_conclusive_bound(m: usize, omega: f64) -> Result<f64> {
    check_m(m)?;
    check_omega(omega)?;
    Ok(omega.sin().powi(m as i32))
}

/// Conclusive parity rate reached by discriminating each bit separately,
/// `(1 − cos Ω)^m`. Always below [`parity_conclusive_bound`].
pub fn product_conclusive_rate(m: usize, omega: f64) -> Result<f64> {
    check_m(m)?;
    Ok(conclusive_rate(omega)?.powi(m as i32))
}

/// `2^{−(m−1)} Σ_{strings of the given parity} |ψ(a)⟩⟨ψ(a)|`, built term by term.
pub fn parity_density_matrix(parity: u8, m: usize, omega: f64) -> Result<SymMatrix> {
    check_m(m)?;
    check_omega(omega)?;
    if m > MAX_DENSE_M {
        return Err(Error::Resource {
            what: "parity density matrix m",
            limit: MAX_DENSE_M,
        });
    }
    let dim = 1usize << m;
    let weight = 1.0 / (1u64 << (m - 1)) as f64;
    let mut acc = vec![0.0; dim * dim];
    for bits in 0..dim {
        if (bits.count_ones() & 1) as u8 != parity & 1 {
            continue;
        }
        let state = ProductState::new(
            (0..m)
                .map(|pos| encoding_state(((bits >> (m - 1 - pos)) & 1) as u8, omega))
                .collect(),
        );
        let v = state.to_vector()?;
        for r in 0..dim {
            let vr = weight * v[r];
            for c in 0..dim {
                acc[r * dim + c] += vr * v[c];
            }
        }
    }
    SymMatrix::new(dim, acc)
}

/// Brute-force parity error: `(1/2)(1 − D(ρ0, ρ1))` from dense matrices.
pub fn parity_error_oracle(m: usize, omega: f64) -> Result<f64> {
    let rho0 = parity_density_matrix(0, m, omega)?;
    let rho1 = parity_density_matrix(1, m, omega)?;
    Ok(0.5 * (1.0 - trace_distance(&rho0, &rho1)?))
}

/// Helstrom measurement for the parity of `m` bits encoded at angle Ω.
///
/// Acts on the `m`-qubit logical space in which position `j` is spanned by
/// the two encodings of `a_j`. The "guess 1" element projects onto the
/// positive eigenspace of `ρ1 − ρ0`.
#[derive(Clone, Debug)]
pub struct ParityHelstrom {
    m: usize,
    omega: f64,
    guess_one: SymMatrix,
}

impl ParityHelstrom {
    pub fn new(m: usize, omega: f64) -> Result<Self> {
        let rho0 = parity_density_matrix(0, m, omega)?;
        let rho1 = parity_density_matrix(1, m, omega)?;
        let eig = eigen_sym(&rho1.sub(&rho0)?)?;
        let guess_one = eig
            .spectral_projector(|lambda| lambda > 1e-14)
            .expect("vectors accumulated");
        Ok(Self {
            m,
            omega,
            guess_one,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn povm(&self) -> Result<Povm> {
        let guess_zero = SymMatrix::identity(self.guess_one.dim()).sub(&self.guess_one)?;
        Povm::new(vec![
            (PovmLabel::Zero, guess_zero),
            (PovmLabel::One, self.guess_one.clone()),
        ])
    }

    /// Probability of guessing parity 1 on a logical state vector of length `2^m`.
    pub fn probability_guess_one(&self, logical: &[f64]) -> f64 {
        self.guess_one.quadratic_form(logical).clamp(0.0, 1.0)
    }

    /// Error probability of this measurement on uniformly random strings.
    pub fn error_probability(&self) -> Result<f64> {
        let rho0 = parity_density_matrix(0, self.m, self.omega)?;
        let rho1 = parity_density_matrix(1, self.m, self.omega)?;
        let wrong_on_0 = self
            .guess_one
            .as_slice()
            .iter()
            .zip(rho0.as_slice())
            .map(|(a, b)| a * b)
            .sum::<f64>();
        let right_on_1 = self
            .guess_one
            .as_slice()
            .iter()
            .zip(rho1.as_slice())
            .map(|(a, b)| a * b)
            .sum::<f64>();
        Ok(0.5 * wrong_on_0 + 0.5 * (1.0 - right_on_1))
    }
}

/// Coordinates of `held` in the orthonormal basis `{e₊, e₋}` of
/// `span{phi0, phi1}`, with `phi_a = cos(Ω/2) e₊ ± sin(Ω/2) e₋`.
///
/// This maps a block of particles onto one logical qubit whose encodings
/// are the states of [`encoding_state`].
pub fn logical_coordinates(
    held: &ProductState,
    phi0: &ProductState,
    phi1: &ProductState,
) -> Result<[f64; 2]> {
    let cos_omega = product_overlap(phi0, phi1)?;
    let h0 = product_overlap(held, phi0)?;
    let h1 = product_overlap(held, phi1)?;
    let plus_norm = (2.0 * (1.0 + cos_omega)).sqrt();
    let minus_norm = (2.0 * (1.0 - cos_omega)).sqrt();
    let plus = (h0 + h1) / plus_norm;
    let minus = if minus_norm > 0.0 {
        (h0 - h1) / minus_norm
    } else {
        0.0
    };
    Ok([plus, minus])
}
