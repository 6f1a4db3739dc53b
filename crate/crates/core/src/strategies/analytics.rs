//! Closed-form success and bias figures for the attacks.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::discrimination::parity_error_exact;
use crate::error::{Error, Result};

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "θ",
            value: theta,
            range: "(0, π/2)",
        })
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 2, got {m}"
        )));
    }
    Ok(())
}

/// `(m − 1)/m²`, the threshold on `cos Ω_i` that fixes the attack round.
pub fn critical_ratio(m: usize) -> f64 {
    let m = m as f64;
    (m - 1.0) / (m * m)
}

/// Smallest `i ≥ 1` with `cosⁱθ ≤ (m − 1)/m²`.
pub fn critical_round(m: usize, theta: f64) -> Result<usize> {
    check_m(m)?;
    check_theta(theta)?;
    let gamma = theta.cos();
    let ratio = critical_ratio(m);
    let estimate = (ratio.ln() / gamma.ln()).ceil().max(1.0);
    if !estimate.is_finite() || estimate > u32::MAX as f64 {
        return Err(Error::Resource {
            what: "critical round",
            limit: u32::MAX as usize,
        });
    }
    // the log estimate can be off by one either way near integer ratios
    let mut i = estimate as usize;
    while gamma.powi(i as i32) > ratio {
        i += 1;
    }
    while i > 1 && gamma.powi(i as i32 - 1) <= ratio {
        i -= 1;
    }
    Ok(i)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackAnalytics {
    pub m: usize,
    pub theta: f64,
    /// Round at which Bob measures.
    pub round: usize,
    /// Probability that all `m` unambiguous measurements are conclusive.
    pub pc: f64,
    /// Probability that the swapped commitment passes Alice's step-4 test.
    pub ps: f64,
    pub p0: f64,
    /// `p0 − 1/2`.
    pub xi: f64,
}

impl AttackAnalytics {
    /// `(1/2)(m − 1)³/m⁶`.
    pub fn lower_bound(&self) -> f64 {
        0.5 * critical_ratio(self.m).powi(3)
    }

    pub fn upper_bound(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn pc_floor(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// `(m − 1)²/m⁴`.
    pub fn ps_floor(&self) -> f64 {
        critical_ratio(self.m).powi(2)
    }

    /// `PC ≥ 1/m`, `PS ≥ (m − 1)²/m⁴` and `(1/2)(m − 1)³/m⁶ ≤ ξ ≤ 1/m`.
    pub fn bound_chain_holds(&self) -> bool {
        self.pc >= self.pc_floor()
            && self.ps >= self.ps_floor()
            && self.lower_bound() <= self.xi
            && self.xi <= self.upper_bound()
    }
}

/// Figures for the conclusive attack at the critical round.
pub fn attack_analytics(m: usize, theta: f64) -> Result<AttackAnalytics> {
    attack_analytics_at(m, theta, critical_round(m, theta)?)
}

/// Figures for the conclusive attack measuring at an arbitrary round.
pub fn attack_analytics_at(m: usize, theta: f64, round: usize) -> Result<AttackAnalytics> {
    check_m(m)?;
    check_theta(theta)?;
    if round == 0 {
        return Err(Error::InvalidParameter(
            "attack round must be at least 1".into(),
        ));
    }
    let gamma = theta.cos();
    let pc = (1.0 - gamma.powi(round as i32)).powi(m as i32);
    let ps = gamma.powi(2 * (round as i32 - 1));
    let p0 = 0.5 * (1.0 + pc * ps);
    Ok(AttackAnalytics {
        m,
        theta,
        round,
        pc,
        ps,
        p0,
        xi: p0 - 0.5,
    })
}

/// `(1/2) c^m (1 − c²)`.
pub fn bias_objective(c: f64, m: usize) -> f64 {
    0.5 * c.powi(m as i32) * (1.0 - c * c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasBound {
    pub m: usize,
    /// `√(m/(m + 2))`.
    pub argmax: f64,
    /// `[m/(m + 2)]^{m/2} / (m + 2)`.
    pub value: f64,
}

/// Closed-form maximum of [`bias_objective`] over `c ∈ [0, 1]`.
pub fn bias_upper_bound(m: usize) -> Result<BiasBound> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mf = m as f64;
    let ratio = mf / (mf + 2.0);
    Ok(BiasBound {
        m,
        argmax: ratio.sqrt(),
        value: (0.5 * mf * ratio.ln()).exp() / (mf + 2.0),
    })
}

/// Numerical maximum of [`bias_objective`]: a uniform grid of `points`
/// values on `[0, 1]`, then golden-section refinement around the best one.
pub fn bias_grid_maximum(m: usize, points: usize) -> (f64, f64) {
    let points = points.max(3);
    let step = 1.0 / (points - 1) as f64;
    let best = (0..points)
        .map(|k| k as f64 * step)
        .max_by(|a, b| bias_objective(*a, m).total_cmp(&bias_objective(*b, m)))
        .expect("non-empty grid");
    let (mut lo, mut hi) = ((best - step).max(0.0), (best + step).min(1.0));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - inv_phi * (hi - lo);
        let x2 = lo + inv_phi * (hi - lo);
        if bias_objective(x1, m) < bias_objective(x2, m) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let c = 0.5 * (lo + hi);
    let refined = bias_objective(c, m);
    if refined >= bias_objective(best, m) {
        (c, refined)
    } else {
        (best, bias_objective(best, m))
    }
}

/// Probability that the best-guess attack measuring at round `i` yields the
/// target bit: `(1/2)(1 − PE(m, Ω_i))(1 + cos^{2(i−1)}θ)` with
/// `cos Ω_i = cosⁱθ`. Round 0 is the no-information limit, with a swap that
/// always passes.
pub fn best_guess_success(m: usize, theta: f64, i: usize) -> Result<f64> {
    check_m(m)?;
    check_theta(theta)?;
    let gamma = theta.cos();
    let (omega, ps) = if i == 0 {
        (0.0, 1.0)
    } else {
        (
            gamma.powi(i as i32).clamp(0.0, 1.0).acos(),
            gamma.powi(2 * (i as i32 - 1)),
        )
    };
    let pe = parity_error_exact(m, omega)?;
    Ok(0.5 * (1.0 - pe) * (1.0 + ps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn critical_round_examples() {
        let theta = PI / 9.0;
        assert_eq!(critical_round(10, theta).unwrap(), 39);
        assert_eq!(critical_round(2, theta).unwrap(), 23);
        assert_eq!(critical_round(4, theta).unwrap(), 27);
        assert_eq!(critical_round(2, 0.25f64.acos()).unwrap(), 1);
        assert!(critical_round(1, theta).is_err());
        assert!(critical_round(3, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn critical_round_is_minimal(m in 2usize..500, theta in 0.01f64..1.5) {
            let i = critical_round(m, theta).unwrap();
            let ratio = critical_ratio(m);
            prop_assert!(theta.cos().powi(i as i32) <= ratio);
            if i > 1 {
                prop_assert!(theta.cos().powi(i as i32 - 1) > ratio);
            }
        }

        #[test]
        fn bias_bound_matches_grid(m in 1usize..300) {
            let bound = bias_upper_bound(m).unwrap();
            let (c, value) = bias_grid_maximum(m, 10_000);
            prop_assert!((value - bound.value).abs() <= 1e-9);
            prop_assert!((c - bound.argmax).abs() <= 1e-4);
            prop_assert!(bound.value <= 1.0 / m as f64);
        }
    }

    #[test]
    fn analytics_examples() {
        let a = attack_analytics(10, PI / 9.0).unwrap();
        assert_eq!(a.round, 39);
        assert!((a.pc - 0.396_322).abs() < 1e-6);
        assert!((a.ps - 0.008_849_6).abs() < 1e-7);
        assert!((a.p0 - 0.501_753_6).abs() < 1e-7);
        assert!((a.xi - 1.7536e-3).abs() < 1e-7);
        assert!(a.bound_chain_holds());
        assert!((a.lower_bound() - 3.645e-4).abs() < 1e-7);

        let a = attack_analytics(4, PI / 9.0).unwrap();
        assert!((a.p0 - 0.508_624_2).abs() < 1e-7);
    }

    #[test]
    fn pc_and_ps_from_definitions() {
        // PC is the product of independent per-position conclusive rates,
        // PS the step-4 pass rate of a commitment with one swapped tail
        let (m, theta) = (5, 0.5);
        let a = attack_analytics(m, theta).unwrap();
        let omega = theta.cos().powi(a.round as i32).acos();
        let per_position = crate::discrimination::conclusive_rate(omega).unwrap();
        assert!((a.pc - per_position.powi(m as i32)).abs() < 1e-14);
        let gamma = theta.cos();
        let held_overlap: f64 = (0..a.round - 1).map(|_| gamma).product();
        assert!((a.ps - held_overlap * held_overlap).abs() < 1e-14);
    }

    #[test]
    fn bias_bound_examples() {
        let b = bias_upper_bound(1).unwrap();
        assert!((b.argmax - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((b.value - 1.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!((bias_upper_bound(2).unwrap().value - 0.125).abs() < 1e-15);
        assert!(bias_upper_bound(0).is_err());
        for m in 1..=1000 {
            assert!(bias_upper_bound(m).unwrap().value <= 1.0 / m as f64);
        }
    }

    #[test]
    fn best_guess_limits() {
        assert_eq!(best_guess_success(3, PI / 9.0, 0).unwrap(), 0.5);
        // measuring in round 1 costs nothing on the swap side
        let first = best_guess_success(2, PI / 9.0, 1).unwrap();
        let pe = parity_error_exact(2, PI / 9.0).unwrap();
        assert!((first - (1.0 - pe)).abs() < 1e-15);
    }

    #[test]
    fn best_guess_below_attack_at_critical_round() {
        let theta = PI / 9.0;
        for m in 2..=8 {
            let a = attack_analytics(m, theta).unwrap();
            assert!(
                best_guess_success(m, theta, a.round).unwrap() < a.p0,
                "m = {m}"
            );
        }
    }
}
