//! Warden detectability: KL divergence between Willie's two likelihoods, the
//! Pinsker lower bound on his detection error probability, and the linear
//! power cap `Tr(H_w V) ≤ σ²(a₂ − 1)` that enforces `D(p₀‖p₁) ≤ 2ε²`.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numerics::{lambert_w, Branch, HermitianMat};

/// Feasibility slack, in units of the noise power, tolerated by
/// [`CovertnessReport::feasible`].
pub const SLACK_TOLERANCE: f64 = 1e-8;

/// `D(p₀‖p₁) = ln(δ₁/δ₀) + δ₀/δ₁ − 1` for zero-mean complex Gaussians with
/// variances `δ₀` and `δ₁`.
pub fn kl_divergence(delta0: f64, delta1: f64) -> Result<f64> {
    if !(delta0 > 0.0 && delta1 > 0.0) || !delta0.is_finite() || !delta1.is_finite() {
        return Err(Error::Domain(format!(
            "variances must be positive, got {delta0} and {delta1}"
        )));
    }
    let r = delta0 / delta1;
    // ln(1/r) + r − 1, accurate when r ≈ 1
    let x = r - 1.0;
    Ok((x - x.ln_1p()).max(0.0))
}

/// Pinsker bound `1 − √(D/2)` on the detection error probability, clamped to
/// `[0, 1]`.
pub fn dep_lower_bound(delta0: f64, delta1: f64) -> Result<f64> {
    let kl = kl_divergence(delta0, delta1)?;
    Ok((1.0 - (kl / 2.0).sqrt()).clamp(0.0, 1.0))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

/// Roots `a₁ ≤ 1 ≤ a₂` of `ln a + 1/a = 1 + 2ε²`, from the two real branches
/// of Lambert W.
pub fn covert_roots(epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let c = 1.0 + 2.0 * epsilon * epsilon;
    if epsilon == 0.0 {
        return Ok((1.0, 1.0));
    }
    let z = -(-c).exp();
    let a1 = (lambert_w(Branch::MinusOne, z)? + c).exp();
    let a2 = (lambert_w(Branch::Principal, z)? + c).exp();
    Ok((a1, a2))
}

/// `σ²(a₂ − 1)`.
pub fn covert_power_cap(epsilon: f64, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {noise_power}")));
    }
    let (_, a2) = covert_roots(epsilon)?;
    Ok(noise_power * (a2 - 1.0).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovertBudget {
    pub epsilon: f64,
    pub a1: f64,
    pub a2: f64,
    pub noise_power: f64,
    /// Largest admissible `Tr(H_w V)` in watts.
    pub power_cap: f64,
}

impl CovertBudget {
    pub fn new(epsilon: f64, noise_power: f64) -> Result<Self> {
        let (a1, a2) = covert_roots(epsilon)?;
        let power_cap = covert_power_cap(epsilon, noise_power)?;
        Ok(Self {
            epsilon,
            a1,
            a2,
            noise_power,
            power_cap,
        })
    }

    /// Cap in units of the noise power, `a₂ − 1`.
    pub fn normalized_cap(&self) -> f64 {
        self.power_cap / self.noise_power
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovertnessReport {
    /// `Tr(H_w V)` in watts.
    pub willie_power: f64,
    pub power_cap: f64,
    /// `cap − Tr(H_w V)` in watts.
    pub slack: f64,
    /// Slack divided by the noise power.
    pub relative_slack: f64,
    pub kl: f64,
    pub dep_bound: f64,
    pub feasible: bool,
}

pub fn verify_covertness(h_w: &Channel, v: &HermitianMat, budget: &CovertBudget) -> Result<CovertnessReport> {
    let willie_power = h_w.power(v);
    let delta0 = budget.noise_power;
    let delta1 = delta0 + willie_power.max(0.0);
    let kl = kl_divergence(delta0, delta1)?;
    let slack = budget.power_cap - willie_power;
    let relative_slack = slack / budget.noise_power;
    Ok(CovertnessReport {
        willie_power,
        power_cap: budget.power_cap,
        slack,
        relative_slack,
        kl,
        dep_bound: (1.0 - (kl / 2.0).sqrt()).clamp(0.0, 1.0),
        feasible: relative_slack >= -SLACK_TOLERANCE,
    })
}
