//! Closed-form planning of the counter budget `k` and the round budget `R`.
//!
//! The false-positive tolerance achieved by a run is a function of both the
//! number of counters per peer and the number of gossip rounds executed, via
//! the round-dependent confidence radius `eps_star`. Fixing a target
//! tolerance leaves one degree of freedom: spend rounds to save counters
//! (space-dominant) or spend counters to save rounds (time-dominant). All
//! forms are evaluated in double precision with natural logarithms; the
//! logarithms only ever appear in ratios, so the base cancels.

use crate::error::{Error, Result};

/// Expected per-round variance reduction ratio of the pairwise averaging
/// schedule that draws a random permutation of the peers and pairs each with
/// a uniformly chosen partner: `1 / (2 sqrt(e))`.
pub fn default_convergence_factor() -> f64 {
    1.0 / (2.0 * std::f64::consts::E.sqrt())
}

/// Confidence radius after `round` rounds: `p_star * sqrt(C^round / delta)`.
///
/// Monotone decreasing in `round`. Values >= 1 are legal outputs; querying
/// code treats them as "not enough rounds yet".
pub fn epsilon_star(p_star: u64, delta: f64, conv_factor: f64, round: u32) -> f64 {
    p_star as f64 * (conv_factor.powi(round as i32) / delta).sqrt()
}

/// User-facing planning inputs.
#[derive(Debug, Clone, Copy)]
pub struct PlanInputs {
    /// Frequent-item threshold, 0 < phi < 1.
    pub phi: f64,
    /// Target false-positive tolerance, 0 < eps < phi.
    pub eps: f64,
    /// Failure probability, 0 < delta < 1.
    pub delta: f64,
    /// Upper bound on the number of peers, p_star >= 2.
    pub p_star: u64,
    /// Per-round variance reduction ratio of the gossip schedule.
    pub conv_factor: f64,
}

impl PlanInputs {
    pub fn new(phi: f64, eps: f64, delta: f64, p_star: u64) -> Self {
        PlanInputs {
            phi,
            eps,
            delta,
            p_star,
            conv_factor: default_convergence_factor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "phi must lie in (0, 1), got {}",
                self.phi
            )));
        }
        if !(self.eps > 0.0 && self.eps < self.phi) {
            return Err(Error::InvalidConfig(format!(
                "eps must lie in (0, phi), got {}",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.p_star < 2 {
            return Err(Error::InvalidConfig(format!(
                "p_star must be at least 2, got {}",
                self.p_star
            )));
        }
        if !(self.conv_factor > 0.0 && self.conv_factor < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "conv_factor must lie in (0, 1), got {}",
                self.conv_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    TimeDominant,
    SpaceDominant,
    Explicit,
}

/// A concrete `(k, R)` choice together with the tolerance it achieves.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub k: usize,
    pub rounds: u32,
    pub strategy: Strategy,
    pub achieved_tolerance: f64,
}

/// False-positive tolerance achieved by `k` counters after `round` rounds:
/// `4 eps* phi / (1 + eps*)^2 + (1 - eps*) / (k (1 + eps*))`.
///
/// Monotone non-increasing in both arguments. In the fully converged limit
/// (`eps* -> 0`) it degenerates to `1/k`.
pub fn tolerance(k: usize, round: u32, inputs: &PlanInputs) -> f64 {
    achieved_tolerance(
        k,
        round,
        inputs.phi,
        inputs.delta,
        inputs.p_star,
        inputs.conv_factor,
    )
}

/// [`tolerance`] with the inputs spelled out, for callers that do not plan
/// around a target tolerance.
pub fn achieved_tolerance(
    k: usize,
    round: u32,
    phi: f64,
    delta: f64,
    p_star: u64,
    conv_factor: f64,
) -> f64 {
    let es = epsilon_star(p_star, delta, conv_factor, round);
    4.0 * es * phi / ((1.0 + es) * (1.0 + es)) + (1.0 - es) / (k as f64 * (1.0 + es))
}

/// Smallest counter budget that reaches `inputs.eps` within `rounds` rounds:
/// the ceiling of `(1 - eps*^2) / (eps (1 + eps*)^2 - 4 phi eps*)`.
///
/// Fails with [`Error::InfeasibleRounds`] when the denominator is not
/// positive (or the radius is >= 1), i.e. no finite `k` can compensate for
/// that few rounds.
pub fn k_for_rounds(inputs: &PlanInputs, rounds: u32) -> Result<usize> {
    let es = epsilon_star(inputs.p_star, inputs.delta, inputs.conv_factor, rounds);
    if es >= 1.0 {
        return Err(Error::InfeasibleRounds { rounds });
    }
    let denominator = inputs.eps * (1.0 + es) * (1.0 + es) - 4.0 * inputs.phi * es;
    if denominator <= 0.0 {
        return Err(Error::InfeasibleRounds { rounds });
    }
    let k = ((1.0 - es * es) / denominator).ceil();
    Ok(k as usize)
}

/// Smallest round budget for which any finite counter budget works:
/// `floor((log delta + 2 log((2 phi - eps - 2 sqrt(phi^2 - eps phi)) / (eps p_star))) / log C) + 1`.
///
/// The log argument is evaluated through the identity
/// `(2 phi - eps - 2 sqrt(phi^2 - eps phi)) / eps = t / ((2 - t) + 2 sqrt(1 - t))`
/// with `t = eps / phi`, which avoids the cancellation the literal form
/// suffers for small `t`. The result is then snapped to the exact
/// feasibility boundary of [`k_for_rounds`], absorbing any remaining
/// floating-point rounding at the boundary.
pub fn min_rounds(inputs: &PlanInputs) -> u32 {
    let t = inputs.eps / inputs.phi;
    let arg = t / (((2.0 - t) + 2.0 * (1.0 - t).sqrt()) * inputs.p_star as f64);
    let raw = (inputs.delta.ln() + 2.0 * arg.ln()) / inputs.conv_factor.ln();
    let mut rounds = (raw.floor() + 1.0).max(0.0) as u32;
    while k_for_rounds(inputs, rounds).is_err() {
        rounds += 1;
    }
    while rounds > 0 && k_for_rounds(inputs, rounds - 1).is_ok() {
        rounds -= 1;
    }
    rounds
}

/// Fewest rounds, and the counter budget that goes with them.
pub fn time_dominant_plan(inputs: &PlanInputs) -> Result<Plan> {
    let rounds = min_rounds(inputs);
    let k = k_for_rounds(inputs, rounds)?;
    let achieved = tolerance(k, rounds, inputs);
    debug_assert!(achieved <= inputs.eps);
    Ok(Plan {
        k,
        rounds,
        strategy: Strategy::TimeDominant,
        achieved_tolerance: achieved,
    })
}

/// Fewest counters (`floor(1/eps) + 1`), and the round budget that goes with
/// them: the radius must shrink below
/// `(k (2 phi - eps) - sqrt(4 phi k^2 (phi - eps) + 1)) / (1 + eps k)`,
/// which pins down the round count through the radius formula.
///
/// The radius target is evaluated through its conjugate,
/// `(k^2 eps^2 - 1) / ((k (2 phi - eps) + sqrt(...)) (1 + eps k))`; the
/// literal difference cancels catastrophically when `k eps` is close to 1
/// (that is, when `1/eps` is close to an integer). The derived round budget
/// is then snapped to the exact boundary of the achieved tolerance.
pub fn space_dominant_plan(inputs: &PlanInputs) -> Plan {
    let eps = inputs.eps;
    let phi = inputs.phi;
    let k_min = (1.0 / eps).floor() + 1.0;
    let root = (4.0 * phi * k_min * k_min * (phi - eps) + 1.0).sqrt();
    let ke = k_min * eps;
    let es_target = ((ke - 1.0) * (ke + 1.0))
        / ((k_min * (2.0 * phi - eps) + root) * (1.0 + eps * k_min));
    let es_target = es_target.max(f64::MIN_POSITIVE);
    let raw = (2.0 * es_target.ln() - 2.0 * (inputs.p_star as f64).ln() + inputs.delta.ln())
        / inputs.conv_factor.ln();
    let mut rounds = (raw.floor() + 1.0).max(0.0) as u32;
    let k = k_min as usize;
    let meets = |rounds: u32| {
        epsilon_star(inputs.p_star, inputs.delta, inputs.conv_factor, rounds) < 1.0
            && tolerance(k, rounds, inputs) <= inputs.eps
    };
    while !meets(rounds) {
        rounds += 1;
    }
    while rounds > 0 && meets(rounds - 1) {
        rounds -= 1;
    }
    let achieved = tolerance(k, rounds, inputs);
    debug_assert!(achieved <= inputs.eps);
    Plan {
        k,
        rounds,
        strategy: Strategy::SpaceDominant,
        achieved_tolerance: achieved,
    }
}

/// Deviation bound of pairwise averaging after `round` rounds: with
/// probability `1 - delta` every peer's value is within
/// `sqrt((p - 1) sigma0_sq) * sqrt(C^round / delta)` of the true mean, where
/// `sigma0_sq` is the variance of the initial values.
pub fn gossip_deviation_bound(
    sigma0_sq: f64,
    peers: usize,
    delta: f64,
    conv_factor: f64,
    round: u32,
) -> f64 {
    ((peers.saturating_sub(1)) as f64 * sigma0_sq).sqrt()
        * (conv_factor.powi(round as i32) / delta).sqrt()
}
