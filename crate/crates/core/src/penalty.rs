//! Length penalties: the relative-length (Kimi 1.5) penalty, difficulty
//! conditioned target lengths, raw exceedance and the group-normalized
//! exceedance penalty.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rollouts::{check_unit_interval, group_normalize, RolloutGroup, StdMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    /// Denominator guard for the relative-length and exceedance penalties.
    pub epsilon: f64,
    /// Target-length scale in tokens.
    pub l_max: u64,
    /// Width of the target-length window, as a fraction of `l_max`.
    pub delta: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            epsilon: 1e-6,
            l_max: 8192,
            delta: 0.1,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "penalty.epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.l_max == 0 {
            return Err(Error::invalid("penalty.l_max must be positive"));
        }
        check_unit_interval("penalty.delta", self.delta)
    }
}

/// A sampled target length together with the window it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetLength {
    pub target: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl TargetLength {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower_bound + self.upper_bound)
    }
}

/// Relative-length reward, one value per response, each in `[-0.5, 0.5]`.
///
/// `gamma_i = 0.5 - (L_i - min L) / (max L - min L + eps)`. Correct responses
/// receive `gamma_i`; incorrect ones `min(0, gamma_i)`, so they are never
/// rewarded for being short.
pub fn kimi_penalty(group: &RolloutGroup, cfg: &PenaltyConfig) -> Result<Vec<f64>> {
    group.validate()?;
    let min = group.responses.iter().map(|r| r.length).min().unwrap_or(0) as f64;
    let max = group.responses.iter().map(|r| r.length).max().unwrap_or(0) as f64;
    let span = max - min + cfg.epsilon;
    Ok(group
        .responses
        .iter()
        .map(|r| {
            let gamma = 0.5 - (r.length as f64 - min) / span;
            if r.correct {
                gamma
            } else {
                gamma.min(0.0)
            }
        })
        .collect())
}

/// Window `[max(0, l_max * (d - delta)), l_max * d]` for difficulty `d`.
pub fn target_bounds(difficulty: f64, cfg: &PenaltyConfig) -> Result<(f64, f64)> {
    check_unit_interval("difficulty", difficulty)?;
    let l_max = cfg.l_max as f64;
    let lower = (l_max * (difficulty - cfg.delta)).max(0.0);
    let upper = l_max * difficulty;
    Ok((lower, upper))
}

/// Draws a target length uniformly from the difficulty-conditioned window.
///
/// Harder prompts (larger `difficulty`) get a larger budget. A degenerate
/// window returns its single point without consuming randomness.
pub fn sample_dynamic_target<R: Rng + ?Sized>(
    difficulty: f64,
    cfg: &PenaltyConfig,
    rng: &mut R,
) -> Result<TargetLength> {
    let (lower, upper) = target_bounds(difficulty, cfg)?;
    let target = if upper > lower {
        let u: f64 = rng.random();
        (lower + u * (upper - lower)).clamp(lower, upper)
    } else {
        lower
    };
    Ok(TargetLength {
        target,
        lower_bound: lower,
        upper_bound: upper,
    })
}

/// `max(0, length - target)`.
pub fn exceedance(length: u64, target: &TargetLength) -> f64 {
    (length as f64 - target.target).max(0.0)
}

/// Exceedance of every response in the group against one shared target.
pub fn group_exceedance(group: &RolloutGroup, target: &TargetLength) -> Vec<f64> {
    group
        .responses
        .iter()
        .map(|r| exceedance(r.length, target))
        .collect()
}

/// Group-normalized exceedance `(p_i - mean) / (std + eps)` with population std.
pub fn normalized_exceedance_penalty(exceedances: &[f64], cfg: &PenaltyConfig) -> Result<Vec<f64>> {
    if exceedances.len() < 2 {
        return Err(Error::invalid(format!(
            "normalized exceedance needs at least 2 values, got {}",
            exceedances.len()
        )));
    }
    group_normalize(exceedances, cfg.epsilon, StdMode::Population)
}
