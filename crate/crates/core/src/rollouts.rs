//! Rollout groups, on-the-fly difficulty estimation and group statistics.
//!
//! A [`RolloutGroup`] holds the N sampled responses for one prompt. It is the
//! unit over which correctness is estimated and over which every
//! normalization in the crate is computed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sampled response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    /// Length in tokens.
    pub length: u64,
    pub correct: bool,
    /// Canonical answer, used as the equivalence class when voting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_label: Option<String>,
}

impl Response {
    pub fn new(length: u64, correct: bool) -> Self {
        Response {
            length,
            correct,
            answer_label: None,
        }
    }

    pub fn labeled(length: u64, correct: bool, label: impl Into<String>) -> Self {
        Response {
            length,
            correct,
            answer_label: Some(label.into()),
        }
    }
}

/// The responses sampled for a single prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub prompt_id: String,
    pub responses: Vec<Response>,
}

impl RolloutGroup {
    /// Builds a group, rejecting fewer than two responses.
    pub fn new(prompt_id: impl Into<String>, responses: Vec<Response>) -> Result<Self> {
        let group = RolloutGroup {
            prompt_id: prompt_id.into(),
            responses,
        };
        group.validate()?;
        Ok(group)
    }

    /// Checks the group-size invariant (N >= 2).
    pub fn validate(&self) -> Result<()> {
        if self.responses.len() < 2 {
            return Err(Error::invalid(format!(
                "prompt '{}': group needs at least 2 responses, got {}",
                self.prompt_id,
                self.responses.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.responses.iter().map(|r| r.length as f64).collect()
    }

    /// Binary outcome rewards: 1.0 for correct, 0.0 otherwise.
    pub fn outcomes(&self) -> Vec<f64> {
        self.responses
            .iter()
            .map(|r| if r.correct { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn num_correct(&self) -> usize {
        self.responses.iter().filter(|r| r.correct).count()
    }
}

/// Estimated correctness and its complement, the estimated difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyEstimate {
    pub correctness: f64,
    pub difficulty: f64,
}

impl DifficultyEstimate {
    pub fn from_correctness(correctness: f64) -> Result<Self> {
        check_unit_interval("correctness", correctness)?;
        Ok(DifficultyEstimate {
            correctness,
            difficulty: 1.0 - correctness,
        })
    }
}

/// Fraction of correct responses in the group.
///
/// Unlike the normalization routines this accepts a single response; only
/// an empty group is rejected.
pub fn estimate_correctness(group: &RolloutGroup) -> Result<DifficultyEstimate> {
    if group.responses.is_empty() {
        return Err(Error::invalid(format!(
            "prompt '{}': cannot estimate correctness of an empty group",
            group.prompt_id
        )));
    }
    let c = group.num_correct() as f64 / group.len() as f64;
    Ok(DifficultyEstimate {
        correctness: c,
        difficulty: 1.0 - c,
    })
}

/// Divisor used for the group standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StdMode {
    /// Divide by N (GRPO convention).
    #[default]
    Population,
    /// Divide by N - 1. A single value has std 0.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Mean and population standard deviation.
pub fn group_stats(values: &[f64]) -> Result<GroupStats> {
    group_stats_with(values, StdMode::Population)
}

pub fn group_stats_with(values: &[f64], mode: StdMode) -> Result<GroupStats> {
    if values.is_empty() {
        return Err(Error::invalid("group statistics of an empty sequence"));
    }
    let n = values.len();
    // Summation rounding would otherwise leave a ~1e-17 spread on constant input.
    if values.iter().all(|&v| v == values[0]) {
        return Ok(GroupStats {
            mean: values[0],
            std: 0.0,
            count: n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let divisor = match mode {
        StdMode::Population => n as f64,
        StdMode::Sample if n > 1 => (n - 1) as f64,
        StdMode::Sample => 1.0,
    };
    Ok(GroupStats {
        mean,
        std: (ss / divisor).sqrt(),
        count: n,
    })
}

/// Centers `values` on their mean and scales by `1 / (std + epsilon)`.
///
/// Constant input maps to all zeros.
pub fn group_normalize(values: &[f64], epsilon: f64, mode: StdMode) -> Result<Vec<f64>> {
    let stats = group_stats_with(values, mode)?;
    let scale = stats.std + epsilon;
    Ok(values.iter().map(|v| (v - stats.mean) / scale).collect())
}

/// Variance of a Bernoulli outcome with success rate `correctness`.
pub fn binary_outcome_variance(correctness: f64) -> Result<f64> {
    check_unit_interval("correctness", correctness)?;
    Ok(correctness * (1.0 - correctness))
}

pub(crate) fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

/// Difficulty stratum by estimated correctness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    /// correctness in [0.75, 1.0]
    Easy,
    /// correctness in [0.25, 0.75)
    Medium,
    /// correctness in [0, 0.25)
    Hard,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::Easy, Stratum::Medium, Stratum::Hard];

    pub fn of(correctness: f64) -> Result<Self> {
        check_unit_interval("correctness", correctness)?;
        Ok(if correctness >= 0.75 {
            Stratum::Easy
        } else if correctness >= 0.25 {
            Stratum::Medium
        } else {
            Stratum::Hard
        })
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Prompt ids split into the three difficulty strata, input order preserved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strata {
    pub easy: Vec<String>,
    pub medium: Vec<String>,
    pub hard: Vec<String>,
}

impl Strata {
    pub fn get(&self, s: Stratum) -> &[String] {
        match s {
            Stratum::Easy => &self.easy,
            Stratum::Medium => &self.medium,
            Stratum::Hard => &self.hard,
        }
    }

    pub fn total(&self) -> usize {
        self.easy.len() + self.medium.len() + self.hard.len()
    }
}

pub fn partition_by_difficulty<S: AsRef<str>>(estimates: &[(S, f64)]) -> Result<Strata> {
    let mut out = Strata::default();
    for (id, c) in estimates {
        let id = id.as_ref().to_owned();
        match Stratum::of(*c)? {
            Stratum::Easy => out.easy.push(id),
            Stratum::Medium => out.medium.push(id),
            Stratum::Hard => out.hard.push(id),
        }
    }
    Ok(out)
}
