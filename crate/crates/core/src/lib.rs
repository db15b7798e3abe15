//! Difficulty-aware length shaping for group-normalized policy gradients.
//!
//! The crate turns rollout groups (N sampled responses per prompt, each with
//! a token length and a correctness flag) into per-response advantages that
//! trade accuracy against verbosity, with the length pressure scaled by how
//! easy the prompt currently is for the policy.
//!
//! * [`rollouts`]: groups, correctness estimates, group statistics, strata.
//! * [`penalty`]: relative-length penalty, dynamic target lengths, exceedance.
//! * [`advantage`]: adaptive weights, cyclical schedule, naive and separately
//!   normalized combination, and a Monte Carlo check of the naive scheme.
//! * [`sim`]: a tabular synthetic policy trained with REINFORCE.
//! * [`voting`]: majority voting and accuracy-vs-budget curves.

pub mod advantage;
pub mod error;
pub mod penalty;
pub mod rng;
pub mod rollouts;
pub mod sim;
pub mod voting;

pub use advantage::{
    advantage_weighting, alpha_ada, cyclical_factor, distortion_monte_carlo,
    effective_penalty_scaling, naive_advantage, shaped_advantage, AdvantageReport,
    DistortionConfig, DistortionRow, Normalizer, PenaltyVariant, Scheme, ShapingConfig, WeightFn,
};
pub use error::{Error, Result};
pub use penalty::{
    exceedance, kimi_penalty, normalized_exceedance_penalty, sample_dynamic_target, PenaltyConfig,
    TargetLength,
};
pub use rollouts::{
    binary_outcome_variance, estimate_correctness, group_stats, partition_by_difficulty,
    DifficultyEstimate, GroupStats, Response, RolloutGroup, StdMode, Strata, Stratum,
};
pub use sim::{pearson_correlation, run_experiment, SimConfig, SimSettings, TrainTrace};
pub use voting::{majority_vote, scaling_curve, CurvePoint, VoteResult, VotingPrompt};
