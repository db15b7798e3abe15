//! Monte Carlo check of the naive scheme's effective penalty scaling.
//!
//! For every `(correctness, alpha)` cell, groups are simulated with i.i.d.
//! Bernoulli outcomes and independent Gaussian penalties, the naive advantage
//! is computed, and the penalty coefficient is recovered as the pooled
//! least-squares slope of `-A'` on the within-group centered penalty.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{effective_penalty_scaling, naive_advantage, Normalizer};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::rollouts::{check_unit_interval, Response, RolloutGroup, StdMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistortionConfig {
    pub correctness_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub sigma_p: f64,
    pub penalty_mean: f64,
    pub group_size: usize,
    pub num_groups: usize,
    pub epsilon: f64,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        DistortionConfig {
            correctness_grid: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0],
            alpha_grid: vec![0.1, 0.5, 1.0],
            sigma_p: 1.0,
            penalty_mean: 1.0,
            group_size: 4096,
            num_groups: 100,
            epsilon: 1e-6,
        }
    }
}

impl DistortionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.correctness_grid.is_empty() || self.alpha_grid.is_empty() {
            return Err(Error::invalid("distortion grids must be non-empty"));
        }
        for &c in &self.correctness_grid {
            check_unit_interval("distortion correctness", c)?;
        }
        if self
            .alpha_grid
            .iter()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(Error::invalid("distortion alphas must be finite and >= 0"));
        }
        if !(self.sigma_p.is_finite() && self.sigma_p > 0.0) || !self.penalty_mean.is_finite() {
            return Err(Error::invalid(
                "distortion.sigma_p must be positive and finite",
            ));
        }
        if self.group_size < 2 || self.num_groups == 0 {
            return Err(Error::invalid(
                "distortion needs group_size >= 2 and num_groups >= 1",
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("distortion.epsilon must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub c_hat: f64,
    pub alpha: f64,
    pub tau_analytic: f64,
    pub tau_empirical: f64,
    /// Relative error, or the absolute error where the analytic value is 0.
    pub rel_error: f64,
}

#[derive(Default, Clone, Copy)]
struct SlopeStats {
    sxy: f64,
    sxx: f64,
}

fn simulate_group(
    c_hat: f64,
    alpha: f64,
    cfg: &DistortionConfig,
    seed: u64,
    path: [u64; 3],
) -> Result<SlopeStats> {
    let mut rng = stream_rng(seed, Stream::MonteCarlo, &path);
    let penalty_dist = Normal::new(cfg.penalty_mean, cfg.sigma_p)
        .map_err(|e| Error::invalid(format!("penalty distribution: {e}")))?;
    let mut responses = Vec::with_capacity(cfg.group_size);
    let mut penalties = Vec::with_capacity(cfg.group_size);
    for _ in 0..cfg.group_size {
        let correct = rng.random::<f64>() < c_hat;
        responses.push(Response::new(0, correct));
        penalties.push(penalty_dist.sample(&mut rng));
    }
    let group = RolloutGroup {
        prompt_id: String::new(),
        responses,
    };
    let norm = Normalizer {
        epsilon: cfg.epsilon,
        std_mode: StdMode::Population,
    };
    let adv = naive_advantage(&group, &penalties, alpha, &norm)?;
    let mean_p = penalties.iter().sum::<f64>() / penalties.len() as f64;
    let mut stats = SlopeStats::default();
    for (a, p) in adv.iter().zip(&penalties) {
        let x = p - mean_p;
        stats.sxy += -a * x;
        stats.sxx += x * x;
    }
    Ok(stats)
}

/// Runs the Monte Carlo over the full grid, rows ordered correctness-major.
///
/// Groups are simulated in parallel, each from its own derived stream, and
/// the slope statistics are summed in a fixed order, so the table does not
/// depend on thread scheduling.
pub fn distortion_monte_carlo(cfg: &DistortionConfig, seed: u64) -> Result<Vec<DistortionRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.correctness_grid.len() * cfg.alpha_grid.len());
    for (ci, &c_hat) in cfg.correctness_grid.iter().enumerate() {
        for (ai, &alpha) in cfg.alpha_grid.iter().enumerate() {
            let per_group: Vec<SlopeStats> = (0..cfg.num_groups)
                .into_par_iter()
                .map(|g| simulate_group(c_hat, alpha, cfg, seed, [ci as u64, ai as u64, g as u64]))
                .collect::<Result<_>>()?;
            let total = per_group
                .iter()
                .fold(SlopeStats::default(), |acc, s| SlopeStats {
                    sxy: acc.sxy + s.sxy,
                    sxx: acc.sxx + s.sxx,
                });
            let tau_empirical = if total.sxx > 0.0 {
                total.sxy / total.sxx
            } else {
                0.0
            };
            let sigma_outcome = (c_hat * (1.0 - c_hat)).sqrt();
            let tau_analytic =
                effective_penalty_scaling(alpha, sigma_outcome, cfg.sigma_p, cfg.epsilon);
            let abs_err = (tau_empirical - tau_analytic).abs();
            let rel_error = if tau_analytic > 0.0 {
                abs_err / tau_analytic
            } else {
                abs_err
            };
            rows.push(DistortionRow {
                c_hat,
                alpha,
                tau_analytic,
                tau_empirical,
                rel_error,
            });
        }
    }
    Ok(rows)
}
