//! Synthetic training environment for length shaping.
//!
//! Each problem has a latent difficulty that fixes how many tokens a
//! response needs. The policy is tabular: one log-mean length per problem and
//! a shared log-normal spread. A response is likely correct when it is longer
//! than the problem's required length, and each problem's solve rate is capped
//! by its difficulty, so cutting length too far costs accuracy while hard
//! problems stay hard regardless of length. Training is plain REINFORCE on
//! the per-response advantages from [`crate::advantage::shaped_advantage`].

use rand::Rng;
use rand_distr::{Beta, Distribution, LogNormal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advantage::{shaped_advantage, AdvantageReport, ShapingConfig};
use crate::error::{Error, Result};
use crate::penalty::PenaltyConfig;
use crate::rng::{stream_rng, Stream};
use crate::rollouts::{Response, RolloutGroup, Stratum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub latent_difficulty: f64,
    /// Tokens needed before correctness saturates.
    pub required_length: f64,
}

/// Tabular length policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Log-mean response length per problem.
    pub theta: Vec<f64>,
    /// Log-normal sigma shared by all problems.
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DifficultyDist {
    Uniform { low: f64, high: f64 },
    Beta { a: f64, b: f64 },
}

impl Default for DifficultyDist {
    fn default() -> Self {
        DifficultyDist::Uniform {
            low: 0.0,
            high: 1.0,
        }
    }
}

/// Environment and optimizer settings; the serializable part of [`SimConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub num_problems: usize,
    /// Rollouts per prompt per training step.
    pub group_size: usize,
    pub steps: u64,
    pub learning_rate: f64,
    pub difficulty: DifficultyDist,
    /// Logistic slope `k` on the normalized length surplus.
    pub correctness_slope: f64,
    /// Solve-rate ceiling is `1 - solvability_drop * difficulty`.
    pub solvability_drop: f64,
    /// `required_length(d) = base_length * (0.2 + 0.8 d)`.
    pub base_length: f64,
    /// Initial mean length as a multiple of the required length.
    pub initial_overthinking: f64,
    pub length_spread: f64,
    /// Log-scale spread of each problem's initial verbosity around
    /// `initial_overthinking`.
    pub initial_jitter: f64,
    /// Samples per problem when measuring a trace row.
    pub eval_samples: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            num_problems: 512,
            group_size: 8,
            steps: 300,
            learning_rate: 0.01,
            difficulty: DifficultyDist::default(),
            correctness_slope: 24.0,
            solvability_drop: 0.9,
            base_length: 4000.0,
            initial_overthinking: 3.0,
            length_spread: 0.2,
            initial_jitter: 0.25,
            eval_samples: 64,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if self.num_problems == 0 || self.eval_samples == 0 {
            return Err(Error::invalid(
                "sim.num_problems and sim.eval_samples must be positive",
            ));
        }
        if self.group_size < 2 {
            return Err(Error::invalid("sim.group_size must be >= 2"));
        }
        let positive = [
            ("sim.base_length", self.base_length),
            ("sim.initial_overthinking", self.initial_overthinking),
            ("sim.length_spread", self.length_spread),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.initial_jitter.is_finite() && self.initial_jitter >= 0.0) {
            return Err(Error::invalid("sim.initial_jitter must be finite and >= 0"));
        }
        if self.correctness_slope.is_nan() || self.correctness_slope < 0.0 {
            return Err(Error::invalid("sim.correctness_slope must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.solvability_drop) {
            return Err(Error::invalid("sim.solvability_drop must lie in [0, 1]"));
        }
        match self.difficulty {
            DifficultyDist::Uniform { low, high }
                if !(0.0 <= low && low <= high && high <= 1.0) =>
            {
                Err(Error::invalid(
                    "sim.difficulty uniform bounds must satisfy 0 <= low <= high <= 1",
                ))
            }
            DifficultyDist::Beta { a, b } if !(a > 0.0 && b > 0.0) => Err(Error::invalid(
                "sim.difficulty beta parameters must be positive",
            )),
            _ => Ok(()),
        }
    }

    pub fn required_length(&self, difficulty: f64) -> f64 {
        self.base_length * (0.2 + 0.8 * difficulty)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig {
    pub settings: SimSettings,
    pub shaping: ShapingConfig,
    pub penalty: PenaltyConfig,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        let eta = self.settings.learning_rate;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid(format!(
                "sim.learning_rate must be positive, got {eta}"
            )));
        }
        self.shaping.validate()?;
        self.penalty.validate()
    }
}

/// Correctness model shared by sampling and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectnessModel {
    pub slope: f64,
    pub solvability_drop: f64,
}

impl CorrectnessModel {
    pub fn from_settings(s: &SimSettings) -> Self {
        CorrectnessModel {
            slope: s.correctness_slope,
            solvability_drop: s.solvability_drop,
        }
    }

    pub fn probability(&self, problem: &Problem, length: f64) -> f64 {
        let surplus = (length - problem.required_length) / problem.required_length;
        let ceiling = 1.0 - self.solvability_drop * problem.latent_difficulty;
        let z = self.slope * surplus;
        let logistic = if z.is_infinite() {
            if z > 0.0 {
                1.0
            } else {
                0.0
            }
        } else if length == problem.required_length {
            0.5
        } else {
            1.0 / (1.0 + (-z).exp())
        };
        ceiling * logistic
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub problems: Vec<Problem>,
    /// Standard-normal draw per problem scaling its initial verbosity.
    pub verbosity: Vec<f64>,
}

impl World {
    pub fn generate(settings: &SimSettings, seed: u64) -> Result<Self> {
        settings.validate()?;
        let mut rng = stream_rng(seed, Stream::Sim, &[]);
        let beta = match settings.difficulty {
            DifficultyDist::Beta { a, b } => {
                Some(Beta::new(a, b).map_err(|e| Error::invalid(format!("beta difficulty: {e}")))?)
            }
            DifficultyDist::Uniform { .. } => None,
        };
        let problems: Vec<Problem> = (0..settings.num_problems)
            .map(|i| {
                let d = match (settings.difficulty, &beta) {
                    (_, Some(beta)) => beta.sample(&mut rng),
                    (DifficultyDist::Uniform { low, high }, None) => {
                        low + (high - low) * rng.random::<f64>()
                    }
                    _ => unreachable!(),
                };
                Problem {
                    id: format!("p{i:04}"),
                    latent_difficulty: d,
                    required_length: settings.required_length(d),
                }
            })
            .collect();
        let verbosity = (0..settings.num_problems)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Ok(World {
            problems,
            verbosity,
        })
    }

    /// Policy whose mean length is `initial_overthinking` times the required
    /// length, scattered per problem by `initial_jitter` on the log scale.
    pub fn initial_policy(&self, settings: &SimSettings) -> PolicyParams {
        let s = settings.length_spread;
        PolicyParams {
            theta: self
                .problems
                .iter()
                .zip(&self.verbosity)
                .map(|(p, z)| {
                    (settings.initial_overthinking * p.required_length).ln()
                        + settings.initial_jitter * z
                        - 0.5 * s * s
                })
                .collect(),
            spread: s,
        }
    }
}

/// Draws `n` responses for one problem; lengths are rounded to whole tokens (at least 1).
pub fn sample_group<R: Rng + ?Sized>(
    problem: &Problem,
    theta: f64,
    spread: f64,
    n: usize,
    model: &CorrectnessModel,
    rng: &mut R,
) -> Result<RolloutGroup> {
    let dist = LogNormal::new(theta, spread)
        .map_err(|e| Error::invalid(format!("length distribution: {e}")))?;
    let responses = (0..n)
        .map(|_| {
            let length = dist.sample(rng).round().max(1.0);
            if !length.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("sampled length for {}", problem.id),
                });
            }
            let correct = rng.random::<f64>() < model.probability(problem, length);
            Ok(Response::new(length as u64, correct))
        })
        .collect::<Result<_>>()?;
    Ok(RolloutGroup {
        prompt_id: problem.id.clone(),
        responses,
    })
}

/// Score-function gradient of the mean advantage with respect to `theta`.
pub fn policy_gradient(group: &RolloutGroup, advantages: &[f64], theta: f64, spread: f64) -> f64 {
    let var = spread * spread;
    let sum: f64 = group
        .responses
        .iter()
        .zip(advantages)
        .map(|(r, a)| a * ((r.length as f64).ln() - theta) / var)
        .sum();
    sum / group.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub params: PolicyParams,
    pub reports: Vec<AdvantageReport>,
}

/// One REINFORCE step over every problem.
///
/// Problem `i` at step `t` samples from stream `(sim, [t, i])`, so the result
/// does not depend on how the work is scheduled across threads.
pub fn train_step(
    world: &World,
    params: &PolicyParams,
    step: u64,
    cfg: &SimConfig,
) -> Result<StepOutcome> {
    let model = CorrectnessModel::from_settings(&cfg.settings);
    let eta = cfg.settings.learning_rate;
    let results: Vec<(f64, AdvantageReport)> = world
        .problems
        .par_iter()
        .zip(params.theta.par_iter())
        .enumerate()
        .map(|(i, (problem, &theta))| {
            let mut rng = stream_rng(cfg.seed, Stream::Sim, &[step, i as u64]);
            let group = sample_group(
                problem,
                theta,
                params.spread,
                cfg.settings.group_size,
                &model,
                &mut rng,
            )?;
            let report = shaped_advantage(&group, step, &cfg.shaping, &cfg.penalty, &mut rng)?;
            let grad = policy_gradient(&group, &report.combined_advantage, theta, params.spread);
            let updated = theta + eta * grad;
            if !updated.is_finite() {
                return Err(Error::NonFinite {
                    context: format!(
                        "policy update for {} at step {step} (learning rate too large?)",
                        problem.id
                    ),
                });
            }
            Ok((updated, report))
        })
        .collect::<Result<_>>()?;
    let (theta, reports) = results.into_iter().unzip();
    Ok(StepOutcome {
        params: PolicyParams {
            theta,
            spread: params.spread,
        },
        reports,
    })
}

/// Pearson correlation coefficient.
///
/// If exactly one side is constant the result is 0; if both are, the
/// correlation is undefined.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(format!(
            "pearson correlation needs two equal-length sequences of at least 2 values, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    match (sxx > 0.0, syy > 0.0) {
        (false, false) => Err(Error::UndefinedCorrelation),
        (true, true) => Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)),
        _ => Ok(0.0),
    }
}

/// Aggregates recorded for one trace row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub pass_rate: f64,
    pub mean_length: f64,
    pub pearson_r: f64,
    pub len_easy: f64,
    pub len_med: f64,
    pub len_hard: f64,
    pub pass_easy: f64,
    pub pass_med: f64,
    pub pass_hard: f64,
    /// Mean applied penalty weight per stratum during this step's update;
    /// NaN on the final, evaluation-only row.
    pub weight_easy: f64,
    pub weight_med: f64,
    pub weight_hard: f64,
}

impl TraceRow {
    pub fn stratum_length(&self, s: Stratum) -> f64 {
        match s {
            Stratum::Easy => self.len_easy,
            Stratum::Medium => self.len_med,
            Stratum::Hard => self.len_hard,
        }
    }

    pub fn stratum_weight(&self, s: Stratum) -> f64 {
        match s {
            Stratum::Easy => self.weight_easy,
            Stratum::Medium => self.weight_med,
            Stratum::Hard => self.weight_hard,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// `steps + 1` rows: row `t` measures the policy before update `t`;
    /// the last row measures the trained policy.
    pub rows: Vec<TraceRow>,
    /// Stratum of each problem, fixed from the initial measurement.
    pub strata: Vec<Stratum>,
    pub final_params: PolicyParams,
}

impl TrainTrace {
    pub fn initial(&self) -> &TraceRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace always has an initial row")
    }

    /// `1 - final / initial` mean length for the stratum.
    pub fn relative_compression(&self, s: Stratum) -> f64 {
        1.0 - self.last().stratum_length(s) / self.initial().stratum_length(s)
    }
}

struct Measurement {
    pass_rate: f64,
    mean_length: f64,
    pearson_r: f64,
    correctness: Vec<f64>,
    lengths: Vec<f64>,
}

fn measure(
    world: &World,
    params: &PolicyParams,
    step: u64,
    cfg: &SimConfig,
) -> Result<Measurement> {
    let model = CorrectnessModel::from_settings(&cfg.settings);
    let k = cfg.settings.eval_samples;
    let per_problem: Vec<(f64, f64)> = world
        .problems
        .par_iter()
        .zip(params.theta.par_iter())
        .enumerate()
        .map(|(i, (problem, &theta))| {
            let mut rng = stream_rng(cfg.seed, Stream::Eval, &[step, i as u64]);
            let g = sample_group(problem, theta, params.spread, k, &model, &mut rng)?;
            let c = g.num_correct() as f64 / k as f64;
            let len = g.responses.iter().map(|r| r.length as f64).sum::<f64>() / k as f64;
            Ok((c, len))
        })
        .collect::<Result<_>>()?;
    let (correctness, lengths): (Vec<f64>, Vec<f64>) = per_problem.into_iter().unzip();
    let n = correctness.len() as f64;
    let difficulty: Vec<f64> = correctness.iter().map(|c| 1.0 - c).collect();
    let pearson_r = if correctness.len() >= 2 {
        pearson_correlation(&difficulty, &lengths).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    Ok(Measurement {
        pass_rate: correctness.iter().sum::<f64>() / n,
        mean_length: lengths.iter().sum::<f64>() / n,
        pearson_r,
        correctness,
        lengths,
    })
}

fn stratum_means(values: &[f64], strata: &[Stratum]) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut count = [0usize; 3];
    for (v, s) in values.iter().zip(strata) {
        sum[s.index()] += v;
        count[s.index()] += 1;
    }
    let mut out = [f64::NAN; 3];
    for i in 0..3 {
        if count[i] > 0 {
            out[i] = sum[i] / count[i] as f64;
        }
    }
    out
}

/// Trains from the initial policy for `steps` updates.
pub fn run_experiment(cfg: &SimConfig) -> Result<TrainTrace> {
    cfg.validate()?;
    let world = World::generate(&cfg.settings, cfg.seed)?;
    let mut params = world.initial_policy(&cfg.settings);
    let mut rows = Vec::with_capacity(cfg.settings.steps as usize + 1);
    let mut strata = Vec::new();

    for step in 0..=cfg.settings.steps {
        let m = measure(&world, &params, step, cfg)?;
        if step == 0 {
            strata = m
                .correctness
                .iter()
                .map(|&c| Stratum::of(c))
                .collect::<Result<_>>()?;
        }
        let lens = stratum_means(&m.lengths, &strata);
        let passes = stratum_means(&m.correctness, &strata);
        let weights = if step < cfg.settings.steps {
            let out = train_step(&world, &params, step, cfg)?;
            params = out.params;
            let w: Vec<f64> = out.reports.iter().map(|r| r.penalty_weight).collect();
            stratum_means(&w, &strata)
        } else {
            [f64::NAN; 3]
        };
        rows.push(TraceRow {
            step,
            pass_rate: m.pass_rate,
            mean_length: m.mean_length,
            pearson_r: m.pearson_r,
            len_easy: lens[0],
            len_med: lens[1],
            len_hard: lens[2],
            pass_easy: passes[0],
            pass_med: passes[1],
            pass_hard: passes[2],
            weight_easy: weights[0],
            weight_med: weights[1],
            weight_hard: weights[2],
        });
    }
    Ok(TrainTrace {
        rows,
        strata,
        final_params: params,
    })
}
