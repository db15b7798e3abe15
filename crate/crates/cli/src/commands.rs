use std::path::Path;

use lengthwise::rng::{stream_rng, Stream};
use lengthwise::sim::SimConfig;
use lengthwise::voting::VotingPrompt;
use lengthwise::{
    distortion_monte_carlo, run_experiment, scaling_curve, shaped_advantage, Scheme, TrainTrace,
};

use crate::config::{RunConfig, DEFAULTS_HEADER};
use crate::error::{CliError, Result};
use crate::logfile::read_log;
use crate::output::{self, write_atomic};
use crate::{Cli, Command, Format};

pub fn run(cli: &Cli) -> Result<()> {
    if let Command::Config { defaults: true } = cli.command {
        print!("{DEFAULTS_HEADER}{}", RunConfig::default().to_toml()?);
        return Ok(());
    }
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    match &cli.command {
        Command::Config { .. } => {
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
        Command::Advantage { log, step } => advantage(&cfg, log, *step, cli.format),
        Command::Simulate { paired } => simulate(&cfg, *paired),
        Command::Distortion => distortion(&cfg),
        Command::Vote { log, budgets } => vote(&cfg, log, budgets.as_deref()),
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn advantage(cfg: &RunConfig, log: &Path, step: u64, format: Format) -> Result<()> {
    let records = read_log(log)?;
    if records.is_empty() {
        eprintln!("warning: {} contains no rollout groups", log.display());
    }
    let mut reports = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let group = &rec.prompt.group;
        if group.len() < 2 {
            return Err(CliError::validation(format!(
                "line {}: prompt '{}' has {} response(s), need at least 2",
                rec.line,
                group.prompt_id,
                group.len()
            )));
        }
        let mut rng = stream_rng(cfg.seed, Stream::Targets, &[i as u64]);
        let report =
            shaped_advantage(group, step, &cfg.shaping, &cfg.penalty, &mut rng).map_err(|e| {
                let mut err = CliError::from(e);
                err.message = format!(
                    "line {}: prompt '{}': {}",
                    rec.line, group.prompt_id, err.message
                );
                err
            })?;
        reports.push(report);
    }
    let (name, body) = match format {
        Format::Jsonl => ("advantage.jsonl", output::advantage_jsonl(&reports)?),
        Format::Csv => ("advantage.csv", output::advantage_csv(&reports)),
    };
    announce(&write_atomic(&cfg.out_dir, name, &body)?);
    Ok(())
}

fn sim_config(cfg: &RunConfig, scheme: Scheme) -> SimConfig {
    let mut shaping = cfg.shaping.clone();
    shaping.scheme = scheme;
    SimConfig {
        settings: cfg.sim.clone(),
        shaping,
        penalty: cfg.penalty,
        seed: cfg.seed,
    }
}

fn simulate(cfg: &RunConfig, paired: bool) -> Result<()> {
    if !paired {
        let trace = run_experiment(&sim_config(cfg, cfg.shaping.scheme))?;
        announce(&write_atomic(
            &cfg.out_dir,
            "trace.csv",
            &output::trace_csv(&trace.rows),
        )?);
        return Ok(());
    }
    let weighted = run_experiment(&sim_config(cfg, Scheme::AdvantageWeighting))?;
    let naive = run_experiment(&sim_config(cfg, Scheme::NaiveRewardWeighting))?;
    announce(&write_atomic(
        &cfg.out_dir,
        "trace_weighted.csv",
        &output::trace_csv(&weighted.rows),
    )?);
    announce(&write_atomic(
        &cfg.out_dir,
        "trace_naive.csv",
        &output::trace_csv(&naive.rows),
    )?);
    announce(&write_atomic(
        &cfg.out_dir,
        "comparison.csv",
        &comparison_csv(&weighted, &naive),
    )?);
    Ok(())
}

fn comparison_csv(weighted: &TrainTrace, naive: &TrainTrace) -> String {
    let (w0, w1, n1) = (weighted.initial(), weighted.last(), naive.last());
    format!(
        "initial_pass_rate,initial_mean_length,weighted_pass_rate,weighted_mean_length,\
         naive_pass_rate,naive_mean_length,pass_rate_gap\n{},{},{},{},{},{},{}\n",
        w0.pass_rate,
        w0.mean_length,
        w1.pass_rate,
        w1.mean_length,
        n1.pass_rate,
        n1.mean_length,
        w1.pass_rate - n1.pass_rate
    )
}

fn distortion(cfg: &RunConfig) -> Result<()> {
    let rows = distortion_monte_carlo(&cfg.distortion, cfg.seed)?;
    announce(&write_atomic(
        &cfg.out_dir,
        "distortion.csv",
        &output::distortion_csv(&rows),
    )?);
    Ok(())
}

fn vote(cfg: &RunConfig, log: &Path, budgets: Option<&[u64]>) -> Result<()> {
    let prompts: Vec<VotingPrompt> = read_log(log)?.into_iter().map(|r| r.prompt).collect();
    let budgets = budgets.unwrap_or(&cfg.vote.budgets);
    let curve = scaling_curve(&prompts, budgets)?;
    announce(&write_atomic(
        &cfg.out_dir,
        "vote.csv",
        &output::curve_csv(&curve),
    )?);
    Ok(())
}
