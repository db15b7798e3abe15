//! Run configuration: a TOML file with four sections plus top-level `seed`
//! and `out_dir`, overridable key by key with `--set section.key=value`.

use std::path::{Path, PathBuf};

use lengthwise::sim::SimSettings;
use lengthwise::{DistortionConfig, PenaltyConfig, ShapingConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoteSettings {
    /// Per-prompt token budgets, ascending.
    pub budgets: Vec<u64>,
}

impl Default for VoteSettings {
    fn default() -> Self {
        VoteSettings {
            budgets: vec![2048, 4096, 8192, 16384, 32768, 65536],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub shaping: ShapingConfig,
    pub penalty: PenaltyConfig,
    pub sim: SimSettings,
    pub distortion: DistortionConfig,
    pub vote: VoteSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20250101,
            out_dir: PathBuf::from("out"),
            shaping: ShapingConfig::default(),
            penalty: PenaltyConfig::default(),
            sim: SimSettings::default(),
            distortion: DistortionConfig::default(),
            vote: VoteSettings::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies `key=value` overrides, and parses.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
                text.parse::<Table>()
                    .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?
            }
            None => Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| {
                CliError::validation(format!("config: {}", e.message()))
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.shaping.validate()?;
        self.penalty.validate()?;
        self.sim.validate()?;
        self.distortion.validate()?;
        if self.vote.budgets.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::validation("vote.budgets must be ascending"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::validation(format!("config: {e}")))
    }
}

/// Sets a dotted key, creating intermediate tables. The value is read as a
/// TOML value when it parses as one and as a bare string otherwise.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::validation(format!("--set expects key=value, got '{assignment}'"))
    })?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(CliError::validation(format!(
            "--set has an empty key in '{assignment}'"
        )));
    }
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()));

    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().expect("non-empty key");
    let mut cur = table;
    for part in parents {
        let entry = cur
            .entry((*part).to_owned())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::validation(format!("--set {key}: '{part}' is not a table")))?;
    }
    cur.insert((*last).to_owned(), value);
    Ok(())
}

pub const DEFAULTS_HEADER: &str = "\
# lengthwise run configuration (defaults).
#
# [shaping]     advantage computation: alpha_base, weight_fn (\"identity\" |
#               \"constant-one\" | { custom-table = [[c, w], ...] }), scheme
#               (\"advantage-weighting\" | \"naive-reward-weighting\"),
#               penalty_variant (\"kimi\" | \"dynamic-target\" | \"combined\"),
#               cycle_period, cyclical_enabled, epsilon, std_mode
#               (\"population\" | \"sample\")
# [penalty]     epsilon, l_max (target-length scale), delta (target window)
# [sim]         synthetic training run
# [distortion]  Monte Carlo grid for the naive-scheme scaling check
# [vote]        token budgets for the voting curve
#
# Any key can be overridden with --set section.key=value.

";
