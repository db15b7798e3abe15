//! Rollout-log ingestion. Each non-blank line is one JSON object:
//! `{"prompt_id": str, "responses": [{"length": int, "correct": bool,
//! "answer_label": str?}], "ground_truth": str?}`.

use std::path::Path;

use lengthwise::voting::VotingPrompt;
use lengthwise::{Response, RolloutGroup};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResponse {
    length: i64,
    correct: bool,
    #[serde(default)]
    answer_label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    prompt_id: String,
    responses: Vec<RawResponse>,
    #[serde(default)]
    ground_truth: Option<String>,
}

/// A parsed group and the 1-based line it came from.
#[derive(Debug)]
pub struct LogRecord {
    pub line: usize,
    pub prompt: VotingPrompt,
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawGroup = serde_json::from_str(line)
            .map_err(|e| CliError::validation(format!("line {line_no}: {e}")))?;
        let mut responses = Vec::with_capacity(raw.responses.len());
        for (j, r) in raw.responses.into_iter().enumerate() {
            let length = u64::try_from(r.length).map_err(|_| {
                CliError::validation(format!(
                    "line {line_no}: response {j} of prompt '{}' has negative length {}",
                    raw.prompt_id, r.length
                ))
            })?;
            responses.push(Response {
                length,
                correct: r.correct,
                answer_label: r.answer_label,
            });
        }
        records.push(LogRecord {
            line: line_no,
            prompt: VotingPrompt {
                group: RolloutGroup {
                    prompt_id: raw.prompt_id,
                    responses,
                },
                ground_truth: raw.ground_truth,
            },
        });
    }
    Ok(records)
}

pub fn read_log(path: &Path) -> Result<Vec<LogRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    parse_log(&text)
}
