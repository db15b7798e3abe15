use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use lengthwise::sim::TraceRow;
use lengthwise::{AdvantageReport, CurvePoint, DistortionRow};

use crate::error::{CliError, Result};

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let io_err = |e: std::io::Error| CliError::io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(&path).map_err(|e| io_err(e.error))?;
    Ok(path)
}

pub const TRACE_HEADER: &str = "step,pass_rate,mean_length,pearson_r,len_easy,len_med,len_hard";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step, r.pass_rate, r.mean_length, r.pearson_r, r.len_easy, r.len_med, r.len_hard
        )
        .unwrap();
    }
    out
}

pub fn distortion_csv(rows: &[DistortionRow]) -> String {
    let mut out = String::from("c_hat,alpha,tau_analytic,tau_empirical,rel_error\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.c_hat, r.alpha, r.tau_analytic, r.tau_empirical, r.rel_error
        )
        .unwrap();
    }
    out
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("budget,micro_avg_accuracy,mean_samples_used\n");
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            p.budget, p.micro_avg_accuracy, p.mean_samples_used
        )
        .unwrap();
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per response; group-level fields repeat on every row.
pub fn advantage_csv(reports: &[AdvantageReport]) -> String {
    let mut out = String::from(
        "prompt_id,response,correctness,alpha_ada,cyclical_factor,penalty_weight,\
         effective_penalty_scaling,target,penalty,outcome_advantage,penalty_advantage,combined_advantage\n",
    );
    for r in reports {
        for i in 0..r.combined_advantage.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&r.prompt_id),
                i,
                r.correctness,
                r.alpha_ada,
                r.cyclical_factor,
                r.penalty_weight,
                opt(r.effective_penalty_scaling),
                opt(r.target.map(|t| t.target)),
                r.penalties[i],
                r.outcome_advantage[i],
                r.penalty_advantage[i],
                r.combined_advantage[i],
            )
            .unwrap();
        }
    }
    out
}

pub fn advantage_jsonl(reports: &[AdvantageReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        let line = serde_json::to_string(r).map_err(|e| {
            CliError::validation(format!("serializing report '{}': {e}", r.prompt_id))
        })?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "x.csv", "one\n").unwrap();
        let p = write_atomic(dir.path(), "x.csv", "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
