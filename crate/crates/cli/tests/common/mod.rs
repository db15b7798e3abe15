#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lengthwise"))
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn lengthwise")
}

pub fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut full = vec!["--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    run(&full)
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `prompts` groups of `k` binary answers, each independently right with
/// probability `accuracy`; right answers are "A", wrong ones "B".
pub fn binomial_corpus(prompts: usize, k: usize, accuracy: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(prompts * k * 50);
    for p in 0..prompts {
        write!(
            out,
            "{{\"prompt_id\":\"p{p}\",\"ground_truth\":\"A\",\"responses\":["
        )
        .unwrap();
        for j in 0..k {
            let ok = rng.random::<f64>() < accuracy;
            let label = if ok { "A" } else { "B" };
            if j > 0 {
                out.push(',');
            }
            write!(
                out,
                "{{\"length\":100,\"correct\":{ok},\"answer_label\":\"{label}\"}}"
            )
            .unwrap();
        }
        out.push_str("]}\n");
    }
    out
}

/// Probability that a strict majority of `k` (odd) independent answers is right.
pub fn binomial_majority(k: u32, p: f64) -> f64 {
    let choose =
        |n: u32, r: u32| (0..r).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1));
    (k / 2 + 1..=k)
        .map(|j| choose(k, j) * p.powi(j as i32) * (1.0 - p).powi((k - j) as i32))
        .sum()
}

/// Parses a CSV written by the tool into its header and numeric rows.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

/// Compares `actual` against a committed golden file. With
/// `LENGTHWISE_BLESS=1` the golden file is rewritten instead.
pub fn check_golden(actual: &[u8], golden: &str) -> bool {
    let path = fixture(golden);
    if std::env::var_os("LENGTHWISE_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return true;
    }
    std::fs::read(&path).unwrap() == actual
}
