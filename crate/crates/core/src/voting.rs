//! Majority voting over sampled answers and accuracy-vs-budget curves.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rollouts::RolloutGroup;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteResult {
    pub winning_label: String,
    pub winning_count: usize,
    pub total: usize,
    /// Set once the vote is judged against a reference.
    pub is_correct: Option<bool>,
}

impl VoteResult {
    pub fn judge(mut self, truth: &str) -> Self {
        self.is_correct = Some(self.winning_label == truth);
        self
    }
}

/// Picks the most frequent label. Ties go to the label seen first.
pub fn majority_vote<S: AsRef<str>>(labels: &[S]) -> Result<VoteResult> {
    if labels.is_empty() {
        return Err(Error::invalid("majority vote over no answers"));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for label in labels {
        let label = label.as_ref();
        match index.get(label) {
            Some(&i) => counts[i].1 += 1,
            None => {
                index.insert(label, counts.len());
                counts.push((label, 1));
            }
        }
    }
    let mut best = counts[0];
    for &entry in &counts[1..] {
        if entry.1 > best.1 {
            best = entry;
        }
    }
    Ok(VoteResult {
        winning_label: best.0.to_owned(),
        winning_count: best.1,
        total: labels.len(),
        is_correct: None,
    })
}

/// A prompt's labeled samples plus, optionally, its reference answer.
///
/// Without a reference, a winning label counts as correct when the first
/// response carrying it is marked correct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingPrompt {
    pub group: RolloutGroup,
    #[serde(default)]
    pub ground_truth: Option<String>,
}

impl VotingPrompt {
    fn validate(&self) -> Result<()> {
        if self.group.responses.is_empty() {
            return Err(Error::invalid(format!(
                "prompt '{}': no samples to vote over",
                self.group.prompt_id
            )));
        }
        if let Some(i) = self
            .group
            .responses
            .iter()
            .position(|r| r.answer_label.is_none())
        {
            return Err(Error::invalid(format!(
                "prompt '{}': response {i} has no answer_label",
                self.group.prompt_id
            )));
        }
        Ok(())
    }

    /// Votes over the first `k` samples.
    pub fn vote_prefix(&self, k: usize) -> Result<VoteResult> {
        let labels: Vec<&str> = self.group.responses[..k]
            .iter()
            .map(|r| r.answer_label.as_deref().unwrap_or_default())
            .collect();
        let vote = majority_vote(&labels)?;
        Ok(match &self.ground_truth {
            Some(truth) => vote.judge(truth),
            None => {
                let correct = self.group.responses[..k]
                    .iter()
                    .find(|r| r.answer_label.as_deref() == Some(vote.winning_label.as_str()))
                    .is_some_and(|r| r.correct);
                VoteResult {
                    is_correct: Some(correct),
                    ..vote
                }
            }
        })
    }
}

/// Number of leading samples whose cumulative length fits in `budget`.
pub fn affordable_prefix(group: &RolloutGroup, budget: u64) -> usize {
    let mut spent: u64 = 0;
    let mut k = 0;
    for r in &group.responses {
        match spent.checked_add(r.length) {
            Some(total) if total <= budget => {
                spent = total;
                k += 1;
            }
            _ => break,
        }
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub budget: u64,
    pub micro_avg_accuracy: f64,
    pub mean_samples_used: f64,
}

/// Voting accuracy per per-prompt token budget.
///
/// Each prompt spends the budget on its samples in stored order; a prompt
/// that cannot afford a single sample scores 0.
pub fn scaling_curve(prompts: &[VotingPrompt], budgets: &[u64]) -> Result<Vec<CurvePoint>> {
    if prompts.is_empty() {
        return Err(Error::invalid("scaling curve needs at least one prompt"));
    }
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("budgets must be in ascending order"));
    }
    for p in prompts {
        p.validate()?;
    }
    let n = prompts.len() as f64;
    budgets
        .iter()
        .map(|&budget| {
            let mut correct = 0usize;
            let mut used = 0usize;
            for p in prompts {
                let k = affordable_prefix(&p.group, budget);
                used += k;
                if k > 0 && p.vote_prefix(k)?.is_correct == Some(true) {
                    correct += 1;
                }
            }
            Ok(CurvePoint {
                budget,
                micro_avg_accuracy: correct as f64 / n,
                mean_samples_used: used as f64 / n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rollouts::Response;
    use proptest::prelude::*;

    fn prompt(items: &[(u64, bool, &str)], truth: Option<&str>) -> VotingPrompt {
        VotingPrompt {
            group: RolloutGroup {
                prompt_id: "q".into(),
                responses: items
                    .iter()
                    .map(|&(l, c, a)| Response::labeled(l, c, a))
                    .collect(),
            },
            ground_truth: truth.map(str::to_owned),
        }
    }

    #[test]
    fn vote_examples() {
        let v = majority_vote(&["A", "A", "B"]).unwrap();
        assert_eq!(
            (v.winning_label.as_str(), v.winning_count, v.total),
            ("A", 2, 3)
        );
        assert_eq!(majority_vote(&["A", "B"]).unwrap().winning_label, "A");
        assert_eq!(majority_vote(&["B", "A"]).unwrap().winning_label, "B");
        assert_eq!(majority_vote(&["A"]).unwrap().winning_count, 1);
        assert!(majority_vote::<&str>(&[]).is_err());
        assert_eq!(
            majority_vote(&["x", "y", "y"])
                .unwrap()
                .judge("y")
                .is_correct,
            Some(true)
        );
    }

    #[test]
    fn truth_falls_back_to_correct_flags() {
        let p = prompt(&[(10, false, "7"), (10, true, "8"), (10, true, "8")], None);
        assert_eq!(p.vote_prefix(3).unwrap().is_correct, Some(true));
        assert_eq!(p.vote_prefix(1).unwrap().is_correct, Some(false));
        let p = prompt(
            &[(10, false, "7"), (10, true, "8"), (10, true, "8")],
            Some("7"),
        );
        assert_eq!(p.vote_prefix(3).unwrap().is_correct, Some(false));
    }

    #[test]
    fn budget_examples() {
        let prompts = vec![
            prompt(&[(100, true, "a"), (200, true, "a"), (50, true, "a")], None),
            prompt(
                &[(300, false, "b"), (300, true, "c"), (300, true, "c")],
                None,
            ),
        ];
        let curve = scaling_curve(&prompts, &[0, 99, 100, 300, 10_000]).unwrap();
        assert_eq!(curve[0].micro_avg_accuracy, 0.0);
        assert_eq!(curve[1].micro_avg_accuracy, 0.0);
        assert_eq!(curve[2].micro_avg_accuracy, 0.5);
        assert_eq!(curve[2].mean_samples_used, 0.5);
        assert_eq!(curve[3].micro_avg_accuracy, 0.5);
        // full budget: prompt 2 votes c (2 of 3)
        assert_eq!(curve[4].micro_avg_accuracy, 1.0);
        assert_eq!(curve[4].mean_samples_used, 3.0);
    }

    #[test]
    fn curve_validation() {
        let good = prompt(&[(1, true, "a")], None);
        assert!(scaling_curve(&[], &[1]).is_err());
        assert!(scaling_curve(std::slice::from_ref(&good), &[5, 1]).is_err());
        let mut unlabeled = good;
        unlabeled.group.responses[0].answer_label = None;
        assert!(scaling_curve(&[unlabeled], &[1]).is_err());
    }

    proptest! {
        #[test]
        fn winner_count_bounds(labels in prop::collection::vec(0u8..5, 1..40)) {
            let labels: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
            let v = majority_vote(&labels).unwrap();
            let mut distinct = labels.clone();
            distinct.sort();
            distinct.dedup();
            prop_assert!(v.winning_count <= v.total);
            prop_assert!(v.winning_count * distinct.len() >= v.total);
            prop_assert_eq!(labels.iter().filter(|l| **l == v.winning_label).count(), v.winning_count);
        }

        #[test]
        fn relabeling_preserves_winner(labels in prop::collection::vec(0u8..5, 1..40), shift in 1u8..5) {
            let a: Vec<String> = labels.iter().map(|l| format!("L{l}")).collect();
            let b: Vec<String> = labels.iter().map(|l| format!("M{}", (l + shift) % 5)).collect();
            let va = majority_vote(&a).unwrap();
            let vb = majority_vote(&b).unwrap();
            let l: u8 = va.winning_label[1..].parse().unwrap();
            prop_assert_eq!(vb.winning_label, format!("M{}", (l + shift) % 5));
            prop_assert_eq!(va.winning_count, vb.winning_count);
        }
    }
}
