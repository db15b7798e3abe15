//! Fixtures shared by the benchmarks.

use lengthwise::sim::SimSettings;
use lengthwise::{Response, RolloutGroup};

/// A group of `n` responses with spread-out lengths and mixed outcomes.
pub fn synthetic_group(n: usize) -> RolloutGroup {
    let responses = (0..n)
        .map(|i| {
            let length = 500 + ((i as u64 * 7919) % 9000);
            Response::new(length, i % 3 != 0)
        })
        .collect();
    RolloutGroup {
        prompt_id: format!("bench-{n}"),
        responses,
    }
}

/// Simulator settings sized for a single benchmark iteration.
pub fn small_sim(num_problems: usize, steps: u64) -> SimSettings {
    SimSettings {
        num_problems,
        steps,
        eval_samples: 16,
        ..Default::default()
    }
}
