//! Named, index-addressable random streams derived from one root seed.
//!
//! Every stochastic routine takes its generator from here so that a run is
//! reproducible from a single `u64` and independent pieces of work (problems,
//! Monte Carlo groups, ingested prompts) can be sampled in any order or in
//! parallel without changing the result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Sub-stream names. The string form is what gets hashed into the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Synthetic-policy rollouts during training.
    Sim,
    /// Held-out evaluation rollouts in the simulator.
    Eval,
    /// Dynamic target-length draws.
    Targets,
    /// Distortion Monte Carlo.
    MonteCarlo,
}

impl Stream {
    pub fn name(self) -> &'static str {
        match self {
            Stream::Sim => "sim",
            Stream::Eval => "eval",
            Stream::Targets => "targets",
            Stream::MonteCarlo => "mc",
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `root`, a stream name and a path of indices.
pub fn derive_seed(root: u64, stream: Stream, path: &[u64]) -> u64 {
    // FNV-1a over the stream name keeps the tag stable across builds.
    let mut tag: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.name().bytes() {
        tag ^= u64::from(b);
        tag = tag.wrapping_mul(0x0000_0100_0000_01B3);
    }
    let mut h = splitmix64(root ^ splitmix64(tag));
    for &i in path {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

/// Builds the generator for `(root, stream, path)`.
pub fn stream_rng(root: u64, stream: Stream, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, stream, path))
}
