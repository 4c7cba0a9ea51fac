//! Exact sampling by independent Bernoulli draws, one per dyad.
//!
//! Randomness is keyed rather than sequential: graph `k` reads ChaCha8 stream
//! `k` under the configured seed, and dyad `d` consumes words `2d, 2d+1` of
//! that stream. Any graph (or any dyad of a graph) can therefore be produced
//! independently of the others, and the output does not depend on the order
//! or the thread the draws happen on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
}

impl SampleConfig {
    pub fn new(seed: u64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Precondition("sample count must be at least 1".into()));
        }
        Ok(Self { seed, count })
    }
}

/// Draws graph number `index` of the keyed sequence.
pub fn sample_one(probabilities: &[f64], n: usize, directed: bool, seed: u64, index: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let bits = probabilities
        .iter()
        .map(|&p| rng.random::<f64>() < p)
        .collect();
    Graph::from_dyad_bits(n, directed, bits).expect("probability vector has one entry per dyad")
}

/// Draws `cfg.count` independent graphs from `m` on `n` nodes.
pub fn sample(m: &ModelSpec, n: usize, cfg: &SampleConfig) -> Result<Vec<Graph>> {
    if cfg.count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let logits = m.logits(n)?;
    let p = logits.probabilities();
    Ok((0..cfg.count as u64)
        .map(|k| sample_one(&p, n, logits.is_directed(), cfg.seed, k))
        .collect())
}

/// Per-dyad mean of the adjacency bits.
pub fn empirical_dyad_frequencies(samples: &[Graph]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Precondition("no samples".into()))?;
    let mut counts = vec![0usize; first.dyad_count()];
    for g in samples {
        if g.n() != first.n() || g.is_directed() != first.is_directed() {
            return Err(Error::Precondition(
                "samples differ in node count or directedness".into(),
            ));
        }
        for (c, &b) in counts.iter_mut().zip(g.dyad_bits()) {
            *c += usize::from(b);
        }
    }
    let total = samples.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}
