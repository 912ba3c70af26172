//! Simulated predictors of controllable accuracy, built on a ground-truth
//! fitness lookup.

use super::{BinaryScore, PairPredictor};
use crate::graph::ProgramGraph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// The ground-truth pairwise ordering under strict comparison — an
/// exact fitness tie means the first candidate is not better — flipped
/// with probability `1 - accuracy`. The returned probability is exactly
/// 1.0 or 0.0.
pub fn noisy_oracle_predict<F>(
    fitness_of: F,
    accuracy: f64,
    first: &ProgramGraph,
    second: &ProgramGraph,
    rng: &mut ChaCha8Rng,
) -> BinaryScore
where
    F: Fn(&ProgramGraph) -> f64,
{
    debug_assert!((0.5..=1.0).contains(&accuracy), "accuracy must be in [0.5, 1]");
    let truth = fitness_of(first) > fitness_of(second);
    let flip = rng.gen::<f64>() < 1.0 - accuracy;
    let verdict = truth != flip;
    if verdict {
        BinaryScore { logit: f64::INFINITY, probability: 1.0 }
    } else {
        BinaryScore { logit: f64::NEG_INFINITY, probability: 0.0 }
    }
}

/// A [`PairPredictor`] wrapping [`noisy_oracle_predict`] with its own
/// randomness stream. An accuracy of 1.0 is the perfect oracle.
pub struct NoisyOracle<F> {
    pub accuracy: f64,
    fitness_of: F,
    rng: ChaCha8Rng,
}

impl<F> NoisyOracle<F>
where
    F: Fn(&ProgramGraph) -> f64,
{
    pub fn new(accuracy: f64, fitness_of: F, rng: ChaCha8Rng) -> NoisyOracle<F> {
        assert!((0.5..=1.0).contains(&accuracy), "accuracy must be in [0.5, 1]");
        NoisyOracle { accuracy, fitness_of, rng }
    }

    /// Hand the stream back (for state snapshots).
    pub fn into_rng(self) -> ChaCha8Rng {
        self.rng
    }
}

impl<F> PairPredictor for NoisyOracle<F>
where
    F: Fn(&ProgramGraph) -> f64,
{
    fn predict(&mut self, first: &ProgramGraph, second: &ProgramGraph) -> BinaryScore {
        noisy_oracle_predict(&self.fitness_of, self.accuracy, first, second, &mut self.rng)
    }
}
