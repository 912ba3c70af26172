//! Mutation strategies coupling a pairwise predictor to evolution:
//! vanilla, predictor-based adaptive mutation (PAM), its re-tournament
//! variant (PAM-RT), and Max-Pairwise list scoring, plus the
//! epsilon/min-data gate that decides which one runs on a given step.

use crate::evolution::{tournament_select, PopulationBuffer};
use crate::graph::ProgramGraph;
use crate::predictor::PairPredictor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyKind {
    Vanilla,
    Pam,
    PamRt,
    MaxPairwise,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Vanilla => "vanilla",
            StrategyKind::Pam => "pam",
            StrategyKind::PamRt => "pam-rt",
            StrategyKind::MaxPairwise => "max-pairwise",
        }
    }

    pub fn from_str(s: &str) -> Option<StrategyKind> {
        Some(match s {
            "vanilla" => StrategyKind::Vanilla,
            "pam" => StrategyKind::Pam,
            "pam-rt" => StrategyKind::PamRt,
            "max-pairwise" => StrategyKind::MaxPairwise,
            _ => return None,
        })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Max attempts K for the adaptive-mutation retry loop.
    pub max_attempts: u32,
    /// Probability of using the vanilla mutator on a predictor step.
    pub epsilon: f64,
    /// Children generated per step by Max-Pairwise.
    pub pairwise_list_size: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::PamRt,
            max_attempts: 64,
            epsilon: 0.0,
            pairwise_list_size: 64,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_attempts < 1 {
            return Err("max_attempts must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err("epsilon must be in [0, 1]".into());
        }
        if self.pairwise_list_size < 2 {
            return Err("pairwise_list_size must be at least 2".into());
        }
        Ok(())
    }
}

/// What a strategy produced on one step, with instrumentation.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub child: ProgramGraph,
    /// Fitness of the parent that produced the returned child.
    pub parent_fitness: f64,
    pub attempts_used: u32,
    /// Whether the final child was accepted by the model (false on
    /// attempt exhaustion and for the vanilla strategy).
    pub accepted_by_model: bool,
    /// Number of pairwise predictor calls made.
    pub predictor_queries: u64,
}

/// Plain mutation of a tournament winner; no predictor involvement.
pub fn vanilla<M>(
    pop: &PopulationBuffer,
    mutator: &mut M,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> StrategyOutcome
where
    M: FnMut(&ProgramGraph, &mut ChaCha8Rng) -> ProgramGraph,
{
    let parent = tournament_select(pop, t, rng);
    let child = mutator(&parent.graph, rng);
    StrategyOutcome {
        child,
        parent_fitness: parent.fitness,
        attempts_used: 1,
        accepted_by_model: false,
        predictor_queries: 0,
    }
}

/// Adaptive mutation with re-tournament: select, mutate, and accept iff
/// the predictor scores the child above the parent; a rejection retries
/// the whole cycle with a fresh tournament. The final child is returned
/// whether or not it was accepted within `k` attempts.
pub fn pam_rt<M>(
    pop: &PopulationBuffer,
    predictor: &mut dyn PairPredictor,
    mutator: &mut M,
    t: usize,
    k: u32,
    rng: &mut ChaCha8Rng,
) -> StrategyOutcome
where
    M: FnMut(&ProgramGraph, &mut ChaCha8Rng) -> ProgramGraph,
{
    assert!(k >= 1, "max attempts must be at least 1");
    let mut attempts = 0u32;
    let mut accept = false;
    let mut child: Option<ProgramGraph> = None;
    let mut parent_fitness = f64::NAN;
    while !accept && attempts < k {
        let parent = tournament_select(pop, t, rng);
        let c = mutator(&parent.graph, rng);
        accept = predictor.predict(&c, &parent.graph).probability > 0.5;
        attempts += 1;
        parent_fitness = parent.fitness;
        child = Some(c);
    }
    StrategyOutcome {
        child: child.expect("at least one attempt runs"),
        parent_fitness,
        attempts_used: attempts,
        accepted_by_model: accept,
        predictor_queries: attempts as u64,
    }
}

/// Adaptive mutation with a fixed parent: the tournament runs once and
/// every retry mutates the same parent.
pub fn pam<M>(
    pop: &PopulationBuffer,
    predictor: &mut dyn PairPredictor,
    mutator: &mut M,
    t: usize,
    k: u32,
    rng: &mut ChaCha8Rng,
) -> StrategyOutcome
where
    M: FnMut(&ProgramGraph, &mut ChaCha8Rng) -> ProgramGraph,
{
    assert!(k >= 1, "max attempts must be at least 1");
    let parent = tournament_select(pop, t, rng);
    let mut attempts = 0u32;
    let mut accept = false;
    let mut child: Option<ProgramGraph> = None;
    while !accept && attempts < k {
        let c = mutator(&parent.graph, rng);
        accept = predictor.predict(&c, &parent.graph).probability > 0.5;
        attempts += 1;
        child = Some(c);
    }
    StrategyOutcome {
        child: child.expect("at least one attempt runs"),
        parent_fitness: parent.fitness,
        attempts_used: attempts,
        accepted_by_model: accept,
        predictor_queries: attempts as u64,
    }
}

/// Generate a list of children from one parent and keep the one with the
/// highest pairwise score against the others; votes are the sign of the
/// logit and ties resolve to the lowest index.
pub fn max_pairwise<M>(
    pop: &PopulationBuffer,
    predictor: &mut dyn PairPredictor,
    mutator: &mut M,
    t: usize,
    list_size: usize,
    rng: &mut ChaCha8Rng,
) -> StrategyOutcome
where
    M: FnMut(&ProgramGraph, &mut ChaCha8Rng) -> ProgramGraph,
{
    assert!(list_size >= 2, "pairwise list needs at least two children");
    let parent = tournament_select(pop, t, rng);
    let children: Vec<ProgramGraph> =
        (0..list_size).map(|_| mutator(&parent.graph, rng)).collect();

    let mut scores = vec![0i64; list_size];
    let mut queries = 0u64;
    for i in 0..list_size {
        for j in 0..list_size {
            if i == j {
                continue;
            }
            scores[i] += predictor.predict(&children[i], &children[j]).vote() as i64;
            queries += 1;
        }
    }
    let mut best = 0;
    for i in 1..list_size {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    StrategyOutcome {
        child: children[best].clone(),
        parent_fitness: parent.fitness,
        attempts_used: 1,
        accepted_by_model: true,
        predictor_queries: queries,
    }
}

/// Which strategy runs this step: the vanilla mutator with probability
/// epsilon or while too few samples have been taken, otherwise the
/// configured predictor strategy. The epsilon draw is consumed on every
/// predictor-strategy step.
pub fn select_strategy(
    config: &StrategyConfig,
    samples: u64,
    min_data: u64,
    rng: &mut ChaCha8Rng,
) -> StrategyKind {
    if config.kind == StrategyKind::Vanilla {
        return StrategyKind::Vanilla;
    }
    let explore = rng.gen::<f64>() < config.epsilon;
    if explore || samples < min_data {
        StrategyKind::Vanilla
    } else {
        config.kind
    }
}
