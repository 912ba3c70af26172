//! Regularized evolution: a bounded FIFO population with aging,
//! tournament selection, the evaluation pipeline and functional
//! equivalence caching.

use crate::graph::{output_digest_exact, ProgramGraph};
use crate::strategies::StrategyOutcome;
use crate::symreg::SymRegTask;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

/// An evaluated candidate plus step bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub graph: ProgramGraph,
    pub fitness: f64,
    pub parent_fitness: Option<f64>,
    /// Global evaluation order (initial population included).
    pub sample_index: u64,
    pub attempts_used: u32,
    pub fec_hit: bool,
}

/// Bounded FIFO of candidates. Insertion beyond capacity evicts the
/// oldest member (aging).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PopulationBuffer {
    queue: VecDeque<Candidate>,
    capacity: usize,
}

impl PopulationBuffer {
    pub fn new(capacity: usize) -> PopulationBuffer {
        assert!(capacity >= 1, "population capacity must be at least 1");
        PopulationBuffer { queue: VecDeque::with_capacity(capacity + 1), capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() == self.capacity
    }

    /// Members oldest first; index order is insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.queue.iter()
    }

    pub fn get(&self, index: usize) -> &Candidate {
        &self.queue[index]
    }

    /// Append, evicting and returning the oldest member when full.
    pub fn push(&mut self, candidate: Candidate) -> Option<Candidate> {
        self.queue.push_back(candidate);
        if self.queue.len() > self.capacity {
            self.queue.pop_front()
        } else {
            None
        }
    }

    pub fn best_fitness(&self) -> f64 {
        self.queue.iter().map(|c| c.fitness).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Functional-equivalence cache: exact output-vector digest to stored
/// fitness. A hit returns the fitness bitwise-equal to the value first
/// stored, and because keys only collapse numerically identical output
/// vectors, enabling the cache cannot change the search trajectory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FecCache {
    map: BTreeMap<u64, f64>,
    pub hits: u64,
    pub misses: u64,
}

impl FecCache {
    pub fn new() -> FecCache {
        FecCache::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Tournament selection: draw `t` members uniformly with replacement and
/// return the fittest, ties broken by most recent insertion.
///
/// Panics if the population is empty or `t` is zero (usage errors).
pub fn tournament_select<'p>(
    pop: &'p PopulationBuffer,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> &'p Candidate {
    assert!(!pop.is_empty(), "tournament over an empty population");
    assert!(t >= 1, "tournament size must be at least 1");
    let mut best: Option<(f64, usize)> = None;
    for _ in 0..t {
        let idx = rng.gen_range(0..pop.len());
        let fit = pop.get(idx).fitness;
        let better = match best {
            None => true,
            Some((bf, bi)) => fit > bf || (fit == bf && idx > bi),
        };
        if better {
            best = Some((fit, idx));
        }
    }
    let (_, idx) = best.expect("t >= 1 draws at least one member");
    pop.get(idx)
}

/// Evaluate a child graph, consulting the functional-equivalence cache
/// when one is supplied.
pub fn evaluate(
    child: ProgramGraph,
    task: &SymRegTask,
    fec: Option<&mut FecCache>,
    sample_index: u64,
) -> Candidate {
    let outputs = task.outputs(&child);
    let key = output_digest_exact(&outputs);
    let (fitness, fec_hit) = match fec {
        Some(cache) => match cache.map.get(&key) {
            Some(&stored) => {
                cache.hits += 1;
                (stored, true)
            }
            None => {
                cache.misses += 1;
                let fitness = task.fitness_of_outputs(&outputs).fitness;
                cache.map.insert(key, fitness);
                (fitness, false)
            }
        },
        None => (task.fitness_of_outputs(&outputs).fitness, false),
    };
    Candidate {
        graph: child,
        fitness,
        parent_fitness: None,
        sample_index,
        attempts_used: 0,
        fec_hit,
    }
}

/// Fill a fresh population with random evaluated candidates.
pub fn init_population(
    task: &SymRegTask,
    capacity: usize,
    rng: &mut ChaCha8Rng,
    mut fec: Option<&mut FecCache>,
) -> PopulationBuffer {
    let mut pop = PopulationBuffer::new(capacity);
    for i in 0..capacity {
        let graph = task.random_graph(rng);
        let candidate = evaluate(graph, task, fec.as_deref_mut(), i as u64);
        pop.push(candidate);
    }
    pop
}

/// One full evolution cycle: the strategy proposes a child, the child is
/// evaluated and appended, and the oldest member is evicted. Returns the
/// child candidate with bookkeeping filled in.
pub fn regevo_step<F>(
    pop: &mut PopulationBuffer,
    task: &SymRegTask,
    fec: Option<&mut FecCache>,
    sample_index: u64,
    propose: F,
    rng: &mut ChaCha8Rng,
) -> Candidate
where
    F: FnOnce(&PopulationBuffer, &mut ChaCha8Rng) -> StrategyOutcome,
{
    assert!(pop.is_full(), "population must be initialized to capacity");
    let outcome = propose(pop, rng);
    let mut candidate = evaluate(outcome.child, task, fec, sample_index);
    candidate.parent_fitness = Some(outcome.parent_fitness);
    candidate.attempts_used = outcome.attempts_used;
    pop.push(candidate.clone());
    candidate
}
