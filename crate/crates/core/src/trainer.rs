//! The online training loop coupling evolution to the predictor: replay
//! buffer, pair construction, the training schedule, and the resumable
//! experiment state machine.
//!
//! Each step runs one iteration of the single-process online procedure:
//! pick vanilla or the predictor strategy (epsilon / min-data gate),
//! produce and evaluate a child, train the model every `frequency` steps,
//! then append the child to the replay and population buffers with FIFO
//! eviction. Every randomness consumer draws from its own named stream,
//! so training never perturbs the mutation sequence.

use crate::config::{ExperimentConfig, PredictorMode};
use crate::evolution::{self, Candidate, FecCache, PopulationBuffer};
use crate::graph::ProgramGraph;
use crate::predictor::{
    AdamState, CachedPairScorer, EmbedCache, HeadKind, NoisyOracle, PredictorModel, TrainError,
};
use crate::rng::{self, stream_rng, Stream, StreamPos};
use crate::strategies::{self, StrategyKind};
use crate::symreg::{mutate_graph, SymRegTask};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Bounded FIFO of evaluated candidates feeding predictor training.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayBuffer {
    records: VecDeque<(ProgramGraph, f64)>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity >= 1, "replay capacity must be at least 1");
        ReplayBuffer { records: VecDeque::with_capacity(capacity + 1), capacity }
    }

    pub fn push(&mut self, graph: ProgramGraph, fitness: f64) {
        self.records.push_back((graph, fitness));
        if self.records.len() > self.capacity {
            self.records.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &(ProgramGraph, f64) {
        &self.records[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ProgramGraph, f64)> {
        self.records.iter()
    }
}

/// When and how much the predictor trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSchedule {
    /// Train every `frequency` samples.
    pub frequency: u64,
    pub epochs_per_trigger: u32,
    /// Steps before the predictor strategy may be used.
    pub min_data: u64,
    pub batch_size: usize,
    /// Replay buffer capacity.
    pub replay_capacity: usize,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            frequency: 100,
            epochs_per_trigger: 10,
            min_data: 100,
            batch_size: 64,
            replay_capacity: 10_000,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<(), String> {
        if self.frequency < 1 {
            return Err("training frequency must be at least 1".into());
        }
        if self.epochs_per_trigger < 1 {
            return Err("epochs_per_trigger must be at least 1".into());
        }
        if self.batch_size < 1 {
            return Err("batch_size must be at least 1".into());
        }
        if self.replay_capacity < 1 {
            return Err("replay_capacity must be at least 1".into());
        }
        Ok(())
    }
}

/// One epoch's labeled pairs: two independent shuffles of the buffer are
/// zipped positionally; pairs with the same record or exactly equal
/// fitness are dropped. Labels are 1.0 when the first record's fitness is
/// strictly higher. Returns an empty list for degenerate buffers.
pub fn make_epoch_pairs(buffer: &ReplayBuffer, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, f64)> {
    let n = buffer.len();
    if n < 2 {
        return Vec::new();
    }
    let mut left: Vec<usize> = (0..n).collect();
    let mut right: Vec<usize> = (0..n).collect();
    left.shuffle(rng);
    right.shuffle(rng);

    let mut pairs = Vec::with_capacity(n);
    for (a, b) in left.into_iter().zip(right) {
        if a == b {
            continue;
        }
        let fa = buffer.get(a).1;
        let fb = buffer.get(b).1;
        if fa == fb {
            continue;
        }
        pairs.push((a, b, if fa > fb { 1.0 } else { 0.0 }));
    }
    pairs
}

/// Per-step log record; the run CSV columns mirror these fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub sample_index: u64,
    pub child_fitness: f64,
    pub parent_fitness: f64,
    pub best_fitness: f64,
    pub attempts_used: u32,
    pub predictor_queries: u64,
    pub fec_hit: bool,
    pub cumulative_hill_climb_rate: f64,
    pub structural_hash: u64,
}

/// Aggregated result of a run.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub steps: Vec<StepRecord>,
    pub best_fitness: f64,
    pub best_graph: ProgramGraph,
    pub evaluations: u64,
    pub fec_hits: u64,
    pub train_triggers: u64,
    pub train_batches: u64,
    pub train_skipped: u64,
    pub predictor_queries: u64,
}

/// Resumable snapshot of a run in progress (model parameters included).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSnapshot {
    pub samples: u64,
    pub best_fitness: f64,
    pub best_graph: String,
    pub improvements: u64,
    pub evaluations: u64,
    pub train_triggers: u64,
    pub train_batches: u64,
    pub train_skipped: u64,
    pub predictor_queries: u64,
    pub population: Vec<Candidate>,
    pub replay: Vec<(ProgramGraph, f64)>,
    pub fec: Option<FecCache>,
    pub model_params: Option<Vec<f64>>,
    pub adam: Option<AdamState>,
    pub evolution_pos: StreamPos,
    pub gate_pos: StreamPos,
    pub train_pos: StreamPos,
    pub oracle_pos: StreamPos,
}

/// Live state of one experiment; `step` advances it by one sample.
pub struct ExperimentState {
    config: ExperimentConfig,
    task: SymRegTask,
    pop: PopulationBuffer,
    replay: ReplayBuffer,
    fec: Option<FecCache>,
    model: Option<PredictorModel>,
    adam: Option<AdamState>,
    embed_cache: EmbedCache,
    evo_rng: ChaCha8Rng,
    gate_rng: ChaCha8Rng,
    train_rng: ChaCha8Rng,
    oracle_rng: ChaCha8Rng,
    samples: u64,
    best_fitness: f64,
    best_graph: ProgramGraph,
    improvements: u64,
    evaluations: u64,
    train_triggers: u64,
    train_batches: u64,
    train_skipped: u64,
    predictor_queries: u64,
}

impl ExperimentState {
    pub fn new(config: &ExperimentConfig) -> ExperimentState {
        config.validate().expect("invalid experiment configuration");
        let task = SymRegTask::new(config.task, config.seed);
        let mut fec = if config.fec { Some(FecCache::new()) } else { None };

        let mut init_rng = stream_rng(config.seed, Stream::InitPopulation, 0);
        let pop =
            evolution::init_population(&task, config.population_size, &mut init_rng, fec.as_mut());

        // Seed the replay buffer with the initial population so the first
        // training trigger has data.
        let mut replay = ReplayBuffer::new(config.schedule.replay_capacity);
        for c in pop.iter() {
            replay.push(c.graph.clone(), c.fitness);
        }

        let (model, adam) = if config.predictor_mode.is_learned() {
            let mut mrng = stream_rng(config.seed, Stream::ModelInit, 0);
            let model = PredictorModel::new(config.encoder, HeadKind::Binary, &mut mrng);
            let adam = AdamState::new(model.param_count());
            (Some(model), Some(adam))
        } else {
            (None, None)
        };

        let (best_fitness, best_graph) = pop
            .iter()
            .map(|c| (c.fitness, &c.graph))
            .max_by(|a, b| a.0.partial_cmp(&b.0).expect("fitness is finite"))
            .map(|(f, g)| (f, g.clone()))
            .expect("population is non-empty");
        let evaluations = match &fec {
            Some(cache) => cache.misses,
            None => config.population_size as u64,
        };
        let fec_ref = fec;

        ExperimentState {
            task,
            pop,
            replay,
            fec: fec_ref,
            model,
            adam,
            embed_cache: EmbedCache::default(),
            evo_rng: stream_rng(config.seed, Stream::Evolution, 0),
            gate_rng: stream_rng(config.seed, Stream::Gate, 0),
            train_rng: stream_rng(config.seed, Stream::Training, 0),
            oracle_rng: stream_rng(config.seed, Stream::Oracle, 0),
            samples: 0,
            best_fitness,
            best_graph,
            improvements: 0,
            evaluations,
            train_triggers: 0,
            train_batches: 0,
            train_skipped: 0,
            predictor_queries: 0,
            config: config.clone(),
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn task(&self) -> &SymRegTask {
        &self.task
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn is_done(&self) -> bool {
        self.samples >= self.config.total_samples
    }

    pub fn population(&self) -> &PopulationBuffer {
        &self.pop
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn fec(&self) -> Option<&FecCache> {
        self.fec.as_ref()
    }

    pub fn model(&self) -> Option<&PredictorModel> {
        self.model.as_ref()
    }

    pub fn model_mut(&mut self) -> Option<&mut PredictorModel> {
        self.embed_cache = EmbedCache::default();
        self.model.as_mut()
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_fitness
    }

    pub fn best_graph(&self) -> &ProgramGraph {
        &self.best_graph
    }

    /// One iteration: choose a strategy, produce and evaluate a child,
    /// maybe train, insert, advance the counter.
    pub fn step(&mut self) -> StepRecord {
        assert!(!self.is_done(), "run already consumed its sample budget");
        let step_index = self.samples;

        let min_data = if self.config.predictor_mode.is_learned() {
            self.config.schedule.min_data
        } else {
            // Oracles need no training data.
            0
        };
        let effective =
            strategies::select_strategy(&self.config.strategy, step_index, min_data, &mut self.gate_rng);
        let outcome = self.run_strategy(effective);
        self.predictor_queries += outcome.predictor_queries;

        let mut candidate = evolution::evaluate(
            outcome.child,
            &self.task,
            self.fec.as_mut(),
            self.config.population_size as u64 + step_index,
        );
        candidate.parent_fitness = Some(outcome.parent_fitness);
        candidate.attempts_used = outcome.attempts_used;
        if candidate.fec_hit {
            // hit counter lives in the cache
        } else {
            self.evaluations += 1;
        }

        if self.config.predictor_mode.is_learned() && step_index % self.config.schedule.frequency == 0
        {
            self.run_training_trigger();
        }

        self.replay.push(candidate.graph.clone(), candidate.fitness);
        if candidate.fitness > self.best_fitness {
            self.best_fitness = candidate.fitness;
            self.best_graph = candidate.graph.clone();
        }
        if candidate.fitness > outcome.parent_fitness {
            self.improvements += 1;
        }
        let record = StepRecord {
            sample_index: step_index,
            child_fitness: candidate.fitness,
            parent_fitness: outcome.parent_fitness,
            best_fitness: self.best_fitness,
            attempts_used: outcome.attempts_used,
            predictor_queries: outcome.predictor_queries,
            fec_hit: candidate.fec_hit,
            cumulative_hill_climb_rate: self.improvements as f64 / (step_index + 1) as f64,
            structural_hash: candidate.graph.structural_hash(),
        };
        self.pop.push(candidate);
        self.samples += 1;
        record
    }

    fn run_strategy(&mut self, effective: StrategyKind) -> strategies::StrategyOutcome {
        let t = self.config.tournament_size;
        let k = self.config.strategy.max_attempts;
        let list = self.config.strategy.pairwise_list_size;
        let mut mutator = |g: &ProgramGraph, r: &mut ChaCha8Rng| mutate_graph(g, r);

        match effective {
            StrategyKind::Vanilla => {
                strategies::vanilla(&self.pop, &mut mutator, t, &mut self.evo_rng)
            }
            predictor_kind => match self.config.predictor_mode {
                PredictorMode::Learned => {
                    let model = self.model.as_ref().expect("learned mode carries a model");
                    let cache = std::mem::take(&mut self.embed_cache);
                    let mut scorer = CachedPairScorer::with_cache(model, cache);
                    let out = dispatch(
                        predictor_kind,
                        &self.pop,
                        &mut scorer,
                        &mut mutator,
                        t,
                        k,
                        list,
                        &mut self.evo_rng,
                    );
                    self.embed_cache = scorer.into_cache();
                    out
                }
                PredictorMode::NoisyOracle { .. } | PredictorMode::PerfectOracle => {
                    let acc = self.config.predictor_mode.oracle_accuracy().expect("oracle mode");
                    let task = self.task.clone();
                    let rng = std::mem::replace(
                        &mut self.oracle_rng,
                        stream_rng(0, Stream::Oracle, u64::MAX),
                    );
                    let mut oracle =
                        NoisyOracle::new(acc, move |g: &ProgramGraph| task.fitness(g).fitness, rng);
                    let out = dispatch(
                        predictor_kind,
                        &self.pop,
                        &mut oracle,
                        &mut mutator,
                        t,
                        k,
                        list,
                        &mut self.evo_rng,
                    );
                    self.oracle_rng = oracle.into_rng();
                    out
                }
            },
        }
    }

    fn run_training_trigger(&mut self) {
        let (Some(model), Some(adam)) = (self.model.as_mut(), self.adam.as_mut()) else {
            return;
        };
        self.train_triggers += 1;
        let stats = run_train_trigger(
            model,
            adam,
            &self.config.adam,
            &self.config.schedule,
            &self.replay,
            &mut self.train_rng,
        );
        self.train_batches += stats.batches;
        self.train_skipped += stats.skipped;
        if stats.batches > 0 {
            // Parameters moved; cached embeddings are stale.
            self.embed_cache = EmbedCache::default();
        }
    }

    /// Run to the configured sample budget, collecting the full log.
    pub fn run_to_end(&mut self) -> RunLog {
        let mut steps = Vec::with_capacity((self.config.total_samples - self.samples) as usize);
        while !self.is_done() {
            steps.push(self.step());
        }
        self.log_with(steps)
    }

    fn log_with(&self, steps: Vec<StepRecord>) -> RunLog {
        RunLog {
            steps,
            best_fitness: self.best_fitness,
            best_graph: self.best_graph.clone(),
            evaluations: self.evaluations,
            fec_hits: self.fec.as_ref().map(|c| c.hits).unwrap_or(0),
            train_triggers: self.train_triggers,
            train_batches: self.train_batches,
            train_skipped: self.train_skipped,
            predictor_queries: self.predictor_queries,
        }
    }

    /// Counter totals without the per-step log.
    pub fn counters(&self) -> RunLog {
        self.log_with(Vec::new())
    }

    pub fn snapshot(&self) -> ExperimentSnapshot {
        ExperimentSnapshot {
            samples: self.samples,
            best_fitness: self.best_fitness,
            best_graph: self.best_graph.serialize(),
            improvements: self.improvements,
            evaluations: self.evaluations,
            train_triggers: self.train_triggers,
            train_batches: self.train_batches,
            train_skipped: self.train_skipped,
            predictor_queries: self.predictor_queries,
            population: self.pop.iter().cloned().collect(),
            replay: self.replay.iter().cloned().collect(),
            fec: self.fec.clone(),
            model_params: self.model.as_ref().map(|m| m.params().to_vec()),
            adam: self.adam.clone(),
            evolution_pos: rng::save_pos(&self.evo_rng),
            gate_pos: rng::save_pos(&self.gate_rng),
            train_pos: rng::save_pos(&self.train_rng),
            oracle_pos: rng::save_pos(&self.oracle_rng),
        }
    }

    /// Rebuild a state from a snapshot taken under the same config.
    pub fn restore(config: &ExperimentConfig, snap: &ExperimentSnapshot) -> ExperimentState {
        config.validate().expect("invalid experiment configuration");
        let task = SymRegTask::new(config.task, config.seed);
        let mut pop = PopulationBuffer::new(config.population_size);
        for c in &snap.population {
            pop.push(c.clone());
        }
        let mut replay = ReplayBuffer::new(config.schedule.replay_capacity);
        for (g, f) in &snap.replay {
            replay.push(g.clone(), *f);
        }
        let model = snap.model_params.as_ref().map(|params| {
            PredictorModel::from_params(config.encoder, HeadKind::Binary, params.clone())
                .expect("snapshot parameters fit the configured encoder")
        });
        let best_graph =
            ProgramGraph::deserialize(&snap.best_graph).expect("snapshot best graph parses");
        let seed = config.seed;
        ExperimentState {
            task,
            pop,
            replay,
            fec: snap.fec.clone(),
            model,
            adam: snap.adam.clone(),
            embed_cache: EmbedCache::default(),
            evo_rng: rng::restore(seed, Stream::Evolution, 0, snap.evolution_pos),
            gate_rng: rng::restore(seed, Stream::Gate, 0, snap.gate_pos),
            train_rng: rng::restore(seed, Stream::Training, 0, snap.train_pos),
            oracle_rng: rng::restore(seed, Stream::Oracle, 0, snap.oracle_pos),
            samples: snap.samples,
            best_fitness: snap.best_fitness,
            best_graph,
            improvements: snap.improvements,
            evaluations: snap.evaluations,
            train_triggers: snap.train_triggers,
            train_batches: snap.train_batches,
            train_skipped: snap.train_skipped,
            predictor_queries: snap.predictor_queries,
            config: config.clone(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dispatch<M>(
    kind: StrategyKind,
    pop: &PopulationBuffer,
    predictor: &mut dyn crate::predictor::PairPredictor,
    mutator: &mut M,
    t: usize,
    k: u32,
    list: usize,
    rng: &mut ChaCha8Rng,
) -> strategies::StrategyOutcome
where
    M: FnMut(&ProgramGraph, &mut ChaCha8Rng) -> ProgramGraph,
{
    match kind {
        StrategyKind::Vanilla => strategies::vanilla(pop, mutator, t, rng),
        StrategyKind::Pam => strategies::pam(pop, predictor, mutator, t, k, rng),
        StrategyKind::PamRt => strategies::pam_rt(pop, predictor, mutator, t, k, rng),
        StrategyKind::MaxPairwise => {
            strategies::max_pairwise(pop, predictor, mutator, t, list, rng)
        }
    }
}

/// Convenience wrapper: run a full experiment and return its log.
pub fn online_loop(config: &ExperimentConfig) -> RunLog {
    ExperimentState::new(config).run_to_end()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TriggerStats {
    pub batches: u64,
    pub skipped: u64,
}

/// One training trigger: `epochs_per_trigger` passes of freshly built
/// epoch pairs, batched with mean-reduced loss. Non-finite losses skip
/// the batch rather than halting.
pub fn run_train_trigger(
    model: &mut PredictorModel,
    adam: &mut AdamState,
    hp: &crate::predictor::AdamParams,
    schedule: &TrainSchedule,
    replay: &ReplayBuffer,
    rng: &mut ChaCha8Rng,
) -> TriggerStats {
    let mut stats = TriggerStats::default();
    for _ in 0..schedule.epochs_per_trigger {
        let pairs = make_epoch_pairs(replay, rng);
        if pairs.is_empty() {
            continue;
        }
        for chunk in pairs.chunks(schedule.batch_size) {
            let batch: Vec<(&ProgramGraph, &ProgramGraph, f64)> = chunk
                .iter()
                .map(|&(a, b, label)| (&replay.get(a).0, &replay.get(b).0, label))
                .collect();
            match model.loss_and_grad_pairs(&batch) {
                Ok((_, grad)) => {
                    adam.apply(hp, model.params_mut(), &grad);
                    stats.batches += 1;
                }
                Err(TrainError::NonFiniteLoss(_)) | Err(TrainError::EmptyBatch) => {
                    // Skip the step; evolution must not halt.
                    stats.skipped += 1;
                }
            }
        }
    }
    stats
}
