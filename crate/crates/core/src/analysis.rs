//! Hill-climbing theory and diagnostics: the closed-form acceptance and
//! modified-rate laws with their Monte-Carlo verification, cumulative
//! hill-climb series, counterfactual predictor evaluation, and
//! uniqueness tracking.

use crate::config::ExperimentConfig;
use crate::evolution::{self, tournament_select};
use crate::graph::ProgramGraph;
use crate::predictor::{AdamState, CachedPairScorer, HeadKind, PredictorModel};
use crate::rng::{stream_rng, Stream};
use crate::symreg::{mutate_graph, SymRegTask};
use crate::trainer::{run_train_trigger, ReplayBuffer};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};

/// Natural hill-climb rate q and model accuracy a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillClimbParams {
    pub q: f64,
    pub a: f64,
}

impl HillClimbParams {
    pub fn new(q: f64, a: f64) -> HillClimbParams {
        assert!((0.0..=1.0).contains(&q), "q must be in [0, 1]");
        assert!((0.5..=1.0).contains(&a), "a must be in [0.5, 1]");
        HillClimbParams { q, a }
    }
}

/// Per-attempt acceptance probability: q*a + (1-q)(1-a).
pub fn p_accept(hp: HillClimbParams) -> f64 {
    hp.q * hp.a + (1.0 - hp.q) * (1.0 - hp.a)
}

/// Modified hill-climbing rate of the fixed-parent retry process as
/// attempts grow unbounded: q*a / p_accept. Defined as 0 when no child
/// can ever be accepted (q = 0 with a perfect model).
pub fn modified_rate(hp: HillClimbParams) -> f64 {
    let pa = p_accept(hp);
    if pa == 0.0 {
        return 0.0;
    }
    hp.q * hp.a / pa
}

/// Monte-Carlo of the retry process with independent Bernoulli child
/// quality and prediction correctness, capped at `k` attempts; returns
/// the fraction of trials whose returned child truly improves.
pub fn simulate_modified_rate(
    hp: HillClimbParams,
    k: u32,
    trials: u64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    assert!(trials >= 1);
    assert!(k >= 1);
    let mut improved = 0u64;
    for _ in 0..trials {
        let mut final_improve = false;
        for _ in 0..k {
            let improve = rng.gen::<f64>() < hp.q;
            let correct = rng.gen::<f64>() < hp.a;
            final_improve = improve;
            // The model accepts when it believes the child is better:
            // a correct call on an improvement, or a wrong call on a
            // non-improvement.
            if improve == correct {
                break;
            }
        }
        improved += final_improve as u64;
    }
    improved as f64 / trials as f64
}

/// Running mean of per-step improvement flags.
pub fn cumulative_hill_climb_rate(flags: &[bool]) -> Vec<f64> {
    assert!(!flags.is_empty(), "empty improvement log");
    let mut out = Vec::with_capacity(flags.len());
    let mut count = 0u64;
    for (i, &f) in flags.iter().enumerate() {
        count += f as u64;
        out.push(count as f64 / (i + 1) as f64);
    }
    out
}

/// Scores and ground truth for one counterfactual step.
#[derive(Debug, Clone)]
pub struct CounterfactualRecord {
    pub step: u64,
    pub candidate_scores: Vec<f64>,
    pub candidate_fitnesses: Vec<f64>,
    pub parent_fitness: f64,
}

/// Where counterfactual scores come from. The oracle and random-uniform
/// substitutes bound what any learned model can do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterfactualScorer {
    LearnedOnline,
    PerfectOracle,
    RandomUniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub negatives: u64,
    pub positives: u64,
}

/// Threshold sweep plus score histograms over a counterfactual stream.
#[derive(Debug, Clone)]
pub struct ScoreCurves {
    pub thresholds: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub histogram: Vec<HistogramBin>,
    pub positives: u64,
    pub negatives: u64,
}

pub const THRESHOLD_COUNT: usize = 101;
pub const HISTOGRAM_BINS: usize = 50;

/// Streaming accumulator behind [`ScoreCurves`].
#[derive(Debug, Clone)]
pub struct CurveAccumulator {
    thresholds: Vec<f64>,
    // Difference arrays: entry i counts scores whose predicted-positive
    // range covers thresholds[..i].
    tp_diff: Vec<i64>,
    fp_diff: Vec<i64>,
    hist_pos: Vec<u64>,
    hist_neg: Vec<u64>,
    positives: u64,
    negatives: u64,
}

impl Default for CurveAccumulator {
    fn default() -> Self {
        CurveAccumulator {
            thresholds: (0..THRESHOLD_COUNT).map(|i| i as f64 / 100.0).collect(),
            tp_diff: vec![0; THRESHOLD_COUNT + 1],
            fp_diff: vec![0; THRESHOLD_COUNT + 1],
            hist_pos: vec![0; HISTOGRAM_BINS],
            hist_neg: vec![0; HISTOGRAM_BINS],
            positives: 0,
            negatives: 0,
        }
    }
}

impl CurveAccumulator {
    pub fn add(&mut self, score: f64, positive: bool) {
        // Predicted positive at threshold t iff score > t; count how many
        // of the grid thresholds that covers.
        let covered = self.thresholds.partition_point(|&t| t < score);
        let bin = ((score * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        if positive {
            self.positives += 1;
            self.tp_diff[0] += 1;
            self.tp_diff[covered] -= 1;
            self.hist_pos[bin] += 1;
        } else {
            self.negatives += 1;
            self.fp_diff[0] += 1;
            self.fp_diff[covered] -= 1;
            self.hist_neg[bin] += 1;
        }
    }

    pub fn finish(&self) -> ScoreCurves {
        let total = (self.positives + self.negatives) as f64;
        let mut accuracy = Vec::with_capacity(THRESHOLD_COUNT);
        let mut precision = Vec::with_capacity(THRESHOLD_COUNT);
        let mut recall = Vec::with_capacity(THRESHOLD_COUNT);
        let mut tp_run = 0i64;
        let mut fp_run = 0i64;
        for i in 0..THRESHOLD_COUNT {
            tp_run += self.tp_diff[i];
            fp_run += self.fp_diff[i];
            let tp = tp_run as f64;
            let fp = fp_run as f64;
            let tn = self.negatives as f64 - fp;
            accuracy.push(if total > 0.0 { (tp + tn) / total } else { 1.0 });
            precision.push(if tp + fp > 0.0 { tp / (tp + fp) } else { 1.0 });
            recall.push(if self.positives > 0 { tp / self.positives as f64 } else { 1.0 });
        }
        let hist = (0..HISTOGRAM_BINS)
            .map(|b| HistogramBin {
                lo: b as f64 / HISTOGRAM_BINS as f64,
                hi: (b + 1) as f64 / HISTOGRAM_BINS as f64,
                negatives: self.hist_neg[b],
                positives: self.hist_pos[b],
            })
            .collect();
        ScoreCurves {
            thresholds: self.thresholds.clone(),
            accuracy,
            precision,
            recall,
            histogram: hist,
            positives: self.positives,
            negatives: self.negatives,
        }
    }
}

/// Vanilla evolution with the predictor trained online but never used
/// for steering. At each step, `fan_out` children of the selected parent
/// are scored against it and recorded with their true fitnesses; the
/// first child is the one that actually evolves.
pub fn counterfactual_run<F>(
    config: &ExperimentConfig,
    fan_out: usize,
    scorer: CounterfactualScorer,
    mut on_record: F,
) -> ScoreCurves
where
    F: FnMut(&CounterfactualRecord),
{
    config.validate().expect("invalid experiment configuration");
    assert!(fan_out >= 1);
    let seed = config.seed;
    let task = SymRegTask::new(config.task, seed);
    let mut fec = if config.fec { Some(evolution::FecCache::new()) } else { None };

    let mut init_rng = stream_rng(seed, Stream::InitPopulation, 0);
    let mut pop =
        evolution::init_population(&task, config.population_size, &mut init_rng, fec.as_mut());
    let mut replay = ReplayBuffer::new(config.schedule.replay_capacity);
    for c in pop.iter() {
        replay.push(c.graph.clone(), c.fitness);
    }

    let train_online = scorer == CounterfactualScorer::LearnedOnline;
    let mut model = if train_online {
        let mut mrng = stream_rng(seed, Stream::ModelInit, 0);
        Some(PredictorModel::new(config.encoder, HeadKind::Binary, &mut mrng))
    } else {
        None
    };
    let mut adam = model.as_ref().map(|m| AdamState::new(m.param_count()));
    let mut evo_rng = stream_rng(seed, Stream::Evolution, 0);
    let mut train_rng = stream_rng(seed, Stream::Training, 0);
    let mut score_rng = stream_rng(seed, Stream::Oracle, 0);

    let mut acc = CurveAccumulator::default();

    for step in 0..config.total_samples {
        let parent = tournament_select(&pop, config.tournament_size, &mut evo_rng).clone();
        let children: Vec<ProgramGraph> =
            (0..fan_out).map(|_| mutate_graph(&parent.graph, &mut evo_rng)).collect();
        let fitnesses: Vec<f64> =
            children.iter().map(|c| task.fitness(c).fitness).collect();
        let scores: Vec<f64> = match scorer {
            CounterfactualScorer::LearnedOnline => {
                let m = model.as_ref().expect("online scorer carries a model");
                let mut s = CachedPairScorer::new(m);
                children.iter().map(|c| s.score(c, &parent.graph).probability).collect()
            }
            CounterfactualScorer::PerfectOracle => fitnesses
                .iter()
                .map(|&f| if f > parent.fitness { 1.0 } else { 0.0 })
                .collect(),
            CounterfactualScorer::RandomUniform => {
                (0..fan_out).map(|_| score_rng.gen::<f64>()).collect()
            }
        };
        for (s, f) in scores.iter().zip(&fitnesses) {
            acc.add(*s, *f > parent.fitness);
        }
        on_record(&CounterfactualRecord {
            step,
            candidate_scores: scores,
            candidate_fitnesses: fitnesses,
            parent_fitness: parent.fitness,
        });

        // Evolution proceeds with the first child, exactly as a vanilla
        // mutation step would.
        let mut candidate = evolution::evaluate(
            children.into_iter().next().expect("fan_out >= 1"),
            &task,
            fec.as_mut(),
            config.population_size as u64 + step,
        );
        candidate.parent_fitness = Some(parent.fitness);

        if train_online && step % config.schedule.frequency == 0 {
            run_train_trigger(
                model.as_mut().expect("online scorer carries a model"),
                adam.as_mut().expect("model implies optimizer state"),
                &config.adam,
                &config.schedule,
                &replay,
                &mut train_rng,
            );
        }

        replay.push(candidate.graph.clone(), candidate.fitness);
        pop.push(candidate);
    }

    acc.finish()
}

/// Uniqueness tracking by structural hash: distinct hashes inside the
/// sliding population (one entry per step, step 0 being the initial
/// population) and cumulative distinct hashes over every evaluated
/// candidate (initial population first).
pub fn uniqueness_curves(
    init_hashes: &[u64],
    child_hashes: &[u64],
    capacity: usize,
) -> (Vec<usize>, Vec<usize>) {
    assert!(capacity >= 1 && init_hashes.len() == capacity, "window starts at capacity");
    let mut window: HashMap<u64, u32> = HashMap::new();
    let mut queue: std::collections::VecDeque<u64> = Default::default();
    for &h in init_hashes {
        *window.entry(h).or_insert(0) += 1;
        queue.push_back(h);
    }

    let mut in_pop = Vec::with_capacity(child_hashes.len() + 1);
    in_pop.push(window.len());

    let mut seen: HashSet<u64> = HashSet::new();
    let mut cumulative = Vec::with_capacity(init_hashes.len() + child_hashes.len());
    for &h in init_hashes {
        seen.insert(h);
        cumulative.push(seen.len());
    }

    for &h in child_hashes {
        *window.entry(h).or_insert(0) += 1;
        queue.push_back(h);
        let old = queue.pop_front().expect("window is non-empty");
        match window.get_mut(&old) {
            Some(n) if *n > 1 => *n -= 1,
            _ => {
                window.remove(&old);
            }
        }
        in_pop.push(window.len());
        seen.insert(h);
        cumulative.push(seen.len());
    }
    (in_pop, cumulative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PredictorMode;
    use crate::strategies::{StrategyConfig, StrategyKind};
    use crate::symreg::TaskName;
    use crate::trainer::TrainSchedule;
    use crate::predictor::EncoderConfig;

    fn rng(seed: u64) -> ChaCha8Rng {
        stream_rng(seed, Stream::Oracle, 0)
    }

    #[test]
    fn p_accept_closed_forms() {
        assert_eq!(p_accept(HillClimbParams::new(0.3, 1.0)), 0.3);
        assert_eq!(p_accept(HillClimbParams::new(0.7, 0.5)), 0.5);
        assert!((p_accept(HillClimbParams::new(0.3, 0.8)) - 0.38).abs() < 1e-15);
    }

    #[test]
    fn modified_rate_closed_forms() {
        // Uninformative model leaves the natural rate unchanged.
        for q in [0.05, 0.3, 0.9] {
            assert!((modified_rate(HillClimbParams::new(q, 0.5)) - q).abs() < 1e-15);
        }
        // A perfect model accepts only improvements.
        for q in [0.05, 0.3, 0.9] {
            assert!((modified_rate(HillClimbParams::new(q, 1.0)) - 1.0).abs() < 1e-15);
        }
        assert_eq!(modified_rate(HillClimbParams::new(0.0, 1.0)), 0.0);
        let r = modified_rate(HillClimbParams::new(0.1, 0.8));
        assert!((r - 4.0 / 13.0).abs() < 1e-12, "got {r}");
    }

    #[test]
    fn modified_rate_dominates_natural_rate_on_grid() {
        for qi in 1..100 {
            let q = qi as f64 / 100.0;
            for ai in 1..=50 {
                let a = 0.5 + ai as f64 / 100.0;
                let m = modified_rate(HillClimbParams::new(q, a));
                assert!(m >= q - 1e-12, "modified {m} below natural {q} at a={a}");
            }
        }
    }

    #[test]
    fn modified_rate_is_monotone_in_accuracy() {
        for qi in [5, 10, 30, 50, 90] {
            let q = qi as f64 / 100.0;
            let mut prev = 0.0;
            for ai in 0..=50 {
                let a = 0.5 + ai as f64 / 100.0;
                let m = modified_rate(HillClimbParams::new(q, a));
                assert!(m >= prev - 1e-12);
                prev = m;
            }
        }
    }

    #[test]
    fn simulation_matches_trivial_cases() {
        let mut r = rng(1);
        // Uninformative model: rate is within noise of q.
        let hp = HillClimbParams::new(0.3, 0.5);
        let est = simulate_modified_rate(hp, 1_000, 40_000, &mut r);
        let sigma = (0.3f64 * 0.7 / 40_000.0).sqrt();
        assert!((est - 0.3).abs() < 4.0 * sigma, "got {est}");
        // One attempt is unconditionally returned: the natural rate.
        let est1 = simulate_modified_rate(HillClimbParams::new(0.2, 0.9), 1, 40_000, &mut r);
        let sigma1 = (0.2f64 * 0.8 / 40_000.0).sqrt();
        assert!((est1 - 0.2).abs() < 4.0 * sigma1, "got {est1}");
    }

    #[test]
    fn simulation_approaches_closed_form() {
        let hp = HillClimbParams::new(0.1, 0.8);
        let mut r = rng(2);
        let est = simulate_modified_rate(hp, 10_000, 200_000, &mut r);
        assert!((est - modified_rate(hp)).abs() < 0.01, "got {est}");
    }

    #[test]
    fn running_mean_examples() {
        let flags = [true, false, false, true];
        let series = cumulative_hill_climb_rate(&flags);
        let expect = [1.0, 0.5, 1.0 / 3.0, 0.5];
        for (s, e) in series.iter().zip(&expect) {
            assert!((s - e).abs() < 1e-15);
        }
        assert!(cumulative_hill_climb_rate(&[false; 8]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn running_mean_converges_to_rate() {
        let mut r = rng(3);
        let q = 0.37;
        let flags: Vec<bool> = (0..100_000).map(|_| r.gen::<f64>() < q).collect();
        let series = cumulative_hill_climb_rate(&flags);
        let last = *series.last().expect("non-empty");
        assert!((last - q).abs() < 0.006, "got {last}");
    }

    fn tiny_config(seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::for_task(TaskName::Nguyen5);
        cfg.seed = seed;
        cfg.population_size = 20;
        cfg.tournament_size = 5;
        cfg.total_samples = 150;
        cfg.strategy = StrategyConfig { kind: StrategyKind::Vanilla, ..Default::default() };
        cfg.predictor_mode = PredictorMode::Learned;
        cfg.encoder = EncoderConfig {
            node_embed_dim: 8,
            edge_embed_dim: 4,
            hidden_dim: 8,
            num_layers: 2,
            graph_dim: 8,
        };
        cfg.schedule = TrainSchedule {
            frequency: 50,
            epochs_per_trigger: 1,
            min_data: 20,
            batch_size: 16,
            replay_capacity: 200,
        };
        cfg
    }

    #[test]
    fn counterfactual_perfect_oracle_is_exact() {
        let cfg = tiny_config(11);
        let curves =
            counterfactual_run(&cfg, 16, CounterfactualScorer::PerfectOracle, |_| {});
        // Accuracy 1 at threshold 0.5 and precision 1 wherever defined.
        let idx = 50;
        assert_eq!(curves.thresholds[idx], 0.5);
        assert!((curves.accuracy[idx] - 1.0).abs() < 1e-12);
        for (p, r) in curves.precision.iter().zip(&curves.recall) {
            assert!(*p >= 1.0 - 1e-12 || *r == 0.0);
        }
        // Positives exist in a 150-step run.
        assert!(curves.positives > 0);
    }

    #[test]
    fn counterfactual_random_scores_precision_matches_base_rate() {
        let cfg = tiny_config(12);
        let curves =
            counterfactual_run(&cfg, 32, CounterfactualScorer::RandomUniform, |_| {});
        let base = curves.positives as f64 / (curves.positives + curves.negatives) as f64;
        // At mid thresholds, precision of random scores estimates the
        // positive base rate.
        for idx in [20usize, 50, 80] {
            let n_pred = curves.recall[idx] * curves.positives as f64 / curves.precision[idx];
            if n_pred < 500.0 {
                continue; // too few predictions for a tight check
            }
            let sigma = (base * (1.0 - base) / n_pred).sqrt();
            assert!(
                (curves.precision[idx] - base).abs() < 5.0 * sigma + 0.01,
                "precision {} vs base {base} at {}",
                curves.precision[idx],
                curves.thresholds[idx]
            );
        }
        // Recall at the top threshold is 0: no score exceeds 1.0.
        assert_eq!(curves.recall[100], 0.0);
    }

    #[test]
    fn precision_recall_match_brute_force_recount() {
        let mut acc = CurveAccumulator::default();
        let mut r = rng(5);
        let mut stream = Vec::new();
        for _ in 0..5_000 {
            let score: f64 = r.gen();
            let positive = r.gen::<f64>() < 0.2;
            acc.add(score, positive);
            stream.push((score, positive));
        }
        let curves = acc.finish();
        for idx in [0usize, 13, 50, 99, 100] {
            let t = curves.thresholds[idx];
            let tp = stream.iter().filter(|(s, p)| *p && *s > t).count() as f64;
            let fp = stream.iter().filter(|(s, p)| !*p && *s > t).count() as f64;
            let fn_ = stream.iter().filter(|(s, p)| *p && *s <= t).count() as f64;
            let tn = stream.iter().filter(|(s, p)| !*p && *s <= t).count() as f64;
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 1.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 1.0 };
            let accuracy = (tp + tn) / stream.len() as f64;
            assert!((curves.precision[idx] - precision).abs() < 1e-12);
            assert!((curves.recall[idx] - recall).abs() < 1e-12);
            assert!((curves.accuracy[idx] - accuracy).abs() < 1e-12);
        }
        let hist_total: u64 =
            curves.histogram.iter().map(|b| b.negatives + b.positives).sum();
        assert_eq!(hist_total, 5_000);
    }

    #[test]
    fn uniqueness_curves_basics() {
        // Identical population: one distinct hash.
        let init = vec![7u64; 5];
        let children = vec![7u64, 9, 9, 11];
        let (in_pop, cumulative) = uniqueness_curves(&init, &children, 5);
        assert_eq!(in_pop[0], 1);
        assert_eq!(in_pop.len(), 5);
        assert_eq!(cumulative.len(), 9);
        // Cumulative is nondecreasing and its first P entries are <= P.
        for w in cumulative.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for &c in cumulative.iter().take(5) {
            assert!(c <= 5);
        }
        assert_eq!(*cumulative.last().expect("non-empty"), 3); // {7, 9, 11}
        // Window after all children: [9, 9, 11] plus two of the 7s.
        assert_eq!(*in_pop.last().expect("non-empty"), 3);
    }
}
