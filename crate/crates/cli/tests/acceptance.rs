//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p evoguide-cli --test acceptance -- --nocapture`
//! to see the lines as they complete.

use evoguide_cli::commands::ablate::{self, AblateSpec};
use evoguide_cli::commands::oracle_sweep::ArmResult;
use evoguide_cli::runs::{self, execute_run};
use evoguide_core::analysis::{
    cumulative_hill_climb_rate, modified_rate, simulate_modified_rate, CurveAccumulator,
    HillClimbParams,
};
use evoguide_core::config::{ExperimentConfig, PredictorMode};
use evoguide_core::evolution::{Candidate, PopulationBuffer};
use evoguide_core::graph::{content_hash, Node, NodeOp, ProgramGraph};
use evoguide_core::predictor::{AdamParams, EncoderConfig, HeadKind, NoisyOracle, PredictorModel};
use evoguide_core::rng::{stream_rng, Stream};
use evoguide_core::strategies::{pam_rt, StrategyKind};
use evoguide_core::symreg::{
    flip_and_squash, mutate_graph, random_graph, SymRegTask, TaskName,
};
use evoguide_core::trainer::{StepRecord, TrainSchedule};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

const GRID_Q: [f64; 4] = [0.05, 0.1, 0.3, 0.5];
const GRID_A: [f64; 3] = [0.6, 0.8, 1.0];
const SEEDS: u64 = 5;

fn pass(number: u32, name: &str, detail: &str) {
    println!("ACCEPTANCE {number} ({name}): PASS  [{detail}]");
}

fn median_u64(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

fn median_f64(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    xs[xs.len() / 2]
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Criterion 1: the closed-form modified hill-climb rate matches its
/// Monte-Carlo estimate within 0.01 absolute over the (q, a) grid, with
/// the simulation at 10^4 attempts and 10^6 trials, in under a minute;
/// and the modified rate dominates the natural rate whenever a > 0.5.
#[test]
fn acceptance_1_hill_climb_closed_form() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for (i, &q) in GRID_Q.iter().enumerate() {
        for (j, &a) in GRID_A.iter().enumerate() {
            let hp = HillClimbParams::new(q, a);
            let mut rng = stream_rng(2024, Stream::Oracle, (i * GRID_A.len() + j) as u64);
            let mc = simulate_modified_rate(hp, 10_000, 1_000_000, &mut rng);
            let cf = modified_rate(hp);
            let err = (mc - cf).abs();
            worst = worst.max(err);
            assert!(
                err <= 0.01,
                "q={q} a={a}: closed form {cf} vs Monte-Carlo {mc} (err {err})"
            );
            if a > 0.5 {
                assert!(cf >= q, "q={q} a={a}: modified rate {cf} below natural rate");
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "grid took {elapsed:?}, budget is one minute");
    pass(
        1,
        "hill-climb closed form vs simulation",
        &format!("worst abs err {worst:.5}, {elapsed:.1?}"),
    );
}

/// A population of one repeated parent whose fitness sits at the 1-q
/// quantile, plus a mutator drawing fresh random graphs whose
/// hash-derived fitness is uniform: the improvement event is an
/// independent Bernoulli(q) per attempt.
fn bernoulli_landscape(q: f64) -> (PopulationBuffer, impl Fn(&ProgramGraph) -> f64 + Clone) {
    let base = ProgramGraph::new(
        vec![
            Node::new(NodeOp::InputX, &[]),
            Node::new(NodeOp::Sin, &[0]),
            Node::new(NodeOp::Add, &[0, 1]),
            Node::new(NodeOp::Mul, &[2, 1]),
        ],
        1,
        3,
        15,
    )
    .expect("valid base graph");
    let parent_fitness = 1.0 - q;
    let base_key = content_hash(&base);
    let fitness = move |g: &ProgramGraph| {
        if content_hash(g) == base_key {
            parent_fitness
        } else {
            (content_hash(g) >> 11) as f64 / (1u64 << 53) as f64
        }
    };
    let mut pop = PopulationBuffer::new(8);
    for i in 0..8 {
        pop.push(Candidate {
            graph: base.clone(),
            fitness: parent_fitness,
            parent_fitness: None,
            sample_index: i,
            attempts_used: 0,
            fec_hit: false,
        });
    }
    (pop, fitness)
}

/// Criterion 2: the per-attempt acceptance frequency of the real
/// adaptive-mutation loop matches q*a + (1-q)(1-a) within 3 binomial
/// standard deviations over 1e5 attempts, across the grid.
#[test]
fn acceptance_2_acceptance_probability_law() {
    let mut worst_z = 0.0f64;
    for (i, &q) in GRID_Q.iter().enumerate() {
        for (j, &a) in GRID_A.iter().enumerate() {
            let (pop, fitness) = bernoulli_landscape(q);
            let salt = (i * GRID_A.len() + j) as u64;
            let mut oracle =
                NoisyOracle::new(a, fitness, stream_rng(7, Stream::Oracle, salt));
            let mut evo = stream_rng(7, Stream::Evolution, salt);
            let mut mutator =
                |_: &ProgramGraph, r: &mut ChaCha8Rng| random_graph(1, 15, r);
            let mut attempts = 0u64;
            let mut accepts = 0u64;
            while attempts < 100_000 {
                let out = pam_rt(&pop, &mut oracle, &mut mutator, 3, 10_000, &mut evo);
                attempts += out.attempts_used as u64;
                accepts += out.accepted_by_model as u64;
            }
            let expect = q * a + (1.0 - q) * (1.0 - a);
            let freq = accepts as f64 / attempts as f64;
            let sigma = (expect * (1.0 - expect) / attempts as f64).sqrt();
            let z = (freq - expect).abs() / sigma;
            worst_z = worst_z.max(z);
            assert!(
                (freq - expect).abs() <= 3.0 * sigma,
                "q={q} a={a}: accept frequency {freq} vs law {expect} ({z:.2} sigma)"
            );
        }
    }
    pass(2, "per-attempt acceptance law", &format!("worst deviation {worst_z:.2} sigma"));
}

fn sweep_config(task: TaskName, samples: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_task(task);
    cfg.total_samples = samples;
    cfg
}

fn oracle_arm(task: TaskName, samples: u64, accuracy: Option<f64>, seed: u64) -> ExperimentConfig {
    let mut cfg = sweep_config(task, samples);
    cfg.seed = seed;
    match accuracy {
        Some(a) if a >= 1.0 => {
            cfg.strategy.kind = StrategyKind::PamRt;
            cfg.predictor_mode = PredictorMode::PerfectOracle;
        }
        Some(a) => {
            cfg.strategy.kind = StrategyKind::PamRt;
            cfg.predictor_mode = PredictorMode::NoisyOracle { accuracy: a };
        }
        None => {
            cfg.strategy.kind = StrategyKind::Vanilla;
            // Oracle mode is never queried by the vanilla strategy and
            // trains nothing.
            cfg.predictor_mode = PredictorMode::PerfectOracle;
        }
    }
    cfg
}

fn batch_finals(configs: Vec<ExperimentConfig>, tag: &str) -> Vec<Vec<StepRecord>> {
    let dir = tempfile::tempdir().expect("temp dir");
    let jobs: Vec<(ExperimentConfig, PathBuf)> = configs
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, dir.path().join(format!("{tag}-{i}"))))
        .collect();
    runs::run_batch(&jobs, 2)
        .expect("runs complete")
        .into_iter()
        .map(|log| log.steps)
        .collect()
}

/// Criterion 3: with simulated oracles on the two-variable task, final
/// mean best fitness orders by oracle accuracy and strictly separates
/// the perfect oracle from the baseline by more than two combined
/// standard errors.
#[test]
fn acceptance_3_noisy_oracle_ordering() {
    let task = TaskName::Nguyen12;
    let samples = 50_000;
    let arms: [(&str, Option<f64>); 4] =
        [("a=1.0", Some(1.0)), ("a=0.8", Some(0.8)), ("a=0.6", Some(0.6)), ("vanilla", None)];

    let mut results: Vec<ArmResult> = Vec::new();
    for (name, acc) in arms {
        let configs: Vec<ExperimentConfig> =
            (0..SEEDS).map(|s| oracle_arm(task, samples, acc, s)).collect();
        let logs = batch_finals(configs, name);
        let finals: Vec<f64> = logs
            .iter()
            .map(|steps| steps.last().expect("non-empty run").best_fitness)
            .collect();
        results.push(ArmResult { arm: name.to_string(), accuracy: acc, finals });
    }

    let means: Vec<f64> = results.iter().map(|r| r.mean()).collect();
    for w in means.windows(2) {
        assert!(
            w[0] >= w[1],
            "oracle-accuracy ordering violated: {means:?} for arms 1.0 >= 0.8 >= 0.6 >= vanilla"
        );
    }
    let perfect = &results[0];
    let vanilla = &results[3];
    let gap = perfect.mean() - vanilla.mean();
    let combined =
        (perfect.standard_error().powi(2) + vanilla.standard_error().powi(2)).sqrt();
    assert!(
        gap > 2.0 * combined,
        "perfect oracle vs baseline: gap {gap:.4} not beyond 2x combined SE {combined:.4}"
    );
    pass(
        3,
        "noisy-oracle ordering",
        &format!(
            "means {:.4}/{:.4}/{:.4}/{:.4}, gap {gap:.4} > 2*SE {combined:.4}",
            means[0], means[1], means[2], means[3]
        ),
    );
}

/// Schedule for the online-learned runs: the standard 10 epochs every
/// 100 samples, with the replay buffer capped at 1000 records (the
/// smallest size the training notes call safe) to keep per-trigger cost
/// flat at desk scale.
fn learned_schedule() -> TrainSchedule {
    TrainSchedule {
        frequency: 100,
        epochs_per_trigger: 10,
        min_data: 100,
        batch_size: 64,
        replay_capacity: 1000,
    }
}

fn samples_to_threshold(steps: &[StepRecord], threshold: f64) -> Option<u64> {
    steps.iter().find(|r| r.best_fitness >= threshold).map(|r| r.sample_index + 1)
}

/// Criterion 4: the online learned predictor reaches fitness 0.9 on
/// Nguyen-5 in median at most 0.7x the samples of the vanilla baseline,
/// and its final mean best fitness is at least the baseline's.
#[test]
fn acceptance_4_learned_predictor_speedup() {
    let task = TaskName::Nguyen5;
    let samples = 20_000;
    let threshold = 0.9;

    let vanilla_cfgs: Vec<ExperimentConfig> =
        (0..SEEDS).map(|s| oracle_arm(task, samples, None, s)).collect();
    let vanilla_logs = batch_finals(vanilla_cfgs, "vanilla");

    let learned_cfgs: Vec<ExperimentConfig> = (0..SEEDS)
        .map(|s| {
            let mut cfg = sweep_config(task, samples);
            cfg.seed = s;
            cfg.strategy.kind = StrategyKind::PamRt;
            cfg.predictor_mode = PredictorMode::Learned;
            cfg.schedule = learned_schedule();
            cfg
        })
        .collect();
    let learned_logs = batch_finals(learned_cfgs, "learned");

    let vanilla_hits: Vec<u64> = vanilla_logs
        .iter()
        .map(|l| samples_to_threshold(l, threshold).unwrap_or(samples))
        .collect();
    let learned_hits: Vec<u64> = learned_logs
        .iter()
        .map(|l| samples_to_threshold(l, threshold).unwrap_or(samples))
        .collect();
    let vanilla_median = median_u64(vanilla_hits.clone());
    let learned_median = median_u64(learned_hits.clone());
    assert!(
        learned_median as f64 <= 0.7 * vanilla_median as f64,
        "samples to {threshold}: learned median {learned_median} vs vanilla median \
         {vanilla_median} (need <= 0.7x; per-seed learned {learned_hits:?}, vanilla {vanilla_hits:?})"
    );

    let vanilla_final: Vec<f64> =
        vanilla_logs.iter().map(|l| l.last().expect("non-empty").best_fitness).collect();
    let learned_final: Vec<f64> =
        learned_logs.iter().map(|l| l.last().expect("non-empty").best_fitness).collect();
    assert!(
        mean(&learned_final) >= mean(&vanilla_final),
        "final mean best: learned {} vs vanilla {}",
        mean(&learned_final),
        mean(&vanilla_final)
    );
    pass(
        4,
        "learned-predictor speedup",
        &format!(
            "median samples-to-{threshold}: {learned_median} vs {vanilla_median} \
             (ratio {:.2}); final means {:.4} vs {:.4}",
            learned_median as f64 / vanilla_median as f64,
            mean(&learned_final),
            mean(&vanilla_final)
        ),
    );
}

/// Criterion 5: on a fixed 10k-candidate dataset from vanilla evolution,
/// the binary head's held-out pair accuracy exceeds the regression
/// head's (median of 3 training seeds), and reaches at least 0.85 at
/// threshold one half.
#[test]
fn acceptance_5_binary_beats_regression() {
    let spec = AblateSpec {
        task: TaskName::Nguyen5,
        dataset_samples: 10_000,
        epochs: 60,
        seeds: 3,
        seed: 0,
        eval_pairs: 20_000,
        encoder: EncoderConfig::default(),
        adam: AdamParams::default(),
    };
    let outcomes = ablate::run_ablation(&spec);
    let mut bins: Vec<f64> = outcomes.iter().map(|o| o.binary_accuracy).collect();
    let mut regs: Vec<f64> = outcomes.iter().map(|o| o.regression_accuracy).collect();
    let bin_median = ablate::median(&mut bins);
    let reg_median = ablate::median(&mut regs);
    assert!(
        bin_median > reg_median,
        "binary median {bin_median} must exceed regression median {reg_median} \
         (per-seed binary {bins:?}, regression {regs:?})"
    );
    assert!(bin_median >= 0.85, "binary median {bin_median} below 0.85");
    pass(
        5,
        "binary vs regression heads",
        &format!("binary median {bin_median:.4} > regression median {reg_median:.4}"),
    );
}

/// Criterion 6: analytic gradients match central finite differences to
/// 1e-4 relative error on 20 random coordinates for each of 10 random
/// graphs, for both heads.
#[test]
fn acceptance_6_gradient_correctness() {
    let config = EncoderConfig::default();
    let mut worst = 0.0f64;
    for head in [HeadKind::Binary, HeadKind::Regression] {
        let mut mrng = stream_rng(33, Stream::ModelInit, head as u64);
        let model = PredictorModel::new(config, head, &mut mrng);
        let mut grng = stream_rng(34, Stream::Evolution, head as u64);

        for graph_idx in 0..10 {
            let g1 = random_graph(1, 15, &mut grng);
            let g2 = random_graph(1, 15, &mut grng);
            let loss_of = |m: &PredictorModel| match head {
                HeadKind::Binary => {
                    m.loss_and_grad_pairs(&[(&g1, &g2, (graph_idx % 2) as f64)]).unwrap()
                }
                HeadKind::Regression => m.loss_and_grad_fitness(&[(&g1, 0.63)]).unwrap(),
            };
            let (_, grad) = loss_of(&model);
            for _ in 0..20 {
                let coord = grng.gen_range(0..model.param_count());
                let h = 1e-5;
                let mut plus = model.params().to_vec();
                plus[coord] += h;
                let mut minus = model.params().to_vec();
                minus[coord] -= h;
                let lp = loss_of(&PredictorModel::from_params(config, head, plus).unwrap()).0;
                let lm = loss_of(&PredictorModel::from_params(config, head, minus).unwrap()).0;
                let fd = (lp - lm) / (2.0 * h);
                let rel = (grad[coord] - fd).abs() / (grad[coord].abs() + 1e-8);
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-4,
                    "{head:?} graph {graph_idx} coord {coord}: analytic {} vs fd {fd} (rel {rel})",
                    grad[coord]
                );
            }
        }
    }
    pass(6, "gradient correctness", &format!("worst relative error {worst:.2e}"));
}

/// Criterion 7: with a perfect oracle, the cumulative hill-climb rate at
/// the end of a 10k-sample run orders re-tournament >= fixed-parent >=
/// vanilla (medians over 5 seeds).
#[test]
fn acceptance_7_strategy_comparison() {
    let task = TaskName::Nguyen5;
    let samples = 10_000;
    let mut rates: Vec<Vec<f64>> = Vec::new();
    for kind in [StrategyKind::PamRt, StrategyKind::Pam, StrategyKind::Vanilla] {
        let configs: Vec<ExperimentConfig> = (0..SEEDS)
            .map(|s| {
                let mut cfg = sweep_config(task, samples);
                cfg.seed = s;
                cfg.strategy.kind = kind;
                cfg.predictor_mode = PredictorMode::PerfectOracle;
                cfg
            })
            .collect();
        let logs = batch_finals(configs, kind.as_str());
        rates.push(
            logs.iter()
                .map(|l| l.last().expect("non-empty").cumulative_hill_climb_rate)
                .collect(),
        );
    }
    let pam_rt_median = median_f64(rates[0].clone());
    let pam_median = median_f64(rates[1].clone());
    let vanilla_median = median_f64(rates[2].clone());
    assert!(
        pam_rt_median >= pam_median && pam_median >= vanilla_median,
        "cumulative hill-climb medians: pam-rt {pam_rt_median}, pam {pam_median}, \
         vanilla {vanilla_median}"
    );
    pass(
        7,
        "strategy comparison",
        &format!("medians {pam_rt_median:.4} >= {pam_median:.4} >= {vanilla_median:.4}"),
    );
}

/// Criterion 8: identical seeds give byte-identical logs; caching on and
/// off gives identical (graph, fitness) sequences with at least one
/// cache hit on a run long enough to revisit a functional duplicate.
#[test]
fn acceptance_8_determinism_and_fec() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = sweep_config(TaskName::Nguyen5, 1_000);
    cfg.seed = 5;
    cfg.strategy.kind = StrategyKind::PamRt;
    cfg.predictor_mode = PredictorMode::NoisyOracle { accuracy: 0.8 };

    execute_run(&cfg, &dir.path().join("a")).expect("run a");
    execute_run(&cfg, &dir.path().join("b")).expect("run b");
    let a = std::fs::read(dir.path().join("a/run.csv")).expect("log a");
    let b = std::fs::read(dir.path().join("b/run.csv")).expect("log b");
    assert_eq!(a, b, "same seed must give byte-identical logs");

    let mut no_fec = cfg.clone();
    no_fec.fec = false;
    let with = execute_run(&cfg, &dir.path().join("fec-on")).expect("fec on");
    let without = execute_run(&no_fec, &dir.path().join("fec-off")).expect("fec off");
    assert_eq!(with.steps.len(), without.steps.len());
    for (x, y) in with.steps.iter().zip(&without.steps) {
        assert_eq!(x.structural_hash, y.structural_hash);
        assert_eq!(x.child_fitness.to_bits(), y.child_fitness.to_bits());
    }
    assert!(with.fec_hits >= 1, "the cache must record hits on this run");
    assert_eq!(without.fec_hits, 0);
    pass(
        8,
        "determinism and caching consistency",
        &format!("{} cache hits; sequences identical", with.fec_hits),
    );
}

/// Criterion 9: the module property suites.
#[test]
fn acceptance_9_invariant_suites() {
    // Graph validity under ten thousand random mutations.
    let mut rng = stream_rng(90, Stream::Evolution, 0);
    let mut g = random_graph(2, 15, &mut rng);
    for _ in 0..10_000 {
        g = mutate_graph(&g, &mut rng);
        ProgramGraph::new(g.nodes().to_vec(), g.num_inputs(), g.output_slot(), g.max_slots())
            .expect("mutation preserves validity");
    }

    // Permutation-invariant encoding over isomorphic relabelings.
    let model = PredictorModel::new(
        EncoderConfig::default(),
        HeadKind::Binary,
        &mut stream_rng(91, Stream::ModelInit, 0),
    );
    for i in 0..1_000 {
        let a = random_graph(1, 15, &mut rng);
        let b = relabel(&a, &mut rng);
        assert_eq!(a.structural_hash(), b.structural_hash(), "case {i}");
        assert_eq!(model.encode(&a), model.encode(&b), "case {i}");
    }

    // Fitness bounds across tasks.
    for task_name in TaskName::ALL {
        let task = SymRegTask::new(task_name, 92);
        for _ in 0..2_000 {
            let g = random_graph(task.num_inputs(), 15, &mut rng);
            let f = task.fitness(&g).fitness;
            assert!((0.0..=1.0).contains(&f));
        }
    }

    // Monotone squash.
    let mut prev = flip_and_squash(0.0);
    for i in 1..=1_000 {
        let f = flip_and_squash(i as f64 * 0.05);
        assert!(f < prev);
        prev = f;
    }

    // Running-mean correctness against a direct recount.
    let flags: Vec<bool> = (0..10_000).map(|_| rng.gen::<f64>() < 0.23).collect();
    let series = cumulative_hill_climb_rate(&flags);
    for n in [1usize, 17, 999, 10_000] {
        let direct =
            flags[..n].iter().filter(|&&f| f).count() as f64 / n as f64;
        assert!((series[n - 1] - direct).abs() < 1e-15);
    }

    // Precision/recall recount on a synthetic stream.
    let mut acc = CurveAccumulator::default();
    let mut stream = Vec::new();
    for _ in 0..20_000 {
        let score: f64 = rng.gen();
        let positive = rng.gen::<f64>() < 0.05;
        acc.add(score, positive);
        stream.push((score, positive));
    }
    let curves = acc.finish();
    for idx in [0usize, 37, 50, 93, 100] {
        let t = curves.thresholds[idx];
        let tp = stream.iter().filter(|(s, p)| *p && *s > t).count() as f64;
        let fp = stream.iter().filter(|(s, p)| !*p && *s > t).count() as f64;
        let fn_ = stream.iter().filter(|(s, p)| *p && *s <= t).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 1.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 1.0 };
        assert!((curves.precision[idx] - precision).abs() < 1e-12);
        assert!((curves.recall[idx] - recall).abs() < 1e-12);
    }

    pass(9, "invariant suites", "graphs, encoding, fitness, squash, means, recounts");
}

/// Auxiliary check backing the online-training loop: after 10k samples
/// on Nguyen-5, the online-trained model's accuracy at threshold 0.5
/// over counterfactually scored children (scored before they influence
/// anything) reaches at least 0.9.
#[test]
fn online_model_counterfactual_accuracy() {
    let mut cfg = sweep_config(TaskName::Nguyen5, 10_000);
    cfg.seed = 0;
    cfg.strategy.kind = StrategyKind::Vanilla;
    cfg.predictor_mode = PredictorMode::Learned;
    cfg.schedule = learned_schedule();
    let curves = evoguide_core::analysis::counterfactual_run(
        &cfg,
        64,
        evoguide_core::analysis::CounterfactualScorer::LearnedOnline,
        |_| {},
    );
    let mid = curves.thresholds.iter().position(|&t| t == 0.5).expect("grid includes 0.5");
    let accuracy = curves.accuracy[mid];
    assert!(
        accuracy >= 0.9,
        "online model accuracy at threshold 0.5 was {accuracy:.4} \
         ({} positives / {} negatives)",
        curves.positives,
        curves.negatives
    );
    pass(
        10,
        "online-model counterfactual accuracy (auxiliary)",
        &format!("accuracy@0.5 = {accuracy:.4}"),
    );
}

/// Isomorphic relabeling: same active structure, fresh inactive noise.
fn relabel(g: &ProgramGraph, rng: &mut ChaCha8Rng) -> ProgramGraph {
    let max_slots = 15;
    let num_inputs = g.num_inputs();
    let mut map = vec![usize::MAX; g.len()];
    let mut nodes: Vec<Node> = Vec::new();
    for slot in 0..num_inputs {
        map[slot] = slot;
        nodes.push(*g.node(slot));
    }
    let active_ops: Vec<usize> =
        g.active_slots().into_iter().filter(|&s| s >= num_inputs).collect();
    let mut remaining = active_ops.len();
    for &slot in &active_ops {
        while nodes.len() + remaining < max_slots && rng.gen::<f64>() < 0.3 {
            let op = NodeOp::OPERATORS[rng.gen_range(0..8)];
            let mut ins = Vec::new();
            for _ in 0..op.arity() {
                ins.push(rng.gen_range(0..nodes.len()));
            }
            nodes.push(Node::new(op, &ins));
        }
        let old = g.node(slot);
        let ins: Vec<usize> = old.inputs().iter().map(|&s| map[s as usize]).collect();
        map[slot] = nodes.len();
        nodes.push(Node::new(old.op, &ins));
        remaining -= 1;
    }
    ProgramGraph::new(nodes, num_inputs, map[g.output_slot()], max_slots)
        .expect("relabeled graph is valid")
}
