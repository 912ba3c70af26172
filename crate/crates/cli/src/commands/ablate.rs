//! Binary-vs-regression head comparison on a fixed dataset collected
//! from vanilla evolution: train both heads on an 80/20 split and report
//! held-out pair accuracy.

use crate::opts::AblateArgs;
use crate::runs;
use anyhow::{Context, Result};
use evoguide_core::config::ExperimentConfig;
use evoguide_core::evolution;
use evoguide_core::graph::ProgramGraph;
use evoguide_core::predictor::{
    AdamParams, AdamState, CachedPairScorer, EncoderConfig, HeadKind, PredictorModel,
};
use evoguide_core::rng::{stream_rng, Stream};
use evoguide_core::strategies;
use evoguide_core::symreg::{mutate_graph, SymRegTask, TaskName};
use evoguide_core::trainer::{run_train_trigger, ReplayBuffer, TrainSchedule};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::fs;

#[derive(Debug, Clone, Copy)]
pub struct AblateOutcome {
    pub seed: u64,
    pub binary_accuracy: f64,
    pub regression_accuracy: f64,
}

/// Children produced by a vanilla run, in evaluation order.
pub fn collect_dataset(
    task_name: TaskName,
    samples: u64,
    population: usize,
    tournament: usize,
    seed: u64,
) -> Vec<(ProgramGraph, f64)> {
    let task = SymRegTask::new(task_name, seed);
    let mut init = stream_rng(seed, Stream::InitPopulation, 0);
    let mut evo = stream_rng(seed, Stream::Evolution, 0);
    let mut fec = evolution::FecCache::new();
    let mut pop = evolution::init_population(&task, population, &mut init, Some(&mut fec));
    let mut out = Vec::with_capacity(samples as usize);
    for step in 0..samples {
        let child = evolution::regevo_step(
            &mut pop,
            &task,
            Some(&mut fec),
            population as u64 + step,
            |p, r| {
                strategies::vanilla(
                    p,
                    &mut |g: &ProgramGraph, rr: &mut ChaCha8Rng| mutate_graph(g, rr),
                    tournament,
                    r,
                )
            },
            &mut evo,
        );
        out.push((child.graph, child.fitness));
    }
    out
}

/// 80/20 split along evolution order: the held-out tail contains the
/// late, higher-fitness candidates, so a regressor must extrapolate to
/// fitness levels it never saw while a comparator only has to rank.
pub fn split_dataset(
    dataset: &[(ProgramGraph, f64)],
) -> (Vec<(ProgramGraph, f64)>, Vec<(ProgramGraph, f64)>) {
    let cut = dataset.len() * 4 / 5;
    (dataset[..cut].to_vec(), dataset[cut..].to_vec())
}

pub fn train_binary(
    train: &[(ProgramGraph, f64)],
    encoder: EncoderConfig,
    adam_params: &AdamParams,
    epochs: u32,
    batch_size: usize,
    seed: u64,
    salt: u64,
) -> PredictorModel {
    let mut replay = ReplayBuffer::new(train.len().max(1));
    for (g, f) in train {
        replay.push(g.clone(), *f);
    }
    let mut model = PredictorModel::new(
        encoder,
        HeadKind::Binary,
        &mut stream_rng(seed, Stream::ModelInit, salt),
    );
    let mut adam = AdamState::new(model.param_count());
    let schedule = TrainSchedule {
        epochs_per_trigger: epochs,
        batch_size,
        replay_capacity: train.len().max(1),
        ..TrainSchedule::default()
    };
    let mut rng = stream_rng(seed, Stream::Training, 2000 + salt);
    run_train_trigger(&mut model, &mut adam, adam_params, &schedule, &replay, &mut rng);
    model
}

pub fn train_regression(
    train: &[(ProgramGraph, f64)],
    encoder: EncoderConfig,
    adam_params: &AdamParams,
    epochs: u32,
    batch_size: usize,
    seed: u64,
    salt: u64,
) -> PredictorModel {
    let mut model = PredictorModel::new(
        encoder,
        HeadKind::Regression,
        &mut stream_rng(seed, Stream::ModelInit, 100 + salt),
    );
    let mut adam = AdamState::new(model.param_count());
    let mut rng = stream_rng(seed, Stream::Training, 3000 + salt);
    let mut indices: Vec<usize> = (0..train.len()).collect();
    for _ in 0..epochs {
        indices.shuffle(&mut rng);
        for chunk in indices.chunks(batch_size) {
            let batch: Vec<(&ProgramGraph, f64)> =
                chunk.iter().map(|&i| (&train[i].0, train[i].1)).collect();
            if let Ok((_, grad)) = model.loss_and_grad_fitness(&batch) {
                adam.apply(adam_params, model.params_mut(), &grad);
            }
        }
    }
    model
}

/// Sample index pairs with distinct fitness from the test set.
fn sample_eval_pairs(
    test: &[(ProgramGraph, f64)],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(count);
    let mut guard = 0usize;
    while pairs.len() < count && guard < count * 20 {
        guard += 1;
        let a = rng.gen_range(0..test.len());
        let b = rng.gen_range(0..test.len());
        if a == b || test[a].1 == test[b].1 {
            continue;
        }
        pairs.push((a, b));
    }
    pairs
}

/// Held-out pair accuracy of the binary head at threshold one half.
pub fn pair_accuracy_binary(
    model: &PredictorModel,
    test: &[(ProgramGraph, f64)],
    pairs: &[(usize, usize)],
) -> f64 {
    let mut scorer = CachedPairScorer::new(model);
    let mut correct = 0usize;
    for &(a, b) in pairs {
        let predicted = scorer.score(&test[a].0, &test[b].0).probability > 0.5;
        let truth = test[a].1 > test[b].1;
        correct += (predicted == truth) as usize;
    }
    correct as f64 / pairs.len() as f64
}

/// Pair accuracy of the regression head: compare which of the two
/// predicted scores is higher.
pub fn pair_accuracy_regression(
    model: &PredictorModel,
    test: &[(ProgramGraph, f64)],
    pairs: &[(usize, usize)],
) -> f64 {
    let preds: Vec<f64> = test.iter().map(|(g, _)| model.predict_fitness(g)).collect();
    let mut correct = 0usize;
    for &(a, b) in pairs {
        let predicted = preds[a] > preds[b];
        let truth = test[a].1 > test[b].1;
        correct += (predicted == truth) as usize;
    }
    correct as f64 / pairs.len() as f64
}

pub struct AblateSpec {
    pub task: TaskName,
    pub dataset_samples: u64,
    pub epochs: u32,
    pub seeds: u64,
    pub seed: u64,
    pub eval_pairs: usize,
    pub encoder: EncoderConfig,
    pub adam: AdamParams,
}

pub fn run_ablation(spec: &AblateSpec) -> Vec<AblateOutcome> {
    let base = ExperimentConfig::for_task(spec.task);
    let dataset = collect_dataset(
        spec.task,
        spec.dataset_samples,
        base.population_size,
        base.tournament_size,
        spec.seed,
    );
    let adam = spec.adam;

    let (train, test) = split_dataset(&dataset);
    (0..spec.seeds)
        .map(|salt| {
            let binary =
                train_binary(&train, spec.encoder, &adam, spec.epochs, 64, spec.seed, salt);
            let regression =
                train_regression(&train, spec.encoder, &adam, spec.epochs, 64, spec.seed, salt);
            let mut rng = stream_rng(spec.seed, Stream::Training, 4000 + salt);
            let pairs = sample_eval_pairs(&test, spec.eval_pairs, &mut rng);
            AblateOutcome {
                seed: salt,
                binary_accuracy: pair_accuracy_binary(&binary, &test, &pairs),
                regression_accuracy: pair_accuracy_regression(&regression, &test, &pairs),
            }
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite accuracies"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn main(args: &AblateArgs) -> Result<()> {
    let task = runs::parse_task(&args.task)?;
    let spec = AblateSpec {
        task,
        dataset_samples: args.dataset_samples,
        epochs: args.epochs,
        seeds: args.seeds,
        seed: args.seed,
        eval_pairs: args.eval_pairs,
        encoder: EncoderConfig::default(),
        adam: AdamParams { learning_rate: args.learning_rate, ..AdamParams::default() },
    };
    let outcomes = run_ablation(&spec);

    let mut s = String::from("schema_version,seed,binary_accuracy,regression_accuracy\n");
    for o in &outcomes {
        writeln!(s, "1,{},{},{}", o.seed, o.binary_accuracy, o.regression_accuracy)?;
    }
    fs::write(&args.out, s).with_context(|| format!("writing {}", args.out.display()))?;

    let mut bins: Vec<f64> = outcomes.iter().map(|o| o.binary_accuracy).collect();
    let mut regs: Vec<f64> = outcomes.iter().map(|o| o.regression_accuracy).collect();
    println!(
        "median held-out pair accuracy: binary {:.4}, regression {:.4}",
        median(&mut bins),
        median(&mut regs)
    );
    Ok(())
}
