use criterion::{criterion_group, criterion_main, Criterion};
use evoguide_core::evolution::{init_population, tournament_select};
use evoguide_core::predictor::{
    CachedPairScorer, EncoderConfig, HeadKind, NoisyOracle, PredictorModel,
};
use evoguide_core::rng::{stream_rng, Stream};
use evoguide_core::strategies::pam_rt;
use evoguide_core::symreg::{mutate_graph, random_graph, SymRegTask, TaskName};
use std::hint::black_box;

fn bench_graph_ops(c: &mut Criterion) {
    let task = SymRegTask::new(TaskName::Nguyen5, 0);
    let mut rng = stream_rng(0, Stream::Evolution, 0);
    let g = task.random_graph(&mut rng);

    c.bench_function("fitness_eval", |b| {
        b.iter(|| black_box(task.fitness(black_box(&g))));
    });
    c.bench_function("structural_hash", |b| {
        b.iter(|| black_box(black_box(&g).structural_hash()));
    });
    c.bench_function("mutate", |b| {
        b.iter(|| black_box(mutate_graph(black_box(&g), &mut rng)));
    });
}

fn bench_predictor(c: &mut Criterion) {
    let mut mrng = stream_rng(0, Stream::ModelInit, 0);
    let model = PredictorModel::new(EncoderConfig::default(), HeadKind::Binary, &mut mrng);
    let mut rng = stream_rng(0, Stream::Evolution, 0);
    let a = random_graph(1, 15, &mut rng);
    let b = random_graph(1, 15, &mut rng);

    c.bench_function("encode", |bch| {
        bch.iter(|| black_box(model.encode(black_box(&a))));
    });
    c.bench_function("pair_gradient", |bch| {
        let batch = vec![(&a, &b, 1.0)];
        bch.iter(|| black_box(model.loss_and_grad_pairs(black_box(&batch)).unwrap()));
    });
}

fn bench_search_step(c: &mut Criterion) {
    let task = SymRegTask::new(TaskName::Nguyen5, 0);
    let mut init = stream_rng(0, Stream::InitPopulation, 0);
    let pop = init_population(&task, 100, &mut init, None);
    let mut evo = stream_rng(0, Stream::Evolution, 0);

    c.bench_function("tournament_25", |b| {
        b.iter(|| black_box(tournament_select(black_box(&pop), 25, &mut evo).fitness));
    });

    let task2 = task.clone();
    let mut oracle = NoisyOracle::new(
        0.8,
        move |g: &evoguide_core::graph::ProgramGraph| task2.fitness(g).fitness,
        stream_rng(0, Stream::Oracle, 0),
    );
    c.bench_function("pam_rt_oracle_step", |b| {
        b.iter(|| {
            let out = pam_rt(
                &pop,
                &mut oracle,
                &mut |g: &evoguide_core::graph::ProgramGraph,
                      r: &mut rand_chacha::ChaCha8Rng| mutate_graph(g, r),
                25,
                64,
                &mut evo,
            );
            black_box(out.attempts_used)
        });
    });

    let mut mrng = stream_rng(0, Stream::ModelInit, 0);
    let model = PredictorModel::new(EncoderConfig::default(), HeadKind::Binary, &mut mrng);
    c.bench_function("pam_rt_learned_step", |b| {
        let mut scorer = CachedPairScorer::new(&model);
        b.iter(|| {
            let out = pam_rt(
                &pop,
                &mut scorer,
                &mut |g: &evoguide_core::graph::ProgramGraph,
                      r: &mut rand_chacha::ChaCha8Rng| mutate_graph(g, r),
                25,
                64,
                &mut evo,
            );
            black_box(out.attempts_used)
        });
    });
}

criterion_group!(benches, bench_graph_ops, bench_predictor, bench_search_step);
criterion_main!(benches);
