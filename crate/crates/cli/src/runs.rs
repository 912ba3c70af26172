//! Run execution: config resolution, artifact layout, checkpoint/resume,
//! and a small helper for running seed batches on threads.

use crate::csvio::{self, RunCsvWriter};
use crate::opts::RunArgs;
use anyhow::{bail, Context, Result};
use evoguide_core::config::{ExperimentConfig, PredictorMode};
use evoguide_core::strategies::StrategyKind;
use evoguide_core::symreg::{SymRegTask, TaskName};
use evoguide_core::trainer::{ExperimentSnapshot, ExperimentState, RunLog, StepRecord};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const CONFIG_FILE: &str = "config.json";
pub const RUN_CSV: &str = "run.csv";
pub const BEST_GRAPH_FILE: &str = "best.graph";
pub const SUMMARY_FILE: &str = "summary.json";
pub const POINTS_FILE: &str = "points.csv";
pub const POPULATION_FILE: &str = "population.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Final counters mirrored into `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub best_fitness: f64,
    pub samples: u64,
    pub evaluations: u64,
    pub fec_hits: u64,
    pub train_triggers: u64,
    pub train_batches: u64,
    pub train_skipped: u64,
    pub predictor_queries: u64,
}

/// Resolve the effective config: file base (when given), then flag
/// overrides. Task and strategy come from flags, the file, or defaults.
pub fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => {
            let task = parse_task(args.task.as_deref().unwrap_or("nguyen5"))?;
            ExperimentConfig::for_task(task)
        }
    };

    if let Some(task) = &args.task {
        let task = parse_task(task)?;
        if args.config.is_none() {
            // Fresh config: re-derive the task-sized sample budget.
            let keep_seed = cfg.seed;
            let strategy = cfg.strategy;
            cfg = ExperimentConfig::for_task(task);
            cfg.seed = keep_seed;
            cfg.strategy = strategy;
        } else {
            cfg.task = task;
        }
    }
    if let Some(s) = &args.strategy {
        cfg.strategy.kind = parse_strategy(s)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.total_samples = samples;
    }
    if let Some(mode) = &args.predictor {
        cfg.predictor_mode = parse_predictor(mode, args.oracle_accuracy)?;
    } else if let Some(acc) = args.oracle_accuracy {
        cfg.predictor_mode = PredictorMode::NoisyOracle { accuracy: acc };
    }
    if let Some(fec) = args.fec {
        cfg.fec = fec;
    }
    if let Some(p) = args.population {
        cfg.population_size = p;
    }
    if let Some(t) = args.tournament {
        cfg.tournament_size = t;
    }
    if let Some(k) = args.max_attempts {
        cfg.strategy.max_attempts = k;
    }
    if let Some(e) = args.epsilon {
        cfg.strategy.epsilon = e;
    }
    if let Some(n) = args.list_size {
        cfg.strategy.pairwise_list_size = n;
    }
    if let Some(i) = args.checkpoint_interval {
        cfg.checkpoint_interval = i;
    }
    cfg.validate().map_err(|e| anyhow::anyhow!("invalid configuration: {e}"))?;
    Ok(cfg)
}

pub fn parse_task(s: &str) -> Result<TaskName> {
    TaskName::from_str(s).with_context(|| format!("unknown task {s:?}"))
}

pub fn parse_strategy(s: &str) -> Result<StrategyKind> {
    StrategyKind::from_str(s).with_context(|| format!("unknown strategy {s:?}"))
}

pub fn parse_predictor(s: &str, accuracy: Option<f64>) -> Result<PredictorMode> {
    Ok(match s {
        "learned" => PredictorMode::Learned,
        "noisy-oracle" => PredictorMode::NoisyOracle {
            accuracy: accuracy.context("--oracle-accuracy is required with noisy-oracle")?,
        },
        "perfect-oracle" => PredictorMode::PerfectOracle,
        _ => bail!("unknown predictor mode {s:?}"),
    })
}

/// Execute a configured run, writing all artifacts into `out_dir`.
/// Returns the in-memory log.
pub fn execute_run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunLog> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating run directory {}", out_dir.display()))?;
    write_config_echo(cfg, out_dir)?;
    let task = SymRegTask::new(cfg.task, cfg.seed);
    fs::write(out_dir.join(POINTS_FILE), task.points_csv())?;

    let mut state = ExperimentState::new(cfg);
    let mut writer = RunCsvWriter::create(&out_dir.join(RUN_CSV))?;
    let mut steps: Vec<StepRecord> = Vec::with_capacity(cfg.total_samples as usize);
    run_steps(cfg, &mut state, &mut writer, &mut steps, out_dir)?;
    writer.finish()?;

    let log = finish_artifacts(&state, steps, out_dir)?;
    Ok(log)
}

/// Resume a checkpointed run from its directory and drive it to the
/// configured budget. The run log is truncated back to the checkpoint
/// step so the final CSV is identical to an uninterrupted run.
pub fn resume_run(out_dir: &Path) -> Result<RunLog> {
    let cfg: ExperimentConfig =
        serde_json::from_str(&fs::read_to_string(out_dir.join(CONFIG_FILE))?)
            .context("parsing config echo for resume")?;
    let snap: ExperimentSnapshot =
        serde_json::from_str(&fs::read_to_string(out_dir.join(CHECKPOINT_FILE))?)
            .context("parsing checkpoint")?;
    let mut state = ExperimentState::restore(&cfg, &snap);

    let existing = fs::read_to_string(out_dir.join(RUN_CSV)).unwrap_or_default();
    let mut steps = if existing.is_empty() {
        Vec::new()
    } else {
        csvio::parse_run_csv(&existing)?
    };
    steps.truncate(state.samples() as usize);

    let mut writer = RunCsvWriter::create(&out_dir.join(RUN_CSV))?;
    for rec in &steps {
        writer.write_record(rec)?;
    }
    run_steps(&cfg, &mut state, &mut writer, &mut steps, out_dir)?;
    writer.finish()?;
    finish_artifacts(&state, steps, out_dir)
}

fn run_steps(
    cfg: &ExperimentConfig,
    state: &mut ExperimentState,
    writer: &mut RunCsvWriter,
    steps: &mut Vec<StepRecord>,
    out_dir: &Path,
) -> Result<()> {
    while !state.is_done() {
        let rec = state.step();
        writer.write_record(&rec)?;
        steps.push(rec);
        if cfg.checkpoint_interval > 0 && state.samples() % cfg.checkpoint_interval == 0 {
            let snap = state.snapshot();
            let tmp = out_dir.join("checkpoint.json.tmp");
            fs::write(&tmp, serde_json::to_string(&snap)?)?;
            fs::rename(&tmp, out_dir.join(CHECKPOINT_FILE))?;
        }
    }
    Ok(())
}

fn finish_artifacts(
    state: &ExperimentState,
    steps: Vec<StepRecord>,
    out_dir: &Path,
) -> Result<RunLog> {
    let mut log = state.counters();
    log.steps = steps;

    fs::write(out_dir.join(BEST_GRAPH_FILE), state.best_graph().serialize())?;
    let summary = RunSummary {
        best_fitness: log.best_fitness,
        samples: state.samples(),
        evaluations: log.evaluations,
        fec_hits: log.fec_hits,
        train_triggers: log.train_triggers,
        train_batches: log.train_batches,
        train_skipped: log.train_skipped,
        predictor_queries: log.predictor_queries,
    };
    fs::write(out_dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&summary)?)?;

    let mut pop_dump = String::new();
    for c in state.population().iter() {
        pop_dump.push_str(&c.graph.serialize());
        pop_dump.push_str(&format!("FITNESS {}\n\n", c.fitness));
    }
    fs::write(out_dir.join(POPULATION_FILE), pop_dump)?;
    Ok(log)
}

pub fn write_config_echo(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    fs::write(out_dir.join(CONFIG_FILE), serde_json::to_string_pretty(cfg)?)
        .with_context(|| format!("writing config echo in {}", out_dir.display()))
}

pub fn read_config_echo(dir: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(dir.join(CONFIG_FILE))
        .with_context(|| format!("reading config echo in {}", dir.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Run many configs on a bounded thread pool, preserving input order.
pub fn run_batch(configs: &[(ExperimentConfig, PathBuf)], threads: usize) -> Result<Vec<RunLog>> {
    let threads = threads.max(1);
    let mut results: Vec<Option<Result<RunLog>>> = Vec::new();
    results.resize_with(configs.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results_ref = std::sync::Mutex::new(&mut results);

    std::thread::scope(|scope| {
        for _ in 0..threads.min(configs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let (cfg, dir) = &configs[i];
                let log = execute_run(cfg, dir);
                results_ref.lock().expect("no poisoned lock")[i] = Some(log);
            });
        }
    });

    results
        .into_iter()
        .map(|r| r.expect("every index was processed"))
        .collect()
}
