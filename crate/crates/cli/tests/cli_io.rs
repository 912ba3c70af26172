//! Integration tests for run artifacts, determinism, aggregation
//! arithmetic, and checkpoint resume.

use evoguide_cli::commands::aggregate::{
    checkpoint_stats, samples_to_threshold, threshold_stats, CENSORED_SENTINEL,
};
use evoguide_cli::csvio::parse_run_csv;
use evoguide_cli::opts::RunArgs;
use evoguide_cli::runs::{self, execute_run, resume_run};
use evoguide_core::config::{ExperimentConfig, PredictorMode};
use evoguide_core::predictor::EncoderConfig;
use evoguide_core::strategies::{StrategyConfig, StrategyKind};
use evoguide_core::symreg::TaskName;
use evoguide_core::trainer::{StepRecord, TrainSchedule};
use std::fs;
use std::path::Path;

fn quick_config(seed: u64, samples: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_task(TaskName::Nguyen5);
    cfg.seed = seed;
    cfg.population_size = 25;
    cfg.tournament_size = 6;
    cfg.total_samples = samples;
    cfg.strategy = StrategyConfig { kind: StrategyKind::PamRt, ..Default::default() };
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
        min_data: 25,
        batch_size: 16,
        replay_capacity: 200,
    };
    cfg
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn identical_seeds_produce_byte_identical_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(3, 150);
    execute_run(&cfg, &dir.path().join("a")).unwrap();
    execute_run(&cfg, &dir.path().join("b")).unwrap();
    let a = read(&dir.path().join("a/run.csv"));
    let b = read(&dir.path().join("b/run.csv"));
    assert_eq!(a, b);
    assert_eq!(
        read(&dir.path().join("a/best.graph")),
        read(&dir.path().join("b/best.graph"))
    );
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(5, 120);
    execute_run(&cfg, &dir.path().join("orig")).unwrap();

    // Feed the echoed config back through the CLI resolution path.
    let args = RunArgs {
        task: None,
        strategy: None,
        seed: None,
        out_dir: dir.path().join("replay"),
        config: Some(dir.path().join("orig/config.json")),
        samples: None,
        predictor: None,
        oracle_accuracy: None,
        fec: None,
        population: None,
        tournament: None,
        max_attempts: None,
        epsilon: None,
        list_size: None,
        checkpoint_interval: None,
        resume: false,
    };
    let resolved = runs::resolve_config(&args).unwrap();
    assert_eq!(resolved, cfg);
    execute_run(&resolved, &dir.path().join("replay")).unwrap();
    assert_eq!(
        read(&dir.path().join("orig/run.csv")),
        read(&dir.path().join("replay/run.csv"))
    );
}

#[test]
fn zero_sample_run_logs_only_the_initial_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(7, 0);
    let log = execute_run(&cfg, dir.path()).unwrap();
    assert!(log.steps.is_empty());
    let csv = read(&dir.path().join("run.csv"));
    assert_eq!(csv.lines().count(), 1, "header only");
    let summary = read(&dir.path().join("summary.json"));
    assert!(summary.contains("\"best_fitness\""));
    assert!(dir.path().join("points.csv").exists());
}

fn synth_log(bests: &[f64]) -> Vec<StepRecord> {
    bests
        .iter()
        .enumerate()
        .map(|(i, &b)| StepRecord {
            sample_index: i as u64,
            child_fitness: b,
            parent_fitness: 0.0,
            best_fitness: b,
            attempts_used: 1,
            predictor_queries: 0,
            fec_hit: false,
            cumulative_hill_climb_rate: 0.0,
            structural_hash: i as u64,
        })
        .collect()
}

#[test]
fn aggregate_mean_and_band_match_hand_arithmetic() {
    let logs = vec![synth_log(&[0.1, 0.4]), synth_log(&[0.2, 0.6])];
    let rows = checkpoint_stats(&logs, &[2]).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!((r.mean_best - 0.5).abs() < 1e-12);
    assert!((r.standard_error - 0.1).abs() < 1e-12);
    assert!((r.lo - 0.3).abs() < 1e-12);
    assert!((r.hi - 0.7).abs() < 1e-12);
}

#[test]
fn aggregate_identical_runs_have_zero_se() {
    let logs = vec![synth_log(&[0.3, 0.5]), synth_log(&[0.3, 0.5])];
    let rows = checkpoint_stats(&logs, &[1, 2]).unwrap();
    for r in rows {
        assert_eq!(r.standard_error, 0.0);
        assert_eq!(r.lo, r.hi);
    }
}

#[test]
fn unreached_threshold_is_censored() {
    let logs = vec![synth_log(&[0.1, 0.2]), synth_log(&[0.15, 0.25])];
    let rows = threshold_stats(&logs, &[0.2, 0.9]);
    assert_eq!(rows[0].median_samples, 2);
    assert!(!rows[0].censored);
    assert!(rows[1].censored);
    assert_eq!(rows[1].median_samples, CENSORED_SENTINEL);
    assert_eq!(samples_to_threshold(&logs[0], 0.9), None);
}

#[test]
fn aggregate_refuses_mismatched_configs() {
    let dir = tempfile::tempdir().unwrap();
    let a = quick_config(1, 40);
    let mut b = quick_config(2, 40);
    b.tournament_size = 9; // a real config difference beyond the seed
    execute_run(&a, &dir.path().join("a")).unwrap();
    execute_run(&b, &dir.path().join("b")).unwrap();

    let args = evoguide_cli::opts::AggregateArgs {
        runs: vec![dir.path().join("a"), dir.path().join("b")],
        checkpoints: vec![10],
        thresholds: vec![0.5],
        out: dir.path().join("summary.csv"),
    };
    let err = evoguide_cli::commands::aggregate::main(&args).unwrap_err();
    assert!(err.to_string().contains("different configuration"));
}

#[test]
fn run_csv_parses_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(11, 60);
    let log = execute_run(&cfg, dir.path()).unwrap();
    let parsed = parse_run_csv(&read(&dir.path().join("run.csv"))).unwrap();
    assert_eq!(parsed.len(), log.steps.len());
    for (a, b) in parsed.iter().zip(&log.steps) {
        assert_eq!(a, b);
    }
    // best_fitness column is nondecreasing.
    for w in parsed.windows(2) {
        assert!(w[1].best_fitness >= w[0].best_fitness);
    }
}

#[test]
fn resume_from_checkpoint_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut full = quick_config(13, 220);
    full.checkpoint_interval = 100;
    execute_run(&full, &dir.path().join("full")).unwrap();

    // Simulate an interruption at sample 150: run a truncated budget,
    // then restore the intended budget and resume.
    let mut cut = full.clone();
    cut.total_samples = 150;
    cut.checkpoint_interval = 50;
    let resumed_dir = dir.path().join("resumed");
    execute_run(&cut, &resumed_dir).unwrap();
    fs::write(
        resumed_dir.join("config.json"),
        serde_json::to_string_pretty(&full).unwrap(),
    )
    .unwrap();
    resume_run(&resumed_dir).unwrap();

    assert_eq!(
        read(&dir.path().join("full/run.csv")),
        read(&resumed_dir.join("run.csv"))
    );
    assert_eq!(
        read(&dir.path().join("full/best.graph")),
        read(&resumed_dir.join("best.graph"))
    );
    assert_eq!(
        read(&dir.path().join("full/summary.json")),
        read(&resumed_dir.join("summary.json"))
    );
}

#[test]
fn invalid_configurations_are_rejected_with_diagnostics() {
    let base = RunArgs {
        task: Some("nguyen99".into()),
        strategy: None,
        seed: Some(0),
        out_dir: "/tmp/never-used".into(),
        config: None,
        samples: None,
        predictor: None,
        oracle_accuracy: None,
        fec: None,
        population: None,
        tournament: None,
        max_attempts: None,
        epsilon: None,
        list_size: None,
        checkpoint_interval: None,
        resume: false,
    };
    let err = runs::resolve_config(&base).unwrap_err();
    assert!(err.to_string().contains("unknown task"));

    let mut bad_strategy = base;
    bad_strategy.task = Some("nguyen5".into());
    bad_strategy.strategy = Some("hillclimb".into());
    let err = runs::resolve_config(&bad_strategy).unwrap_err();
    assert!(err.to_string().contains("unknown strategy"));

    let mut bad_acc = RunArgs {
        task: Some("nguyen5".into()),
        strategy: Some("pam-rt".into()),
        predictor: Some("noisy-oracle".into()),
        oracle_accuracy: Some(0.3),
        ..bad_strategy
    };
    bad_acc.strategy = Some("pam-rt".into());
    let err = runs::resolve_config(&bad_acc).unwrap_err();
    assert!(err.to_string().contains("accuracy"));
}

#[test]
fn population_dump_and_points_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(17, 30);
    execute_run(&cfg, dir.path()).unwrap();
    let pop = read(&dir.path().join("population.txt"));
    assert_eq!(pop.matches("FITNESS ").count(), cfg.population_size);
    let points = read(&dir.path().join("points.csv"));
    assert_eq!(points.lines().count(), 21);
}
