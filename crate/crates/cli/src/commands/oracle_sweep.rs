//! PAM-RT with simulated oracles over an accuracy grid, plus the vanilla
//! baseline, across seeds.

use crate::opts::OracleSweepArgs;
use crate::runs;
use anyhow::{Context, Result};
use evoguide_core::config::{ExperimentConfig, PredictorMode};
use evoguide_core::strategies::StrategyKind;
use std::fmt::Write as _;
use std::fs;

#[derive(Debug, Clone)]
pub struct ArmResult {
    pub arm: String,
    pub accuracy: Option<f64>,
    pub finals: Vec<f64>,
}

impl ArmResult {
    pub fn mean(&self) -> f64 {
        self.finals.iter().sum::<f64>() / self.finals.len() as f64
    }

    pub fn standard_error(&self) -> f64 {
        let n = self.finals.len() as f64;
        let mean = self.mean();
        let var =
            self.finals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

pub fn sweep(args: &OracleSweepArgs) -> Result<Vec<ArmResult>> {
    let task = runs::parse_task(&args.task)?;
    let mut base = ExperimentConfig::for_task(task);
    if let Some(s) = args.samples {
        base.total_samples = s;
    }

    let mut arms: Vec<(String, Option<f64>)> =
        args.accuracies.iter().map(|&a| (format!("pam-rt-a{a}"), Some(a))).collect();
    arms.push(("vanilla".to_string(), None));

    let mut jobs = Vec::new();
    for (arm, accuracy) in &arms {
        for s in 0..args.seeds {
            let mut cfg = base.clone();
            cfg.seed = args.seed_base + s;
            match accuracy {
                Some(a) => {
                    cfg.strategy.kind = StrategyKind::PamRt;
                    cfg.predictor_mode = if *a >= 1.0 {
                        PredictorMode::PerfectOracle
                    } else {
                        PredictorMode::NoisyOracle { accuracy: *a }
                    };
                }
                None => {
                    cfg.strategy.kind = StrategyKind::Vanilla;
                    cfg.predictor_mode = PredictorMode::PerfectOracle; // unused
                }
            }
            let dir = args.out_dir.join(format!("{arm}-seed{}", cfg.seed));
            jobs.push((cfg, dir));
        }
    }

    let logs = runs::run_batch(&jobs, args.threads)?;
    let mut results = Vec::new();
    for (i, (arm, accuracy)) in arms.iter().enumerate() {
        let finals: Vec<f64> = (0..args.seeds as usize)
            .map(|s| logs[i * args.seeds as usize + s].best_fitness)
            .collect();
        results.push(ArmResult { arm: arm.clone(), accuracy: *accuracy, finals });
    }
    Ok(results)
}

pub fn main(args: &OracleSweepArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir)?;
    let results = sweep(args)?;

    let mut s =
        String::from("schema_version,arm,accuracy,seed,final_best_fitness\n");
    for r in &results {
        for (i, f) in r.finals.iter().enumerate() {
            writeln!(
                s,
                "1,{},{},{},{}",
                r.arm,
                r.accuracy.map(|a| a.to_string()).unwrap_or_default(),
                args.seed_base + i as u64,
                f
            )?;
        }
    }
    fs::write(args.out_dir.join("sweep_runs.csv"), s)?;

    let mut s = String::from("schema_version,arm,accuracy,mean_final_best,standard_error\n");
    for r in &results {
        writeln!(
            s,
            "1,{},{},{},{}",
            r.arm,
            r.accuracy.map(|a| a.to_string()).unwrap_or_default(),
            r.mean(),
            r.standard_error()
        )?;
        println!("{}: mean final best {:.4} (se {:.4})", r.arm, r.mean(), r.standard_error());
    }
    fs::write(args.out_dir.join("sweep_summary.csv"), s)
        .with_context(|| format!("writing summary in {}", args.out_dir.display()))?;
    Ok(())
}
