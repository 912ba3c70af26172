//! Counterfactual analysis of the predictor: train online during vanilla
//! evolution, score a fan-out of children per step, and emit
//! accuracy/precision/recall curves and score histograms.

use crate::csvio;
use crate::opts::CounterfactualArgs;
use crate::runs;
use anyhow::{bail, Context, Result};
use evoguide_core::analysis::{counterfactual_run, CounterfactualScorer};
use evoguide_core::config::ExperimentConfig;
use evoguide_core::strategies::StrategyKind;
use std::fmt::Write as _;
use std::fs;

pub fn parse_scorer(s: &str) -> Result<CounterfactualScorer> {
    Ok(match s {
        "learned" => CounterfactualScorer::LearnedOnline,
        "perfect" => CounterfactualScorer::PerfectOracle,
        "random" => CounterfactualScorer::RandomUniform,
        _ => bail!("unknown scorer {s:?} (expected learned|perfect|random)"),
    })
}

pub fn main(args: &CounterfactualArgs) -> Result<()> {
    let task = runs::parse_task(&args.task)?;
    let scorer = parse_scorer(&args.scorer)?;
    fs::create_dir_all(&args.out_dir)?;

    let mut cfg = ExperimentConfig::for_task(task);
    cfg.seed = args.seed;
    cfg.total_samples = args.samples;
    cfg.strategy.kind = StrategyKind::Vanilla;
    runs::write_config_echo(&cfg, &args.out_dir)?;

    let mut records_csv = if args.dump_records {
        Some(String::from(
            "schema_version,step,candidate,score,candidate_fitness,parent_fitness\n",
        ))
    } else {
        None
    };
    let curves = counterfactual_run(&cfg, args.fan_out, scorer, |rec| {
        if let Some(buf) = records_csv.as_mut() {
            for (i, (s, f)) in
                rec.candidate_scores.iter().zip(&rec.candidate_fitnesses).enumerate()
            {
                writeln!(buf, "1,{},{},{},{},{}", rec.step, i, s, f, rec.parent_fitness)
                    .expect("writing to a String cannot fail");
            }
        }
    });

    csvio::write_curves_csv(&args.out_dir.join("curves.csv"), &curves)?;
    csvio::write_histogram_csv(&args.out_dir.join("histograms.csv"), &curves)?;
    if let Some(buf) = records_csv {
        fs::write(args.out_dir.join("records.csv"), buf)
            .with_context(|| format!("writing records in {}", args.out_dir.display()))?;
    }

    let mid = curves.thresholds.iter().position(|&t| t == 0.5).expect("grid includes 0.5");
    println!(
        "counterfactual stream: {} positives, {} negatives; accuracy@0.5 = {:.4}",
        curves.positives, curves.negatives, curves.accuracy[mid]
    );
    Ok(())
}
