//! Multi-seed aggregation: mean best-fitness with +/-2 standard-error
//! bands at sample checkpoints, and median samples-to-threshold.

use crate::csvio;
use crate::opts::AggregateArgs;
use crate::runs;
use anyhow::{bail, Context, Result};
use evoguide_core::config::ExperimentConfig;
use evoguide_core::trainer::StepRecord;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const CENSORED_SENTINEL: i64 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRow {
    pub checkpoint: u64,
    pub mean_best: f64,
    pub standard_error: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub threshold: f64,
    /// Median samples to reach the threshold; sentinel when censored.
    pub median_samples: i64,
    pub censored: bool,
}

pub fn main(args: &AggregateArgs) -> Result<()> {
    let mut logs = Vec::new();
    let mut base: Option<ExperimentConfig> = None;
    for dir in &args.runs {
        let cfg = runs::read_config_echo(dir)?;
        let mut keyed = cfg.clone();
        keyed.seed = 0;
        match &base {
            None => base = Some(keyed),
            Some(b) => {
                if *b != keyed {
                    bail!(
                        "run {} was produced under a different configuration; \
                         aggregation refuses to mix them",
                        dir.display()
                    );
                }
            }
        }
        logs.push(read_records(dir)?);
    }
    if logs.len() < 2 {
        bail!("aggregation needs at least 2 runs");
    }

    let checkpoint_rows = checkpoint_stats(&logs, &args.checkpoints)?;
    let threshold_rows = threshold_stats(&logs, &args.thresholds);
    write_summary(&args.out, &checkpoint_rows, &threshold_rows)?;
    println!("aggregated {} runs into {}", logs.len(), args.out.display());
    Ok(())
}

fn read_records(dir: &Path) -> Result<Vec<StepRecord>> {
    let text = fs::read_to_string(dir.join(runs::RUN_CSV))
        .with_context(|| format!("reading {}", dir.join(runs::RUN_CSV).display()))?;
    csvio::parse_run_csv(&text)
}

/// Best fitness observed by each run at a sample count.
fn best_at(records: &[StepRecord], checkpoint: u64) -> Option<f64> {
    if records.is_empty() || checkpoint == 0 {
        return None;
    }
    let idx = ((checkpoint - 1) as usize).min(records.len() - 1);
    Some(records[idx].best_fitness)
}

pub fn checkpoint_stats(logs: &[Vec<StepRecord>], checkpoints: &[u64]) -> Result<Vec<CheckpointRow>> {
    let mut rows = Vec::new();
    for &c in checkpoints {
        let values: Vec<f64> = logs.iter().filter_map(|l| best_at(l, c)).collect();
        if values.len() != logs.len() {
            continue; // checkpoint beyond some run's log
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        rows.push(CheckpointRow {
            checkpoint: c,
            mean_best: mean,
            standard_error: se,
            lo: mean - 2.0 * se,
            hi: mean + 2.0 * se,
        });
    }
    Ok(rows)
}

/// Samples needed by one run to reach a best-fitness threshold.
pub fn samples_to_threshold(records: &[StepRecord], threshold: f64) -> Option<u64> {
    records
        .iter()
        .find(|r| r.best_fitness >= threshold)
        .map(|r| r.sample_index + 1)
}

pub fn threshold_stats(logs: &[Vec<StepRecord>], thresholds: &[f64]) -> Vec<ThresholdRow> {
    let mut rows = Vec::new();
    for &t in thresholds {
        // Censored runs sort last; the median is censored when it lands
        // on one of them.
        let mut reached: Vec<Option<u64>> =
            logs.iter().map(|l| samples_to_threshold(l, t)).collect();
        reached.sort_by_key(|v| v.unwrap_or(u64::MAX));
        let mid = reached.len() / 2;
        let median = if reached.len() % 2 == 1 {
            reached[mid]
        } else {
            match (reached[mid - 1], reached[mid]) {
                (Some(a), Some(b)) => Some((a + b) / 2),
                _ => None,
            }
        };
        rows.push(match median {
            Some(m) => ThresholdRow { threshold: t, median_samples: m as i64, censored: false },
            None => ThresholdRow {
                threshold: t,
                median_samples: CENSORED_SENTINEL,
                censored: true,
            },
        });
    }
    rows
}

fn write_summary(
    path: &Path,
    checkpoints: &[CheckpointRow],
    thresholds: &[ThresholdRow],
) -> Result<()> {
    let mut s = String::from(
        "schema_version,kind,at,mean_best,standard_error,band_lo,band_hi,median_samples,censored\n",
    );
    for r in checkpoints {
        writeln!(
            s,
            "1,checkpoint,{},{},{},{},{},,",
            r.checkpoint, r.mean_best, r.standard_error, r.lo, r.hi
        )?;
    }
    for r in thresholds {
        writeln!(s, "1,threshold,{},,,,,{},{}", r.threshold, r.median_samples, r.censored)?;
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}
