//! CSV emission and parsing for run logs and summaries. Fields never
//! contain separators or quotes, so writing stays plain; parsing accepts
//! the same shape back. Column sets carry a schema version column.

use anyhow::{bail, Context, Result};
use evoguide_core::analysis::ScoreCurves;
use evoguide_core::trainer::StepRecord;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const RUN_SCHEMA_VERSION: u32 = 1;

pub const RUN_HEADER: &str = "schema_version,sample_index,child_fitness,parent_fitness,\
best_fitness,attempts_used,predictor_queries,fec_hit,cumulative_hill_climb_rate,structural_hash";

/// Streaming writer for the per-step run log.
pub struct RunCsvWriter {
    out: BufWriter<fs::File>,
}

impl RunCsvWriter {
    pub fn create(path: &Path) -> Result<RunCsvWriter> {
        let file = fs::File::create(path)
            .with_context(|| format!("creating run log {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{RUN_HEADER}")?;
        Ok(RunCsvWriter { out })
    }

    pub fn write_record(&mut self, r: &StepRecord) -> Result<()> {
        writeln!(self.out, "{}", format_record(r))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn format_record(r: &StepRecord) -> String {
    let mut s = String::with_capacity(96);
    write!(
        s,
        "{},{},{},{},{},{},{},{},{},{}",
        RUN_SCHEMA_VERSION,
        r.sample_index,
        r.child_fitness,
        r.parent_fitness,
        r.best_fitness,
        r.attempts_used,
        r.predictor_queries,
        r.fec_hit,
        r.cumulative_hill_climb_rate,
        r.structural_hash
    )
    .expect("writing to a String cannot fail");
    s
}

pub fn parse_run_csv(text: &str) -> Result<Vec<StepRecord>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty run log")?;
    if header != RUN_HEADER {
        bail!("unrecognized run log header: {header:?}");
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            bail!("run log line {} has {} fields", i + 2, fields.len());
        }
        let version: u32 = fields[0].parse().context("schema_version")?;
        if version != RUN_SCHEMA_VERSION {
            bail!("unsupported run log schema version {version}");
        }
        records.push(StepRecord {
            sample_index: fields[1].parse().context("sample_index")?,
            child_fitness: fields[2].parse().context("child_fitness")?,
            parent_fitness: fields[3].parse().context("parent_fitness")?,
            best_fitness: fields[4].parse().context("best_fitness")?,
            attempts_used: fields[5].parse().context("attempts_used")?,
            predictor_queries: fields[6].parse().context("predictor_queries")?,
            fec_hit: fields[7].parse().context("fec_hit")?,
            cumulative_hill_climb_rate: fields[8].parse().context("hill_climb_rate")?,
            structural_hash: fields[9].parse().context("structural_hash")?,
        });
    }
    Ok(records)
}

/// Threshold curves: `(threshold, accuracy, precision, recall)`.
pub fn write_curves_csv(path: &Path, curves: &ScoreCurves) -> Result<()> {
    let mut s = String::from("schema_version,threshold,accuracy,precision,recall\n");
    for i in 0..curves.thresholds.len() {
        writeln!(
            s,
            "1,{},{},{},{}",
            curves.thresholds[i], curves.accuracy[i], curves.precision[i], curves.recall[i]
        )?;
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// Score histograms: `(bin_low, bin_high, count_negative, count_positive)`.
pub fn write_histogram_csv(path: &Path, curves: &ScoreCurves) -> Result<()> {
    let mut s = String::from("schema_version,bin_low,bin_high,count_negative,count_positive\n");
    for b in &curves.histogram {
        writeln!(s, "1,{},{},{},{}", b.lo, b.hi, b.negatives, b.positives)?;
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}
