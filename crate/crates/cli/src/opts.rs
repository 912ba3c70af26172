//! Command-line surface. Every experiment knob is reachable as a flag;
//! a JSON config file supplies the base values and flags override it.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "evoguide", version, about = "Predictor-guided evolutionary search over DAG programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its artifacts to a directory.
    Run(RunArgs),
    /// Combine logs of repeated runs into mean/CI summaries.
    Aggregate(AggregateArgs),
    /// Train binary and regression heads on a fixed dataset and compare
    /// held-out pair accuracy.
    AblatePredictor(AblateArgs),
    /// Run the guided search with simulated oracles over an accuracy grid.
    OracleSweep(OracleSweepArgs),
    /// Tabulate the closed-form modified hill-climb rate against its
    /// Monte-Carlo estimate over a (q, a) grid.
    HillclimbCheck(HillclimbArgs),
    /// Vanilla evolution with online training but no steering; scores a
    /// candidate fan-out per step and emits accuracy/precision curves.
    Counterfactual(CounterfactualArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Task name: nguyen2|nguyen3|nguyen5|nguyen7|nguyen12.
    #[arg(long)]
    pub task: Option<String>,
    /// Mutation strategy: vanilla|pam|pam-rt|max-pairwise.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Experiment seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for run artifacts.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// JSON config file supplying base values (flags override).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Total evaluated samples.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Pairwise score source: learned|noisy-oracle|perfect-oracle.
    #[arg(long)]
    pub predictor: Option<String>,
    /// Oracle accuracy in [0.5, 1] (noisy-oracle mode).
    #[arg(long)]
    pub oracle_accuracy: Option<f64>,
    /// Functional-equivalence caching on/off.
    #[arg(long)]
    pub fec: Option<bool>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub tournament: Option<usize>,
    /// Retry budget K for the adaptive-mutation strategies.
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// Probability of a vanilla step during guided search.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Children per step for max-pairwise.
    #[arg(long)]
    pub list_size: Option<usize>,
    /// Steps between state checkpoints (0 = off).
    #[arg(long)]
    pub checkpoint_interval: Option<u64>,
    /// Resume from the checkpoint in --out-dir.
    #[arg(long, default_value_t = false)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Run directories with identical configs modulo seed.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Sample checkpoints for mean/CI rows.
    #[arg(long, value_delimiter = ',', default_value = "1000,5000,10000,20000")]
    pub checkpoints: Vec<u64>,
    /// Best-fitness thresholds for samples-to-threshold rows.
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99")]
    pub thresholds: Vec<f64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, default_value = "nguyen5")]
    pub task: String,
    /// Candidates collected from vanilla evolution for the dataset.
    #[arg(long, default_value_t = 10_000)]
    pub dataset_samples: u64,
    /// Training epochs per head.
    #[arg(long, default_value_t = 1000)]
    pub epochs: u32,
    /// Independent training seeds.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    /// Base experiment seed (dataset collection and splits).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Held-out pairs scored per accuracy estimate.
    #[arg(long, default_value_t = 20_000)]
    pub eval_pairs: usize,
    /// Optimizer learning rate for both heads.
    #[arg(long, default_value_t = 1e-4)]
    pub learning_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleSweepArgs {
    #[arg(long, default_value = "nguyen12")]
    pub task: String,
    /// Oracle accuracies; the vanilla baseline always runs too.
    #[arg(long, value_delimiter = ',', default_value = "1.0,0.8,0.6")]
    pub accuracies: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub threads: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct HillclimbArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.3,0.5")]
    pub qs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.8,1.0")]
    pub accs: Vec<f64>,
    /// Retry cap per simulated trial.
    #[arg(long, default_value_t = 10_000)]
    pub attempts: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CounterfactualArgs {
    #[arg(long, default_value = "nguyen5")]
    pub task: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Children scored against the parent per step.
    #[arg(long, default_value_t = 64)]
    pub fan_out: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Score source: learned|perfect|random.
    #[arg(long, default_value = "learned")]
    pub scorer: String,
    /// Also dump every (score, fitness) record.
    #[arg(long, default_value_t = false)]
    pub dump_records: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}
