//! Experiment configuration: one validated struct drives a whole run.

use crate::predictor::{AdamParams, EncoderConfig};
use crate::strategies::StrategyConfig;
use crate::symreg::TaskName;
use crate::trainer::TrainSchedule;
use serde::{Deserialize, Serialize};

/// Where pairwise scores come from during predictor-guided steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PredictorMode {
    /// The online-trained binary model.
    Learned,
    /// Ground-truth ordering flipped with probability `1 - accuracy`.
    NoisyOracle { accuracy: f64 },
    /// Ground-truth ordering, never flipped.
    PerfectOracle,
}

impl PredictorMode {
    pub fn is_learned(self) -> bool {
        matches!(self, PredictorMode::Learned)
    }

    /// Oracle accuracy when this mode simulates one.
    pub fn oracle_accuracy(self) -> Option<f64> {
        match self {
            PredictorMode::Learned => None,
            PredictorMode::NoisyOracle { accuracy } => Some(accuracy),
            PredictorMode::PerfectOracle => Some(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskName,
    pub strategy: StrategyConfig,
    pub population_size: usize,
    pub tournament_size: usize,
    pub total_samples: u64,
    pub seed: u64,
    pub fec: bool,
    pub predictor_mode: PredictorMode,
    pub encoder: EncoderConfig,
    pub schedule: TrainSchedule,
    pub adam: AdamParams,
    /// Steps between state checkpoints; 0 disables checkpointing.
    pub checkpoint_interval: u64,
}

impl ExperimentConfig {
    /// Defaults for a task: population 100, tournament 25, replay buffer
    /// 10k, min data 100, and a sample budget sized to the task.
    pub fn for_task(task: TaskName) -> ExperimentConfig {
        ExperimentConfig {
            task,
            strategy: StrategyConfig::default(),
            population_size: 100,
            tournament_size: 25,
            total_samples: default_samples(task),
            seed: 0,
            fec: true,
            predictor_mode: PredictorMode::Learned,
            encoder: EncoderConfig::default(),
            schedule: TrainSchedule::default(),
            adam: AdamParams::default(),
            checkpoint_interval: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.population_size < 1 {
            return Err("population_size must be at least 1".into());
        }
        if self.tournament_size < 1 {
            return Err("tournament_size must be at least 1".into());
        }
        self.strategy.validate()?;
        self.encoder.validate()?;
        self.schedule.validate()?;
        if let PredictorMode::NoisyOracle { accuracy } = self.predictor_mode {
            if !(0.5..=1.0).contains(&accuracy) {
                return Err("oracle accuracy must be in [0.5, 1]".into());
            }
        }
        Ok(())
    }
}

pub fn default_samples(task: TaskName) -> u64 {
    match task {
        TaskName::Nguyen12 => 100_000,
        _ => 20_000,
    }
}
