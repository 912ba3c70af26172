//! Predictor-guided evolutionary search over DAG-encoded programs.
//!
//! The crate implements regularized evolution on a fixed-slot DAG program
//! space (instantiated for symbolic regression), an online-trained pairwise
//! binary discriminator with a message-passing graph encoder, the mutation
//! strategies that couple the two (PAM, PAM-RT, Max-Pairwise), and the
//! hill-climbing analysis used to verify them.

pub mod analysis;
pub mod config;
pub mod evolution;
pub mod graph;
pub mod predictor;
pub mod rng;
pub mod strategies;
pub mod symreg;
pub mod trainer;

pub use config::{ExperimentConfig, PredictorMode};
pub use evolution::{Candidate, FecCache, PopulationBuffer};
pub use graph::{GraphError, GraphHash, NodeOp, ProgramGraph};
pub use predictor::{BinaryScore, EncoderConfig, HeadKind, PredictorModel};
pub use strategies::{StrategyConfig, StrategyKind, StrategyOutcome};
pub use symreg::{FitnessRecord, SymRegTask, TaskName};
pub use trainer::{ReplayBuffer, RunLog, StepRecord, TrainSchedule};
