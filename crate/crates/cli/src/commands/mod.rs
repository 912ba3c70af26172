pub mod ablate;
pub mod aggregate;
pub mod counterfactual;
pub mod hillclimb;
pub mod oracle_sweep;
pub mod run;
