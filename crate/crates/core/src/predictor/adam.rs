//! Adaptive-moment optimizer with decoupled weight decay.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 1e-5,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> AdamState {
        AdamState { m: vec![0.0; param_count], v: vec![0.0; param_count], step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update: decoupled decay first, then the bias-corrected
    /// adaptive-moment move.
    pub fn apply(&mut self, hp: &AdamParams, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "optimizer state size mismatch");
        assert_eq!(params.len(), grad.len(), "gradient size mismatch");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - hp.beta1.powi(t);
        let bc2 = 1.0 - hp.beta2.powi(t);
        let decay = 1.0 - hp.learning_rate * hp.weight_decay;

        for i in 0..params.len() {
            params[i] *= decay;
            let g = grad[i];
            self.m[i] = hp.beta1 * self.m[i] + (1.0 - hp.beta1) * g;
            self.v[i] = hp.beta2 * self.v[i] + (1.0 - hp.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
        }
    }
}
