//! The pairwise binary discriminator: a message-passing graph encoder
//! with edge features, a pairwise binary head (and an alternative
//! regression head for ablations), and exact reverse-mode gradients for
//! both.
//!
//! Per layer, each active edge contributes a message
//! `relu(W_msg . concat(state[src], edge_embed[pos]) + b_msg)`; messages
//! are sum-aggregated at the destination and the node state is updated as
//! `relu(W_upd . (state[v] + agg[v]) + b_upd)`. The graph embedding is
//! the elementwise sum of final node states over the active subgraph, so
//! it is invariant to slot relabeling.

mod adam;
mod checkpoint;
mod oracle;

pub use adam::{AdamParams, AdamState};
pub use checkpoint::CheckpointError;
pub use oracle::{noisy_oracle_predict, NoisyOracle};

use crate::graph::{NodeOp, ProgramGraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

/// Encoder dimensions. Node states flow through the update MLP by
/// elementwise addition, so `node_embed_dim` and `graph_dim` must equal
/// `hidden_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub node_embed_dim: usize,
    pub edge_embed_dim: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub graph_dim: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            node_embed_dim: 64,
            edge_embed_dim: 16,
            hidden_dim: 64,
            num_layers: 3,
            graph_dim: 64,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.node_embed_dim == 0
            || self.edge_embed_dim == 0
            || self.hidden_dim == 0
            || self.num_layers == 0
            || self.graph_dim == 0
        {
            return Err("encoder dimensions must be positive".into());
        }
        if self.graph_dim != self.hidden_dim || self.node_embed_dim != self.hidden_dim {
            return Err("node_embed_dim and graph_dim must equal hidden_dim".into());
        }
        Ok(())
    }
}

/// Which output head the model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadKind {
    Binary,
    Regression,
}

/// A pairwise score: `probability = sigmoid(logit)`, read as the chance
/// that the first argument beats the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryScore {
    pub logit: f64,
    pub probability: f64,
}

impl BinaryScore {
    pub fn from_logit(logit: f64) -> BinaryScore {
        BinaryScore { logit, probability: sigmoid(logit) }
    }

    /// Discrete vote in {-1, +1}; a zero logit votes for the first
    /// argument.
    pub fn vote(&self) -> i32 {
        if self.logit >= 0.0 {
            1
        } else {
            -1
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Anything that can score an ordered pair of candidates: the learned
/// model, or a simulated oracle that owns its own randomness stream for
/// flips and tie coins.
pub trait PairPredictor {
    fn predict(&mut self, first: &ProgramGraph, second: &ProgramGraph) -> BinaryScore;
}

/// Training-step failures surfaced to the caller; the search loop logs
/// and skips rather than halting.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptyBatch,
    NonFiniteLoss(f64),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyBatch => write!(f, "empty training batch"),
            TrainError::NonFiniteLoss(l) => write!(f, "non-finite training loss ({l})"),
        }
    }
}

impl std::error::Error for TrainError {}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    num_ops: usize,
    h: usize,
    e: usize,
    layers: usize,
    head: HeadKind,
    layer_base: usize,
    layer_stride: usize,
    head_base: usize,
    total: usize,
}

impl Layout {
    fn new(config: &EncoderConfig, head: HeadKind, num_ops: usize) -> Layout {
        let h = config.hidden_dim;
        let e = config.edge_embed_dim;
        let layer_base = num_ops * h + 2 * e;
        // per layer: w_msg [h x (h+e)], b_msg [h], w_upd [h x h], b_upd [h]
        let layer_stride = h * (h + e) + h + h * h + h;
        let head_base = layer_base + config.num_layers * layer_stride;
        let head_in = match head {
            HeadKind::Binary => 2 * h,
            HeadKind::Regression => h,
        };
        // head: w1 [h x head_in], b1 [h], w2 [h], b2 [1]
        let total = head_base + h * head_in + h + h + 1;
        Layout {
            num_ops,
            h,
            e,
            layers: config.num_layers,
            head,
            layer_base,
            layer_stride,
            head_base,
            total,
        }
    }

    fn node_embed(&self, op_index: usize) -> Range<usize> {
        let s = op_index * self.h;
        s..s + self.h
    }

    fn edge_embed(&self, pos: usize) -> Range<usize> {
        let s = self.num_ops * self.h + pos * self.e;
        s..s + self.e
    }

    fn w_msg(&self, layer: usize) -> Range<usize> {
        let s = self.layer_base + layer * self.layer_stride;
        s..s + self.h * (self.h + self.e)
    }

    fn b_msg(&self, layer: usize) -> Range<usize> {
        let s = self.w_msg(layer).end;
        s..s + self.h
    }

    fn w_upd(&self, layer: usize) -> Range<usize> {
        let s = self.b_msg(layer).end;
        s..s + self.h * self.h
    }

    fn b_upd(&self, layer: usize) -> Range<usize> {
        let s = self.w_upd(layer).end;
        s..s + self.h
    }

    fn head_in(&self) -> usize {
        match self.head {
            HeadKind::Binary => 2 * self.h,
            HeadKind::Regression => self.h,
        }
    }

    fn head_w1(&self) -> Range<usize> {
        self.head_base..self.head_base + self.h * self.head_in()
    }

    fn head_b1(&self) -> Range<usize> {
        let s = self.head_w1().end;
        s..s + self.h
    }

    fn head_w2(&self) -> Range<usize> {
        let s = self.head_b1().end;
        s..s + self.h
    }

    fn head_b2(&self) -> usize {
        self.head_w2().end
    }
}

/// Graph encoder plus output head over a flat parameter vector. Forward
/// passes never mutate parameters; training owns the model mutably.
#[derive(Debug, Clone)]
pub struct PredictorModel {
    config: EncoderConfig,
    head: HeadKind,
    layout: Layout,
    params: Vec<f64>,
}

impl PredictorModel {
    /// Fresh model: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)],
    /// embeddings standard normal scaled by 0.1.
    pub fn new(config: EncoderConfig, head: HeadKind, rng: &mut ChaCha8Rng) -> PredictorModel {
        config.validate().expect("invalid encoder configuration");
        let layout = Layout::new(&config, head, NodeOp::KIND_COUNT);
        let mut params = vec![0.0; layout.total];

        for i in 0..layout.layer_base {
            params[i] = 0.1 * standard_normal(rng);
        }
        for l in 0..layout.layers {
            init_linear(&mut params, layout.w_msg(l), layout.b_msg(l), layout.h + layout.e, rng);
            init_linear(&mut params, layout.w_upd(l), layout.b_upd(l), layout.h, rng);
        }
        init_linear(&mut params, layout.head_w1(), layout.head_b1(), layout.head_in(), rng);
        let w2 = layout.head_w2();
        let b2 = layout.head_b2();
        init_linear(&mut params, w2, b2..b2 + 1, layout.h, rng);

        PredictorModel { config, head, layout, params }
    }

    pub fn from_params(
        config: EncoderConfig,
        head: HeadKind,
        params: Vec<f64>,
    ) -> Result<PredictorModel, String> {
        config.validate()?;
        let layout = Layout::new(&config, head, NodeOp::KIND_COUNT);
        if params.len() != layout.total {
            return Err(format!(
                "parameter count mismatch: layout wants {}, got {}",
                layout.total,
                params.len()
            ));
        }
        Ok(PredictorModel { config, head, layout, params })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn head_kind(&self) -> HeadKind {
        self.head
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Graph embedding of the active subgraph.
    pub fn encode(&self, g: &ProgramGraph) -> Vec<f64> {
        self.encode_tape(g).embedding
    }

    /// Pairwise score that `first` has higher fitness than `second`.
    pub fn predict_pair(&self, first: &ProgramGraph, second: &ProgramGraph) -> BinaryScore {
        let e1 = self.encode(first);
        let e2 = self.encode(second);
        self.pair_score_from_embeddings(&e1, &e2)
    }

    /// Binary-head score over precomputed embeddings.
    pub fn pair_score_from_embeddings(&self, e1: &[f64], e2: &[f64]) -> BinaryScore {
        assert_eq!(self.head, HeadKind::Binary, "pair prediction needs the binary head");
        let mut joint = Vec::with_capacity(2 * self.layout.h);
        joint.extend_from_slice(e1);
        joint.extend_from_slice(e2);
        let (logit, _, _) = self.head_forward(&joint);
        BinaryScore::from_logit(logit)
    }

    /// Scalar fitness prediction (regression head; ablation only).
    pub fn predict_fitness(&self, g: &ProgramGraph) -> f64 {
        assert_eq!(self.head, HeadKind::Regression, "fitness prediction needs the regression head");
        let e = self.encode(g);
        let (out, _, _) = self.head_forward(&e);
        out
    }

    /// Mean binary cross entropy and its exact gradient over labeled
    /// pairs. Labels are 1.0 when the first graph is the better one.
    pub fn loss_and_grad_pairs(
        &self,
        batch: &[(&ProgramGraph, &ProgramGraph, f64)],
    ) -> Result<(f64, Vec<f64>), TrainError> {
        assert_eq!(self.head, HeadKind::Binary, "pair loss needs the binary head");
        if batch.is_empty() {
            return Err(TrainError::EmptyBatch);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; self.layout.total];
        let mut loss = 0.0;

        for &(g1, g2, label) in batch {
            let t1 = self.encode_tape(g1);
            let t2 = self.encode_tape(g2);
            let mut joint = Vec::with_capacity(2 * self.layout.h);
            joint.extend_from_slice(&t1.embedding);
            joint.extend_from_slice(&t2.embedding);
            let (logit, z1_pre, z1) = self.head_forward(&joint);
            loss += scale * bce_with_logit(logit, label);

            let d_logit = scale * (sigmoid(logit) - label);
            let d_joint = self.head_backward(&joint, &z1_pre, &z1, d_logit, &mut grad);
            let h = self.layout.h;
            self.encoder_backward(&t1, &d_joint[..h], &mut grad);
            self.encoder_backward(&t2, &d_joint[h..], &mut grad);
        }

        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss(loss));
        }
        Ok((loss, grad))
    }

    /// Mean squared error and gradient over (graph, fitness) targets.
    pub fn loss_and_grad_fitness(
        &self,
        batch: &[(&ProgramGraph, f64)],
    ) -> Result<(f64, Vec<f64>), TrainError> {
        assert_eq!(self.head, HeadKind::Regression, "fitness loss needs the regression head");
        if batch.is_empty() {
            return Err(TrainError::EmptyBatch);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; self.layout.total];
        let mut loss = 0.0;

        for &(g, target) in batch {
            let tape = self.encode_tape(g);
            let (pred, z1_pre, z1) = self.head_forward(&tape.embedding);
            let err = pred - target;
            loss += scale * err * err;
            let d_pred = scale * 2.0 * err;
            let d_embed = self.head_backward(&tape.embedding, &z1_pre, &z1, d_pred, &mut grad);
            self.encoder_backward(&tape, &d_embed, &mut grad);
        }

        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss(loss));
        }
        Ok((loss, grad))
    }

    // ---- forward/backward internals ----

    fn head_forward(&self, input: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let l = &self.layout;
        debug_assert_eq!(input.len(), l.head_in());
        let w1 = &self.params[l.head_w1()];
        let b1 = &self.params[l.head_b1()];
        let mut z1_pre = vec![0.0; l.h];
        matvec(w1, input, b1, &mut z1_pre);
        let z1: Vec<f64> = z1_pre.iter().map(|&v| v.max(0.0)).collect();
        let w2 = &self.params[l.head_w2()];
        let out = dot(w2, &z1) + self.params[l.head_b2()];
        (out, z1_pre, z1)
    }

    /// Backprop through the head; returns the gradient wrt the head
    /// input.
    fn head_backward(
        &self,
        input: &[f64],
        z1_pre: &[f64],
        z1: &[f64],
        d_out: f64,
        grad: &mut [f64],
    ) -> Vec<f64> {
        let l = &self.layout;
        let w2 = &self.params[l.head_w2()];

        grad[l.head_b2()] += d_out;
        let gw2 = l.head_w2();
        for (g, &z) in grad[gw2].iter_mut().zip(z1) {
            *g += d_out * z;
        }

        let mut d_z1_pre = vec![0.0; l.h];
        for r in 0..l.h {
            if z1_pre[r] > 0.0 {
                d_z1_pre[r] = d_out * w2[r];
            }
        }

        let cols = l.head_in();
        let w1_range = l.head_w1();
        let mut d_input = vec![0.0; cols];
        {
            let w1 = &self.params[w1_range.clone()];
            for r in 0..l.h {
                let d = d_z1_pre[r];
                if d == 0.0 {
                    continue;
                }
                let row = &w1[r * cols..(r + 1) * cols];
                for (di, &w) in d_input.iter_mut().zip(row) {
                    *di += d * w;
                }
            }
        }
        {
            let gw1 = &mut grad[w1_range];
            for r in 0..l.h {
                let d = d_z1_pre[r];
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw1[r * cols..(r + 1) * cols];
                for (g, &x) in row.iter_mut().zip(input) {
                    *g += d * x;
                }
            }
        }
        let gb1 = l.head_b1();
        for (g, &d) in grad[gb1].iter_mut().zip(&d_z1_pre) {
            *g += d;
        }
        d_input
    }

    fn encode_tape(&self, g: &ProgramGraph) -> Tape {
        let l = &self.layout;
        let h = l.h;
        let mask = g.active_mask();
        let mut dense = vec![usize::MAX; g.len()];
        let mut active = Vec::new();
        for slot in 0..g.len() {
            if mask[slot] {
                dense[slot] = active.len();
                active.push(slot);
            }
        }
        let n = active.len();

        let mut edges = Vec::new();
        for (dst_dense, &slot) in active.iter().enumerate() {
            for (pos, &src) in g.node(slot).inputs().iter().enumerate() {
                edges.push(Edge { src: dense[src as usize], pos, dst: dst_dense });
            }
        }

        let mut states = Vec::with_capacity(l.layers + 1);
        let mut state0 = vec![0.0; n * h];
        for (i, &slot) in active.iter().enumerate() {
            let emb = &self.params[l.node_embed(g.node(slot).op.index())];
            state0[i * h..(i + 1) * h].copy_from_slice(emb);
        }
        states.push(state0);

        let mut m_pre_all = Vec::with_capacity(l.layers);
        let mut u_pre_all = Vec::with_capacity(l.layers);
        let mut sums_all = Vec::with_capacity(l.layers);

        let mut msg_in = vec![0.0; h + l.e];
        for layer in 0..l.layers {
            let prev = states.last().expect("states non-empty");
            let w_msg = &self.params[l.w_msg(layer)];
            let b_msg = &self.params[l.b_msg(layer)];
            let w_upd = &self.params[l.w_upd(layer)];
            let b_upd = &self.params[l.b_upd(layer)];

            let mut m_pre = vec![0.0; edges.len() * h];
            let mut agg = vec![0.0; n * h];
            for (ei, edge) in edges.iter().enumerate() {
                msg_in[..h].copy_from_slice(&prev[edge.src * h..(edge.src + 1) * h]);
                msg_in[h..].copy_from_slice(&self.params[l.edge_embed(edge.pos)]);
                let out = &mut m_pre[ei * h..(ei + 1) * h];
                matvec(w_msg, &msg_in, b_msg, out);
                let dst = &mut agg[edge.dst * h..(edge.dst + 1) * h];
                for (a, &m) in dst.iter_mut().zip(out.iter()) {
                    *a += m.max(0.0);
                }
            }

            let mut sums = vec![0.0; n * h];
            for i in 0..n * h {
                sums[i] = prev[i] + agg[i];
            }
            let mut u_pre = vec![0.0; n * h];
            let mut next = vec![0.0; n * h];
            for v in 0..n {
                let sum_v = &sums[v * h..(v + 1) * h];
                let out = &mut u_pre[v * h..(v + 1) * h];
                matvec(w_upd, sum_v, b_upd, out);
                for (nx, &u) in next[v * h..(v + 1) * h].iter_mut().zip(out.iter()) {
                    *nx = u.max(0.0);
                }
            }

            m_pre_all.push(m_pre);
            u_pre_all.push(u_pre);
            sums_all.push(sums);
            states.push(next);
        }

        let last = states.last().expect("states non-empty");
        let mut embedding = vec![0.0; h];
        for v in 0..n {
            for (e, &s) in embedding.iter_mut().zip(&last[v * h..(v + 1) * h]) {
                *e += s;
            }
        }

        Tape {
            active_ops: active.iter().map(|&s| g.node(s).op.index()).collect(),
            edges,
            states,
            m_pre: m_pre_all,
            u_pre: u_pre_all,
            sums: sums_all,
            embedding,
        }
    }

    fn encoder_backward(&self, tape: &Tape, d_embedding: &[f64], grad: &mut [f64]) {
        let l = &self.layout;
        let h = l.h;
        let n = tape.active_ops.len();

        // Sum pooling broadcasts the embedding gradient to every node.
        let mut d_state = vec![0.0; n * h];
        for v in 0..n {
            d_state[v * h..(v + 1) * h].copy_from_slice(d_embedding);
        }

        let mut msg_in = vec![0.0; h + l.e];
        for layer in (0..l.layers).rev() {
            let prev = &tape.states[layer];
            let u_pre = &tape.u_pre[layer];
            let m_pre = &tape.m_pre[layer];
            let sums = &tape.sums[layer];
            let w_upd = &self.params[l.w_upd(layer)];
            let w_msg = &self.params[l.w_msg(layer)];

            // Through the update MLP: d_sum = W_upd^T (d_state . relu').
            let mut d_sum = vec![0.0; n * h];
            {
                let gw_range = l.w_upd(layer);
                let gb_range = l.b_upd(layer);
                for v in 0..n {
                    for r in 0..h {
                        let pre = u_pre[v * h + r];
                        if pre <= 0.0 {
                            continue;
                        }
                        let delta = d_state[v * h + r];
                        if delta == 0.0 {
                            continue;
                        }
                        grad[gb_range.start + r] += delta;
                        let row = &w_upd[r * h..(r + 1) * h];
                        let sum_v = &sums[v * h..(v + 1) * h];
                        let grow =
                            &mut grad[gw_range.start + r * h..gw_range.start + (r + 1) * h];
                        let ds = &mut d_sum[v * h..(v + 1) * h];
                        for c in 0..h {
                            grow[c] += delta * sum_v[c];
                            ds[c] += delta * row[c];
                        }
                    }
                }
            }

            // d_sum splits into the self path and the aggregated-message
            // path; the latter fans out over incoming edges.
            let mut d_prev = d_sum.clone();

            let msg_cols = h + l.e;
            let gw_msg = l.w_msg(layer);
            let gb_msg = l.b_msg(layer);
            for (ei, edge) in tape.edges.iter().enumerate() {
                let d_agg = &d_sum[edge.dst * h..(edge.dst + 1) * h];
                let pre = &m_pre[ei * h..(ei + 1) * h];
                msg_in[..h].copy_from_slice(&prev[edge.src * h..(edge.src + 1) * h]);
                msg_in[h..].copy_from_slice(&self.params[l.edge_embed(edge.pos)]);

                let ge_range = l.edge_embed(edge.pos);
                for r in 0..h {
                    if pre[r] <= 0.0 {
                        continue;
                    }
                    let delta = d_agg[r];
                    if delta == 0.0 {
                        continue;
                    }
                    grad[gb_msg.start + r] += delta;
                    let row = &w_msg[r * msg_cols..(r + 1) * msg_cols];
                    let grow = &mut grad
                        [gw_msg.start + r * msg_cols..gw_msg.start + (r + 1) * msg_cols];
                    for c in 0..msg_cols {
                        grow[c] += delta * msg_in[c];
                    }
                    let dp = &mut d_prev[edge.src * h..(edge.src + 1) * h];
                    for c in 0..h {
                        dp[c] += delta * row[c];
                    }
                    let gedge = &mut grad[ge_range.clone()];
                    for c in 0..l.e {
                        gedge[c] += delta * row[h + c];
                    }
                }
            }

            d_state = d_prev;
        }

        for (v, &op) in tape.active_ops.iter().enumerate() {
            let ge = l.node_embed(op);
            for (g, &d) in grad[ge].iter_mut().zip(&d_state[v * h..(v + 1) * h]) {
                *g += d;
            }
        }
    }
}

struct Edge {
    src: usize,
    pos: usize,
    dst: usize,
}

struct Tape {
    active_ops: Vec<usize>,
    edges: Vec<Edge>,
    /// Node states entering each layer plus the final states.
    states: Vec<Vec<f64>>,
    m_pre: Vec<Vec<f64>>,
    u_pre: Vec<Vec<f64>>,
    sums: Vec<Vec<f64>>,
    embedding: Vec<f64>,
}

/// Numerically stable binary cross entropy on a logit.
pub fn bce_with_logit(logit: f64, label: f64) -> f64 {
    logit.max(0.0) - logit * label + (1.0 + (-logit.abs()).exp()).ln()
}

fn matvec(w: &[f64], x: &[f64], b: &[f64], out: &mut [f64]) {
    let cols = x.len();
    debug_assert_eq!(w.len(), out.len() * cols);
    for (r, o) in out.iter_mut().enumerate() {
        *o = dot(&w[r * cols..(r + 1) * cols], x) + b[r];
    }
}

/// Dot product with four independent accumulators; the split breaks the
/// loop-carried dependency that otherwise serializes the FP adds.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for (qa, qb) in (&mut ca).zip(&mut cb) {
        s0 += qa[0] * qb[0];
        s1 += qa[1] * qb[1];
        s2 += qa[2] * qb[2];
        s3 += qa[3] * qb[3];
    }
    let mut rest = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        rest += x * y;
    }
    (s0 + s1) + (s2 + s3) + rest
}

fn init_linear(
    params: &mut [f64],
    w: Range<usize>,
    b: Range<usize>,
    fan_in: usize,
    rng: &mut ChaCha8Rng,
) {
    let s = 1.0 / (fan_in as f64).sqrt();
    for i in w.chain(b) {
        params[i] = rng.gen_range(-s..s);
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Memoized graph embeddings keyed by exact slot content. Stale once the
/// model parameters move.
#[derive(Debug, Clone, Default)]
pub struct EmbedCache {
    index: HashMap<ProgramGraph, usize>,
    store: Vec<Vec<f64>>,
}

impl EmbedCache {
    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }
}

/// Pair scorer over a model snapshot that memoizes graph embeddings by
/// exact slot content. Must be rebuilt (or cleared) whenever the model
/// parameters change.
pub struct CachedPairScorer<'a> {
    model: &'a PredictorModel,
    cache: EmbedCache,
    pub queries: u64,
}

impl<'a> CachedPairScorer<'a> {
    pub fn new(model: &'a PredictorModel) -> CachedPairScorer<'a> {
        Self::with_cache(model, EmbedCache::default())
    }

    /// Resume with embeddings memoized under the same parameters.
    pub fn with_cache(model: &'a PredictorModel, cache: EmbedCache) -> CachedPairScorer<'a> {
        assert_eq!(model.head_kind(), HeadKind::Binary);
        CachedPairScorer { model, cache, queries: 0 }
    }

    pub fn into_cache(self) -> EmbedCache {
        self.cache
    }

    fn embedding_id(&mut self, g: &ProgramGraph) -> usize {
        if let Some(&i) = self.cache.index.get(g) {
            return i;
        }
        let id = self.cache.store.len();
        self.cache.store.push(self.model.encode(g));
        self.cache.index.insert(g.clone(), id);
        id
    }

    pub fn score(&mut self, first: &ProgramGraph, second: &ProgramGraph) -> BinaryScore {
        self.queries += 1;
        let a = self.embedding_id(first);
        let b = self.embedding_id(second);
        self.model.pair_score_from_embeddings(&self.cache.store[a], &self.cache.store[b])
    }
}

impl PairPredictor for CachedPairScorer<'_> {
    fn predict(&mut self, first: &ProgramGraph, second: &ProgramGraph) -> BinaryScore {
        self.score(first, second)
    }
}
