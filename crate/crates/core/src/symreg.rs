//! Symbolic-regression benchmark tasks: target functions, frozen sample
//! points, program evaluation, RMSE and the flip-and-squash fitness in
//! [0, 1], plus the domain's random generator and vanilla mutator.
//!
//! Math is unprotected: division by zero, logs of nonpositive values and
//! exp overflow produce non-finite values that propagate, and any
//! candidate emitting a non-finite output gets fitness 0.

use crate::graph::{functional_hash, GraphHash, Node, NodeOp, ProgramGraph};
use crate::rng::{stream_rng, Stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

pub const DEFAULT_MAX_SLOTS: usize = 15;
pub const SAMPLE_POINT_COUNT: usize = 20;

/// Benchmark task identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskName {
    Nguyen2,
    Nguyen3,
    Nguyen5,
    Nguyen7,
    Nguyen12,
}

impl TaskName {
    pub const ALL: [TaskName; 5] = [
        TaskName::Nguyen2,
        TaskName::Nguyen3,
        TaskName::Nguyen5,
        TaskName::Nguyen7,
        TaskName::Nguyen12,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::Nguyen2 => "nguyen2",
            TaskName::Nguyen3 => "nguyen3",
            TaskName::Nguyen5 => "nguyen5",
            TaskName::Nguyen7 => "nguyen7",
            TaskName::Nguyen12 => "nguyen12",
        }
    }

    pub fn from_str(s: &str) -> Option<TaskName> {
        Some(match s {
            "nguyen2" => TaskName::Nguyen2,
            "nguyen3" => TaskName::Nguyen3,
            "nguyen5" => TaskName::Nguyen5,
            "nguyen7" => TaskName::Nguyen7,
            "nguyen12" => TaskName::Nguyen12,
            _ => return None,
        })
    }

    pub fn num_inputs(self) -> usize {
        match self {
            TaskName::Nguyen12 => 2,
            _ => 1,
        }
    }

    /// Sampling domain, per input.
    fn domain(self) -> (f64, f64) {
        match self {
            TaskName::Nguyen2 | TaskName::Nguyen3 | TaskName::Nguyen5 => (-1.0, 1.0),
            TaskName::Nguyen7 => (0.0, 2.0),
            TaskName::Nguyen12 => (0.0, 1.0),
        }
    }

    fn index(self) -> u64 {
        match self {
            TaskName::Nguyen2 => 0,
            TaskName::Nguyen3 => 1,
            TaskName::Nguyen5 => 2,
            TaskName::Nguyen7 => 3,
            TaskName::Nguyen12 => 4,
        }
    }
}

impl fmt::Display for TaskName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// RMSE plus its squashed fitness. `fitness` is 0 whenever `rmse` is
/// non-finite and otherwise strictly decreasing in `rmse`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub rmse: f64,
    pub fitness: f64,
}

/// Monotone map from RMSE to [0, 1]: 1 - (2/pi) * atan(rmse * pi / 2),
/// with non-finite RMSE pinned to 0.
pub fn flip_and_squash(rmse: f64) -> f64 {
    if !rmse.is_finite() {
        return 0.0;
    }
    1.0 - (2.0 / PI) * (rmse * PI / 2.0).atan()
}

/// A symbolic-regression task: target function plus 20 sample points
/// frozen at construction from the experiment seed.
#[derive(Debug, Clone)]
pub struct SymRegTask {
    name: TaskName,
    num_inputs: usize,
    points: Vec<[f64; 2]>,
    targets: Vec<f64>,
}

impl SymRegTask {
    pub fn new(name: TaskName, seed: u64) -> SymRegTask {
        let mut rng = stream_rng(seed, Stream::SamplePoints, name.index());
        let (lo, hi) = name.domain();
        let num_inputs = name.num_inputs();
        let mut points = Vec::with_capacity(SAMPLE_POINT_COUNT);
        for _ in 0..SAMPLE_POINT_COUNT {
            let x = rng.gen_range(lo..hi);
            let y = if num_inputs == 2 { rng.gen_range(lo..hi) } else { 0.0 };
            points.push([x, y]);
        }
        let targets = points.iter().map(|p| target_value(name, p)).collect();
        SymRegTask { name, num_inputs, points, targets }
    }

    pub fn name(&self) -> TaskName {
        self.name
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn sample_points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target_value(&self, point: &[f64; 2]) -> f64 {
        target_value(self.name, point)
    }

    /// Candidate outputs over the sample points, in point order.
    pub fn outputs(&self, g: &ProgramGraph) -> Vec<f64> {
        self.points.iter().map(|p| evaluate_graph(g, p)).collect()
    }

    /// Both candidate digests: the rounded functional digest of the
    /// output vector on this task's points, and the structural digest of
    /// the active subgraph.
    pub fn graph_hash(&self, g: &ProgramGraph) -> GraphHash {
        GraphHash {
            functional: functional_hash(&self.outputs(g)),
            structural: g.structural_hash(),
        }
    }

    pub fn fitness(&self, g: &ProgramGraph) -> FitnessRecord {
        self.fitness_of_outputs(&self.outputs(g))
    }

    pub fn fitness_of_outputs(&self, outputs: &[f64]) -> FitnessRecord {
        debug_assert_eq!(outputs.len(), self.targets.len());
        let mut sq_sum = 0.0;
        for (out, tgt) in outputs.iter().zip(&self.targets) {
            let d = out - tgt;
            sq_sum += d * d;
        }
        let rmse = (sq_sum / self.targets.len() as f64).sqrt();
        FitnessRecord { rmse, fitness: flip_and_squash(rmse) }
    }

    /// A uniformly random full-capacity graph. Every operator slot draws
    /// its op uniformly from the 8 operators and each input reference
    /// uniformly from strictly earlier slots; the output is the last slot.
    pub fn random_graph(&self, rng: &mut ChaCha8Rng) -> ProgramGraph {
        random_graph(self.num_inputs, DEFAULT_MAX_SLOTS, rng)
    }

    /// Sample-point audit dump: `point_index,x[,y],target`.
    pub fn points_csv(&self) -> String {
        let mut out = String::new();
        if self.num_inputs == 2 {
            out.push_str("point_index,x,y,target\n");
        } else {
            out.push_str("point_index,x,target\n");
        }
        for (i, (p, t)) in self.points.iter().zip(&self.targets).enumerate() {
            if self.num_inputs == 2 {
                out.push_str(&format!("{},{},{},{}\n", i, p[0], p[1], t));
            } else {
                out.push_str(&format!("{},{},{}\n", i, p[0], t));
            }
        }
        out
    }
}

/// Ground-truth target value at a point.
pub fn target_value(name: TaskName, point: &[f64; 2]) -> f64 {
    let x = point[0];
    let y = point[1];
    match name {
        TaskName::Nguyen2 => x.powi(4) + x.powi(3) + x.powi(2) + x,
        TaskName::Nguyen3 => x.powi(5) + x.powi(4) + x.powi(3) + x.powi(2) + x,
        TaskName::Nguyen5 => (x * x).sin() * x.cos() - 1.0,
        TaskName::Nguyen7 => (x + 1.0).ln() + (x * x + 1.0).ln(),
        TaskName::Nguyen12 => x.powi(4) - x.powi(3) + y * y / 2.0 - y,
    }
}

/// Evaluate a graph at one input point. Slots are computed in index order
/// over the active subgraph, so a node with several consumers is computed
/// once and every consumer observes the identical value.
pub fn evaluate_graph(g: &ProgramGraph, point: &[f64; 2]) -> f64 {
    let mask = g.active_mask();
    let mut values = vec![0.0f64; g.len()];
    for slot in 0..g.len() {
        if !mask[slot] {
            continue;
        }
        let node = g.node(slot);
        let ins = node.inputs();
        values[slot] = match node.op {
            NodeOp::InputX => point[0],
            NodeOp::InputY => point[1],
            NodeOp::Add => values[ins[0] as usize] + values[ins[1] as usize],
            NodeOp::Sub => values[ins[0] as usize] - values[ins[1] as usize],
            NodeOp::Mul => values[ins[0] as usize] * values[ins[1] as usize],
            NodeOp::Div => values[ins[0] as usize] / values[ins[1] as usize],
            NodeOp::Sin => values[ins[0] as usize].sin(),
            NodeOp::Cos => values[ins[0] as usize].cos(),
            NodeOp::Exp => values[ins[0] as usize].exp(),
            NodeOp::Log => values[ins[0] as usize].ln(),
        };
    }
    values[g.output_slot()]
}

/// See [`SymRegTask::random_graph`].
pub fn random_graph(num_inputs: usize, max_slots: usize, rng: &mut ChaCha8Rng) -> ProgramGraph {
    let mut nodes = Vec::with_capacity(max_slots);
    nodes.push(Node::new(NodeOp::InputX, &[]));
    if num_inputs == 2 {
        nodes.push(Node::new(NodeOp::InputY, &[]));
    }
    while nodes.len() < max_slots {
        let slot = nodes.len();
        let op = NodeOp::OPERATORS[rng.gen_range(0..NodeOp::OPERATORS.len())];
        let mut inputs = Vec::with_capacity(op.arity());
        for _ in 0..op.arity() {
            inputs.push(rng.gen_range(0..slot));
        }
        nodes.push(Node::new(op, &inputs));
    }
    ProgramGraph::new(nodes, num_inputs, max_slots - 1, max_slots)
        .expect("randomly generated graph satisfies the construction rules")
}

#[derive(Clone, Copy)]
enum Move {
    OpResample,
    EdgeRewire,
    OutputMove,
}

/// Mutate by exactly one move, chosen uniformly among op-resample,
/// edge-rewire and output-move. Degenerate draws (no legal alternative
/// target) are resampled up to 16 times before falling back to
/// op-resample. The parent is unmodified.
pub fn mutate_graph(g: &ProgramGraph, rng: &mut ChaCha8Rng) -> ProgramGraph {
    const RESAMPLE_LIMIT: usize = 16;
    for _ in 0..RESAMPLE_LIMIT {
        let mv = match rng.gen_range(0..3) {
            0 => Move::OpResample,
            1 => Move::EdgeRewire,
            _ => Move::OutputMove,
        };
        if let Some(child) = try_move(g, mv, rng) {
            return child;
        }
    }
    try_move(g, Move::OpResample, rng).unwrap_or_else(|| g.clone())
}

fn try_move(g: &ProgramGraph, mv: Move, rng: &mut ChaCha8Rng) -> Option<ProgramGraph> {
    let op_slots: Vec<usize> = (0..g.len()).filter(|&i| !g.node(i).op.is_input()).collect();
    match mv {
        Move::OpResample => {
            let &slot = pick(&op_slots, rng)?;
            let old = g.node(slot);
            let choices: Vec<NodeOp> =
                NodeOp::OPERATORS.iter().copied().filter(|&op| op != old.op).collect();
            let new_op = *pick(&choices, rng)?;
            let mut inputs: Vec<usize> =
                old.inputs().iter().map(|&s| s as usize).take(new_op.arity()).collect();
            while inputs.len() < new_op.arity() {
                inputs.push(rng.gen_range(0..slot));
            }
            let mut nodes = g.nodes().to_vec();
            nodes[slot] = Node::new(new_op, &inputs);
            Some(rebuild(g, nodes, g.output_slot()))
        }
        Move::EdgeRewire => {
            let &slot = pick(&op_slots, rng)?;
            let node = g.node(slot);
            let edge = rng.gen_range(0..node.op.arity());
            let current = node.inputs()[edge] as usize;
            // Redirect to a uniform different earlier slot.
            if slot < 2 {
                return None;
            }
            let mut target = rng.gen_range(0..slot - 1);
            if target >= current {
                target += 1;
            }
            let mut inputs: Vec<usize> = node.inputs().iter().map(|&s| s as usize).collect();
            inputs[edge] = target;
            let mut nodes = g.nodes().to_vec();
            nodes[slot] = Node::new(node.op, &inputs);
            Some(rebuild(g, nodes, g.output_slot()))
        }
        Move::OutputMove => {
            if g.len() < 2 {
                return None;
            }
            let mut target = rng.gen_range(0..g.len() - 1);
            if target >= g.output_slot() {
                target += 1;
            }
            Some(rebuild(g, g.nodes().to_vec(), target))
        }
    }
}

fn pick<'a, T>(items: &'a [T], rng: &mut ChaCha8Rng) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

fn rebuild(g: &ProgramGraph, nodes: Vec<Node>, output_slot: usize) -> ProgramGraph {
    ProgramGraph::new(nodes, g.num_inputs(), output_slot, g.max_slots())
        .expect("mutation moves preserve the construction rules")
}
