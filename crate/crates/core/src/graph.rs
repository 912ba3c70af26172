//! Fixed-slot DAG program representation, validity rules, text
//! serialization, and the structural/functional hashes used for
//! deduplication.
//!
//! A program is an ordered list of slots. Slot 0 is always the `x` input
//! (slot 1 the `y` input for two-variable tasks) and every operator slot
//! may only reference strictly earlier slots, so any slot assignment is
//! acyclic by construction. Slots not reachable from the output are kept
//! as neutral genetic material.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Node operation. Inputs are arity-0; the eight operators match the
/// search space's operator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeOp {
    InputX,
    InputY,
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Log,
}

impl NodeOp {
    /// The mutable (non-input) operators.
    pub const OPERATORS: [NodeOp; 8] = [
        NodeOp::Add,
        NodeOp::Sub,
        NodeOp::Mul,
        NodeOp::Div,
        NodeOp::Sin,
        NodeOp::Cos,
        NodeOp::Exp,
        NodeOp::Log,
    ];

    /// Number of distinct node kinds, inputs included. Sizes the
    /// encoder's embedding table.
    pub const KIND_COUNT: usize = 10;

    pub fn arity(self) -> usize {
        match self {
            NodeOp::InputX | NodeOp::InputY => 0,
            NodeOp::Sin | NodeOp::Cos | NodeOp::Exp | NodeOp::Log => 1,
            NodeOp::Add | NodeOp::Sub | NodeOp::Mul | NodeOp::Div => 2,
        }
    }

    pub fn is_input(self) -> bool {
        self.arity() == 0
    }

    /// Dense index for embedding lookup.
    pub fn index(self) -> usize {
        match self {
            NodeOp::InputX => 0,
            NodeOp::InputY => 1,
            NodeOp::Add => 2,
            NodeOp::Sub => 3,
            NodeOp::Mul => 4,
            NodeOp::Div => 5,
            NodeOp::Sin => 6,
            NodeOp::Cos => 7,
            NodeOp::Exp => 8,
            NodeOp::Log => 9,
        }
    }

    /// Token used by the text format.
    pub fn token(self) -> &'static str {
        match self {
            NodeOp::InputX => "INPUT_X",
            NodeOp::InputY => "INPUT_Y",
            NodeOp::Add => "ADD",
            NodeOp::Sub => "SUB",
            NodeOp::Mul => "MUL",
            NodeOp::Div => "DIV",
            NodeOp::Sin => "SIN",
            NodeOp::Cos => "COS",
            NodeOp::Exp => "EXP",
            NodeOp::Log => "LOG",
        }
    }

    pub fn from_token(tok: &str) -> Option<NodeOp> {
        Some(match tok {
            "INPUT_X" => NodeOp::InputX,
            "INPUT_Y" => NodeOp::InputY,
            "ADD" => NodeOp::Add,
            "SUB" => NodeOp::Sub,
            "MUL" => NodeOp::Mul,
            "DIV" => NodeOp::Div,
            "SIN" => NodeOp::Sin,
            "COS" => NodeOp::Cos,
            "EXP" => NodeOp::Exp,
            "LOG" => NodeOp::Log,
            _ => return None,
        })
    }
}

/// One slot: an operation plus the slots feeding it. Only the first
/// `op.arity()` entries of `inputs` are meaningful; unused lanes are kept
/// zero so that derived equality and hashing see a canonical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub op: NodeOp,
    inputs: [u16; 2],
}

impl Node {
    pub fn new(op: NodeOp, inputs: &[usize]) -> Node {
        assert_eq!(inputs.len(), op.arity(), "input count must match arity");
        let mut lanes = [0u16; 2];
        for (lane, &src) in lanes.iter_mut().zip(inputs) {
            *lane = src as u16;
        }
        Node { op, inputs: lanes }
    }

    /// The slots feeding this node, in argument order.
    pub fn inputs(&self) -> &[u16] {
        &self.inputs[..self.op.arity()]
    }
}

/// Validation and parse errors for program graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    UnknownOp(String),
    ArityMismatch { slot: usize, op: &'static str, expected: usize, found: usize },
    ForwardEdge { slot: usize, input: usize },
    OutputOutOfRange { output: usize, len: usize },
    BadInputSlot { slot: usize },
    TooManySlots { len: usize, max: usize },
    Empty,
    MalformedLine { line: usize, text: String },
    MissingOutputLine,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnknownOp(tok) => write!(f, "unknown op {tok:?}"),
            GraphError::ArityMismatch { slot, op, expected, found } => {
                write!(f, "arity mismatch at slot {slot}: {op} takes {expected} inputs, found {found}")
            }
            GraphError::ForwardEdge { slot, input } => {
                write!(f, "forward edge: slot {slot} references slot {input}")
            }
            GraphError::OutputOutOfRange { output, len } => {
                write!(f, "output slot {output} out of range for {len} slots")
            }
            GraphError::BadInputSlot { slot } => {
                write!(f, "slot {slot} violates the input-slot layout")
            }
            GraphError::TooManySlots { len, max } => {
                write!(f, "{len} slots exceed capacity {max}")
            }
            GraphError::Empty => write!(f, "graph has no slots"),
            GraphError::MalformedLine { line, text } => {
                write!(f, "malformed record on line {line}: {text:?}")
            }
            GraphError::MissingOutputLine => write!(f, "missing OUT line"),
        }
    }
}

impl std::error::Error for GraphError {}

/// A candidate program: a fixed-slot DAG of typed nodes. Immutable after
/// construction; mutations build new graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgramGraph {
    nodes: Vec<Node>,
    num_inputs: usize,
    output_slot: usize,
    max_slots: usize,
}

/// Structural and functional digests of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphHash {
    /// Digest of the rounded output vector on the task's sample points.
    pub functional: u64,
    /// Digest of the canonicalized active subgraph.
    pub structural: u64,
}

impl ProgramGraph {
    pub fn new(
        nodes: Vec<Node>,
        num_inputs: usize,
        output_slot: usize,
        max_slots: usize,
    ) -> Result<ProgramGraph, GraphError> {
        validate(&nodes, num_inputs, output_slot, max_slots)?;
        Ok(ProgramGraph { nodes, num_inputs, output_slot, max_slots })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, slot: usize) -> &Node {
        &self.nodes[slot]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn output_slot(&self) -> usize {
        self.output_slot
    }

    pub fn max_slots(&self) -> usize {
        self.max_slots
    }

    /// Slots reachable by reverse traversal from the output, inclusive,
    /// in ascending slot order.
    pub fn active_slots(&self) -> Vec<usize> {
        let mask = self.active_mask();
        (0..self.nodes.len()).filter(|&i| mask[i]).collect()
    }

    /// Reachability mask over slots.
    pub fn active_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        let mut stack = vec![self.output_slot];
        while let Some(slot) = stack.pop() {
            if mask[slot] {
                continue;
            }
            mask[slot] = true;
            for &src in self.nodes[slot].inputs() {
                stack.push(src as usize);
            }
        }
        mask
    }

    /// Digest of the active subgraph, invariant under relabeling of
    /// inactive slots and under any slot permutation preserving the shape
    /// and ops of the active part. Iterative neighborhood refinement with
    /// ordered input positions, so non-commutative argument order is
    /// distinguished.
    pub fn structural_hash(&self) -> u64 {
        const ROUNDS: usize = 5;
        let mask = self.active_mask();
        let n = self.nodes.len();

        let mut labels: Vec<u64> = (0..n)
            .map(|i| mix64(0x517c_c1b7_2722_0a95 ^ self.nodes[i].op.index() as u64))
            .collect();
        let mut next = labels.clone();

        for round in 0..ROUNDS {
            for slot in 0..n {
                if !mask[slot] {
                    continue;
                }
                let mut h = Fnv::new();
                h.write_u64(round as u64);
                h.write_u64(self.nodes[slot].op.index() as u64);
                h.write_u64(labels[slot]);
                for (pos, &src) in self.nodes[slot].inputs().iter().enumerate() {
                    h.write_u64(pos as u64 + 1);
                    h.write_u64(labels[src as usize]);
                }
                next[slot] = h.finish();
            }
            std::mem::swap(&mut labels, &mut next);
        }

        // Order-independent combination of the final labels, tied to the
        // output node's own label.
        let mut bag: u64 = 0;
        let mut count: u64 = 0;
        for slot in 0..n {
            if mask[slot] {
                bag = bag.wrapping_add(mix64(labels[slot]));
                count += 1;
            }
        }
        let mut h = Fnv::new();
        h.write_u64(count);
        h.write_u64(labels[self.output_slot]);
        h.write_u64(bag);
        h.finish()
    }

    /// Text record, one node per line, terminated by the output line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (slot, node) in self.nodes.iter().enumerate() {
            out.push_str(&slot.to_string());
            out.push(' ');
            out.push_str(node.op.token());
            for &src in node.inputs() {
                out.push(' ');
                out.push_str(&src.to_string());
            }
            out.push('\n');
        }
        out.push_str(&format!("OUT {}\n", self.output_slot));
        out
    }

    /// Parse the text record format. Rejects unknown ops, arity
    /// mismatches, forward edges and out-of-range outputs, each with a
    /// distinct diagnostic.
    pub fn deserialize(text: &str) -> Result<ProgramGraph, GraphError> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut output: Option<usize> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let first = fields.next().expect("non-empty line has a field");

            if first == "OUT" {
                let slot = fields
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| GraphError::MalformedLine { line: lineno + 1, text: raw.to_string() })?;
                output = Some(slot);
                continue;
            }

            let slot: usize = first
                .parse()
                .map_err(|_| GraphError::MalformedLine { line: lineno + 1, text: raw.to_string() })?;
            if slot != nodes.len() {
                return Err(GraphError::MalformedLine { line: lineno + 1, text: raw.to_string() });
            }
            let op_tok = fields
                .next()
                .ok_or_else(|| GraphError::MalformedLine { line: lineno + 1, text: raw.to_string() })?;
            let op = NodeOp::from_token(op_tok).ok_or_else(|| GraphError::UnknownOp(op_tok.to_string()))?;

            let mut inputs = Vec::new();
            for field in fields {
                let src: usize = field
                    .parse()
                    .map_err(|_| GraphError::MalformedLine { line: lineno + 1, text: raw.to_string() })?;
                inputs.push(src);
            }
            if inputs.len() != op.arity() {
                return Err(GraphError::ArityMismatch {
                    slot,
                    op: op.token(),
                    expected: op.arity(),
                    found: inputs.len(),
                });
            }
            for &src in &inputs {
                if src >= slot {
                    return Err(GraphError::ForwardEdge { slot, input: src });
                }
            }
            nodes.push(Node::new(op, &inputs));
        }

        let output_slot = output.ok_or(GraphError::MissingOutputLine)?;
        let num_inputs = if nodes.len() > 1 && nodes[1].op == NodeOp::InputY { 2 } else { 1 };
        let max_slots = nodes.len();
        ProgramGraph::new(nodes, num_inputs, output_slot, max_slots)
    }
}

fn validate(
    nodes: &[Node],
    num_inputs: usize,
    output_slot: usize,
    max_slots: usize,
) -> Result<(), GraphError> {
    if nodes.is_empty() {
        return Err(GraphError::Empty);
    }
    if nodes.len() > max_slots {
        return Err(GraphError::TooManySlots { len: nodes.len(), max: max_slots });
    }
    if !(1..=2).contains(&num_inputs) {
        return Err(GraphError::BadInputSlot { slot: 0 });
    }
    if output_slot >= nodes.len() {
        return Err(GraphError::OutputOutOfRange { output: output_slot, len: nodes.len() });
    }
    for (slot, node) in nodes.iter().enumerate() {
        let want = match slot {
            0 => Some(NodeOp::InputX),
            1 if num_inputs == 2 => Some(NodeOp::InputY),
            _ => None,
        };
        match want {
            Some(op) if node.op != op => return Err(GraphError::BadInputSlot { slot }),
            None if node.op.is_input() => return Err(GraphError::BadInputSlot { slot }),
            _ => {}
        }
        for &src in node.inputs() {
            if src as usize >= slot {
                return Err(GraphError::ForwardEdge { slot, input: src as usize });
            }
        }
    }
    Ok(())
}

/// Digest of an evaluated output vector, rounded so that
/// algebraically-identical evaluation orders key to the same entry.
/// Non-finite values hash by class.
pub fn functional_hash(outputs: &[f64]) -> u64 {
    const SCALE: f64 = 1e10; // 1e-10 rounding granularity
    let mut h = Fnv::new();
    h.write_u64(outputs.len() as u64);
    for &v in outputs {
        if v.is_nan() {
            h.write_u64(1);
        } else if v == f64::INFINITY {
            h.write_u64(2);
        } else if v == f64::NEG_INFINITY {
            h.write_u64(3);
        } else {
            let scaled = v * SCALE;
            if scaled.abs() < 9.0e18 {
                h.write_u64(4);
                h.write_u64(scaled.round() as i64 as u64);
            } else {
                // Beyond rounding range: key on the raw bits.
                h.write_u64(5);
                h.write_u64(v.to_bits());
            }
        }
    }
    h.finish()
}

/// Exact digest of an output vector: bitwise values with negative zero
/// normalized and non-finite values hashed by class. Two graphs share
/// this digest only when every output is numerically identical, which is
/// what makes fitness caching transparent to the search trajectory.
pub fn output_digest_exact(outputs: &[f64]) -> u64 {
    let mut h = Fnv::new();
    h.write_u64(outputs.len() as u64);
    for &v in outputs {
        if v.is_nan() {
            h.write_u64(1);
        } else if v == f64::INFINITY {
            h.write_u64(2);
        } else if v == f64::NEG_INFINITY {
            h.write_u64(3);
        } else {
            h.write_u64(4);
            // +0.0 and -0.0 compare equal and behave identically in the
            // fitness computation.
            h.write_u64(if v == 0.0 { 0 } else { v.to_bits() });
        }
    }
    h.finish()
}

/// FNV-1a, 64-bit. Hand-rolled so digests are stable across toolchains.
pub(crate) struct Fnv(u64);

impl Fnv {
    pub fn new() -> Fnv {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_u64(&mut self, x: u64) {
        for byte in x.to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        // Final avalanche; raw FNV mixes low bits weakly.
        mix64(self.0)
    }
}

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of the full slot encoding (not just the active part); exact
/// content key for caches.
pub fn content_hash(g: &ProgramGraph) -> u64 {
    let mut h = Fnv::new();
    h.write_u64(g.num_inputs as u64);
    h.write_u64(g.output_slot as u64);
    for node in &g.nodes {
        h.write_u64(node.op.index() as u64);
        for &src in node.inputs() {
            h.write_u64(src as u64);
        }
    }
    h.finish()
}
