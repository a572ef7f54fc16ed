//! Synchronous monotone circuits: the source language of the reduction.
//!
//! A [`Circuit`] is a list of fan-in-two AND/OR gates in topological order
//! over `num_inputs` Boolean inputs. Every value of the type satisfies the
//! structural invariants: unique ids, children declared before parents, a gate
//! as output, all gates reachable from the output, and equal-length
//! input-to-output paths.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate gate id `{0}`")]
    DuplicateId(String),
    #[error("unknown reference `{0}`")]
    UnknownRef(String),
    #[error("output `{0}` is an input, not a gate")]
    OutputIsInput(String),
    #[error("gate `{gate}` uses `{child}` before it is declared")]
    NotTopological { gate: String, child: String },
    #[error("gate `{0}` has children on different layers")]
    NotSynchronous(String),
    #[error("gate `{0}` is not reachable from the output")]
    UnreachableGate(String),
    #[error("assignment has {got} bits but the circuit has {expected} inputs")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid assignment: {0}")]
    BadAssignment(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Input(usize),
    /// Index into [`Circuit::gates`].
    Gate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
}

impl GateKind {
    pub fn apply(self, left: bool, right: bool) -> bool {
        match self {
            GateKind::And => left && right,
            GateKind::Or => left || right,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    pub left: NodeRef,
    pub right: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_inputs: usize,
    gates: Vec<Gate>,
    output: usize,
    layering: Layering,
}

/// Layer of every circuit node: inputs sit at 0, a gate one above its children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layering {
    gate_layers: Vec<u32>,
    depth: u32,
}

impl Layering {
    pub fn layer(&self, node: NodeRef) -> u32 {
        match node {
            NodeRef::Input(_) => 0,
            NodeRef::Gate(g) => self.gate_layers[g],
        }
    }

    /// Layer of the output gate.
    pub fn depth(&self) -> u32 {
        self.depth
    }
}

fn is_valid_gate_id(id: &str) -> bool {
    let mut chars = id.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return false;
    }
    // `i<digits>` names an input.
    !(first == 'i' && id.len() > 1 && id[1..].chars().all(|c| c.is_ascii_digit()))
}

fn parse_input_ref(token: &str) -> Option<usize> {
    let digits = token.strip_prefix('i')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl Circuit {
    /// Builds a circuit from already-resolved parts, checking every invariant.
    pub fn new(num_inputs: usize, gates: Vec<Gate>, output: usize) -> Result<Self, CircuitError> {
        if num_inputs == 0 {
            return Err(CircuitError::Syntax {
                line: 0,
                message: "a circuit needs at least one input".into(),
            });
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (idx, gate) in gates.iter().enumerate() {
            if !is_valid_gate_id(&gate.id) {
                return Err(CircuitError::Syntax {
                    line: 0,
                    message: format!("invalid gate id `{}`", gate.id),
                });
            }
            if seen.insert(gate.id.as_str(), idx).is_some() {
                return Err(CircuitError::DuplicateId(gate.id.clone()));
            }
            for child in [gate.left, gate.right] {
                match child {
                    NodeRef::Input(i) if i >= num_inputs => {
                        return Err(CircuitError::UnknownRef(format!("i{i}")));
                    }
                    NodeRef::Gate(g) if g >= gates.len() => {
                        return Err(CircuitError::UnknownRef(format!("gate #{g}")));
                    }
                    NodeRef::Gate(g) if g >= idx => {
                        return Err(CircuitError::NotTopological {
                            gate: gate.id.clone(),
                            child: gates[g].id.clone(),
                        });
                    }
                    _ => {}
                }
            }
        }
        if output >= gates.len() {
            return Err(CircuitError::UnknownRef(format!("gate #{output}")));
        }
        let layering = compute_layers(&gates, output)?;
        Ok(Circuit {
            num_inputs,
            gates,
            output,
            layering,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, idx: usize) -> &Gate {
        &self.gates[idx]
    }

    /// Index of the output gate.
    pub fn output(&self) -> usize {
        self.output
    }

    pub fn layering(&self) -> &Layering {
        &self.layering
    }

    pub fn depth(&self) -> u32 {
        self.layering.depth
    }

    pub fn gate_index(&self, id: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.id == id)
    }

    pub fn node_name(&self, node: NodeRef) -> String {
        match node {
            NodeRef::Input(i) => format!("i{i}"),
            NodeRef::Gate(g) => self.gates[g].id.clone(),
        }
    }

    pub fn evaluate(&self, x: &Assignment) -> Result<(bool, NodeValues), CircuitError> {
        if x.len() != self.num_inputs {
            return Err(CircuitError::LengthMismatch {
                expected: self.num_inputs,
                got: x.len(),
            });
        }
        let mut gates = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let read = |r: NodeRef, gates: &Vec<bool>| match r {
                NodeRef::Input(i) => x.bit(i),
                NodeRef::Gate(g) => gates[g],
            };
            let v = gate.kind.apply(read(gate.left, &gates), read(gate.right, &gates));
            gates.push(v);
        }
        let values = NodeValues {
            inputs: x.bits().to_vec(),
            gates,
        };
        Ok((values.gates[self.output], values))
    }

    /// Canonical text form; see [`parse_circuit`].
    pub fn serialize(&self) -> String {
        let mut out = format!("inputs {}\n", self.num_inputs);
        for gate in &self.gates {
            out.push_str(&format!(
                "gate {} {} {} {}\n",
                gate.id,
                gate.kind,
                self.node_name(gate.left),
                self.node_name(gate.right)
            ));
        }
        out.push_str(&format!("output {}\n", self.gates[self.output].id));
        out
    }
}

/// Re-derives the layer map of `c`. Values of [`Circuit`] are validated on
/// construction, so this never fails for them; it is exposed for callers that
/// want the map itself.
pub fn validate_layers(c: &Circuit) -> Result<Layering, CircuitError> {
    compute_layers(&c.gates, c.output)
}

fn compute_layers(gates: &[Gate], output: usize) -> Result<Layering, CircuitError> {
    let mut reachable = vec![false; gates.len()];
    reachable[output] = true;
    for idx in (0..gates.len()).rev() {
        if !reachable[idx] {
            continue;
        }
        for child in [gates[idx].left, gates[idx].right] {
            if let NodeRef::Gate(g) = child {
                reachable[g] = true;
            }
        }
    }
    let mut gate_layers = vec![0u32; gates.len()];
    for (idx, gate) in gates.iter().enumerate() {
        let layer_of = |r: NodeRef| match r {
            NodeRef::Input(_) => 0,
            NodeRef::Gate(g) => gate_layers[g],
        };
        let (l, r) = (layer_of(gate.left), layer_of(gate.right));
        if reachable[idx] && l != r {
            return Err(CircuitError::NotSynchronous(gate.id.clone()));
        }
        gate_layers[idx] = l.max(r) + 1;
    }
    if let Some(idx) = reachable.iter().position(|r| !r) {
        return Err(CircuitError::UnreachableGate(gates[idx].id.clone()));
    }
    Ok(Layering {
        depth: gate_layers[output],
        gate_layers,
    })
}

/// Parses the line-oriented circuit format.
///
/// ```text
/// inputs 3
/// gate a OR i0 i1
/// gate b AND i1 i2
/// gate c AND a b
/// output c
/// ```
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let syntax = |line: usize, message: String| CircuitError::Syntax { line, message };

    let mut lines = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if !content.is_empty() {
            lines.push((n + 1, content.split_whitespace().collect::<Vec<_>>()));
        }
    }
    let mut iter = lines.into_iter();

    let num_inputs = match iter.next() {
        Some((n, toks)) if toks.first() == Some(&"inputs") => {
            if toks.len() != 2 {
                return Err(syntax(n, "expected `inputs <k>`".into()));
            }
            let k: usize = toks[1]
                .parse()
                .map_err(|_| syntax(n, format!("bad input count `{}`", toks[1])))?;
            if k == 0 {
                return Err(syntax(n, "input count must be positive".into()));
            }
            k
        }
        Some((n, _)) => return Err(syntax(n, "expected `inputs <k>`".into())),
        None => return Err(syntax(0, "empty circuit".into())),
    };

    struct RawGate<'a> {
        id: &'a str,
        kind: GateKind,
        srcs: [&'a str; 2],
    }
    let mut raw_gates: Vec<RawGate> = Vec::new();
    let mut output: Option<(usize, &str)> = None;
    for (n, toks) in iter {
        if output.is_some() {
            return Err(syntax(n, "nothing may follow `output`".into()));
        }
        match toks[0] {
            "gate" => {
                if toks.len() != 5 {
                    return Err(syntax(n, "expected `gate <id> <AND|OR> <src> <src>`".into()));
                }
                if !is_valid_gate_id(toks[1]) {
                    return Err(syntax(n, format!("invalid gate id `{}`", toks[1])));
                }
                let kind = match toks[2] {
                    "AND" => GateKind::And,
                    "OR" => GateKind::Or,
                    other => return Err(syntax(n, format!("unknown gate kind `{other}`"))),
                };
                raw_gates.push(RawGate {
                    id: toks[1],
                    kind,
                    srcs: [toks[3], toks[4]],
                });
            }
            "output" => {
                if toks.len() != 2 {
                    return Err(syntax(n, "expected `output <id>`".into()));
                }
                output = Some((n, toks[1]));
            }
            other => return Err(syntax(n, format!("unknown keyword `{other}`"))),
        }
    }
    let Some((_, output_name)) = output else {
        return Err(syntax(0, "missing `output` line".into()));
    };

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (idx, g) in raw_gates.iter().enumerate() {
        if index.insert(g.id, idx).is_some() {
            return Err(CircuitError::DuplicateId(g.id.to_string()));
        }
    }
    let mut gates = Vec::with_capacity(raw_gates.len());
    for (idx, g) in raw_gates.iter().enumerate() {
        let mut children = [NodeRef::Input(0); 2];
        for (slot, src) in g.srcs.iter().enumerate() {
            children[slot] = if let Some(i) = parse_input_ref(src) {
                if i >= num_inputs {
                    return Err(CircuitError::UnknownRef(src.to_string()));
                }
                NodeRef::Input(i)
            } else {
                match index.get(src) {
                    Some(&c) if c < idx => NodeRef::Gate(c),
                    Some(_) => {
                        return Err(CircuitError::NotTopological {
                            gate: g.id.to_string(),
                            child: src.to_string(),
                        })
                    }
                    None => return Err(CircuitError::UnknownRef(src.to_string())),
                }
            };
        }
        gates.push(Gate {
            id: g.id.to_string(),
            kind: g.kind,
            left: children[0],
            right: children[1],
        });
    }
    if parse_input_ref(output_name).is_some() {
        return Err(CircuitError::OutputIsInput(output_name.to_string()));
    }
    let out = *index
        .get(output_name)
        .ok_or_else(|| CircuitError::UnknownRef(output_name.to_string()))?;
    Circuit::new(num_inputs, gates, out)
}

/// Input bits, index 0 leftmost in the text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(CircuitError::BadAssignment("empty bitstring".into()));
        }
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CircuitError::BadAssignment(format!("unexpected character `{other}`"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment::new)
    }

    /// The assignment whose bit `i` is bit `i` of `mask` (LSB is input 0).
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Assignment::new((0..len).map(|i| (mask >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Truth value of every input and gate under one assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeValues {
    inputs: Vec<bool>,
    gates: Vec<bool>,
}

impl NodeValues {
    pub fn value(&self, node: NodeRef) -> bool {
        match node {
            NodeRef::Input(i) => self.inputs[i],
            NodeRef::Gate(g) => self.gates[g],
        }
    }

    pub fn gate(&self, g: usize) -> bool {
        self.gates[g]
    }

    pub fn input(&self, i: usize) -> bool {
        self.inputs[i]
    }
}

/// Parameters of [`generate_random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub layers: u32,
    pub width: usize,
    pub num_inputs: usize,
    pub p_or: f64,
    /// Cap every node's fan-out at two (layer widths are also capped at
    /// `num_inputs` so that the inputs can absorb the bottom layer).
    pub fanout2: bool,
}

/// Random synchronous circuit, deterministic in `seed`.
///
/// Layer sizes are fixed top-down: one output gate, then
/// `min(width, 2 * size_above)` gates per layer. Each lower gate is first
/// wired to a distinct random parent slot (so everything is reachable) and
/// the remaining slots draw uniformly. Layer-1 gates draw from the inputs.
pub fn generate_random(params: &GenParams, seed: u64) -> Result<Circuit, CircuitError> {
    let GenParams {
        layers,
        width,
        num_inputs,
        p_or,
        fanout2,
    } = *params;
    if layers == 0 || width == 0 || num_inputs == 0 {
        return Err(CircuitError::InvalidParams(
            "layers, width and inputs must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_or) {
        return Err(CircuitError::InvalidParams(format!("p_or {p_or} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = layers as usize;
    let cap = if fanout2 { width.min(num_inputs) } else { width };

    // sizes[j] = number of gates on layer j + 1.
    let mut sizes = vec![0usize; layers];
    sizes[layers - 1] = 1;
    for j in (0..layers - 1).rev() {
        sizes[j] = cap.min(2 * sizes[j + 1]);
    }

    // children[j][g] = (left, right) as indices into layer j-1 (or inputs for j = 0).
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); layers];
    for j in (0..layers).rev() {
        let lower = if j == 0 { num_inputs } else { sizes[j - 1] };
        let slots = 2 * sizes[j];
        let mut assigned = vec![usize::MAX; slots];
        let mut uses = vec![0usize; lower];
        if j > 0 {
            let mut order: Vec<usize> = (0..slots).collect();
            order.shuffle(&mut rng);
            for (child, &slot) in order.iter().take(lower).enumerate() {
                assigned[slot] = child;
                uses[child] += 1;
            }
        }
        for slot in 0..slots {
            if assigned[slot] != usize::MAX {
                continue;
            }
            let child = if fanout2 {
                let open: Vec<usize> = (0..lower).filter(|&c| uses[c] < 2).collect();
                *open.choose(&mut rng).ok_or_else(|| {
                    CircuitError::InvalidParams("fan-out two cannot be satisfied".into())
                })?
            } else {
                rng.gen_range(0..lower)
            };
            assigned[slot] = child;
            uses[child] += 1;
        }
        children[j] = assigned.chunks(2).map(|p| (p[0], p[1])).collect();
    }

    let mut gates = Vec::new();
    let mut layer_start = Vec::with_capacity(layers);
    for j in 0..layers {
        layer_start.push(gates.len());
        for g in 0..sizes[j] {
            let (l, r) = children[j][g];
            let to_ref = |c: usize| {
                if j == 0 {
                    NodeRef::Input(c)
                } else {
                    NodeRef::Gate(layer_start[j - 1] + c)
                }
            };
            let kind = if rng.gen_bool(p_or) {
                GateKind::Or
            } else {
                GateKind::And
            };
            gates.push(Gate {
                id: format!("g{}", gates.len()),
                kind,
                left: to_ref(l),
                right: to_ref(r),
            });
        }
    }
    let output = gates.len() - 1;
    Circuit::new(num_inputs, gates, output)
}
