//! Compiles a circuit and assignment into cat-and-mouse game graphs.
//!
//! Every gate becomes a five-node gadget on each side (Cat and Mouse):
//!
//! ```text
//!         1
//!        / \
//!       2   3
//!       |\ /|
//!       | X |
//!       |/ \|
//!       4   5
//! ```
//!
//! Node 1 is the gate's output, node 4 leads to the left child and node 5 to
//! the right child. AND gadgets gain threat edges `C2 -> M5` and `C3 -> M4`.
//! Every gadget carries two escape chains, one per branch, shared by the Cat
//! and Mouse copies and length-matched to the forward paths to the Hole. The
//! undirected graph adds one guard edge `m1 -- cat_of(m2)` for every
//! Mouse-side edge `m1 -> m2`.
//!
//! Layers count forward edges to the Hole: a gadget at circuit depth `j` has
//! node 1 on layer `3j + 1`, nodes 2 and 3 on `3j`, nodes 4 and 5 on `3j - 1`,
//! input nodes on layer 1 and the Hole and dead end on 0.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::circuit::{Assignment, Circuit, CircuitError, GateKind, NodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("inconsistent graph: {0}")]
    InconsistentGraph(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Cat,
    Mouse,
}

impl Side {
    pub fn tag(self) -> &'static str {
        match self {
            Side::Cat => "C",
            Side::Mouse => "M",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "C" => Some(Side::Cat),
            "M" => Some(Side::Mouse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Left,
    Right,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::Left => "L",
            Branch::Right => "R",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "L" => Some(Branch::Left),
            "R" => Some(Branch::Right),
            _ => None,
        }
    }

    /// Gadget position (4 or 5) that owns this branch.
    pub fn position(self) -> u8 {
        match self {
            Branch::Left => 4,
            Branch::Right => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeRole {
    CatStart,
    Hole,
    DeadEnd,
    Gadget { gate: String, position: u8, side: Side },
    Input { index: usize, side: Side },
    Escape { gate: String, branch: Branch, step: u32 },
}

impl NodeRole {
    pub fn side(&self) -> Option<Side> {
        match self {
            NodeRole::Gadget { side, .. } | NodeRole::Input { side, .. } => Some(*side),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NodeRole::CatStart => "cat-start",
            NodeRole::Hole => "hole",
            NodeRole::DeadEnd => "dead-end",
            NodeRole::Gadget { .. } => "gadget",
            NodeRole::Input { .. } => "input",
            NodeRole::Escape { .. } => "escape",
        }
    }

    fn default_id(&self) -> String {
        match self {
            NodeRole::CatStart => "c".into(),
            NodeRole::Hole => "h".into(),
            NodeRole::DeadEnd => "d".into(),
            NodeRole::Gadget {
                gate,
                position,
                side,
            } => format!("{gate}.{}.{position}", side.tag()),
            NodeRole::Input { index, side } => format!("i{index}.{}", side.tag()),
            NodeRole::Escape { gate, branch, step } => format!("{gate}.esc.{}.{step}", branch.tag()),
        }
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRole::Gadget {
                gate,
                position,
                side,
            } => write!(f, "gadget {gate} {position} {}", side.tag()),
            NodeRole::Input { index, side } => write!(f, "input {index} {}", side.tag()),
            NodeRole::Escape { gate, branch, step } => {
                write!(f, "escape {gate} {} {step}", branch.tag())
            }
            other => f.write_str(other.kind_name()),
        }
    }
}

/// Which construction step produced an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeTag {
    Internal,
    Inter,
    Hole,
    DeadEnd,
    Threat,
    Escape,
    Guard,
    Opening,
}

impl EdgeTag {
    pub const ALL: [EdgeTag; 8] = [
        EdgeTag::Internal,
        EdgeTag::Inter,
        EdgeTag::Hole,
        EdgeTag::DeadEnd,
        EdgeTag::Threat,
        EdgeTag::Escape,
        EdgeTag::Guard,
        EdgeTag::Opening,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeTag::Internal => "internal",
            EdgeTag::Inter => "inter",
            EdgeTag::Hole => "hole",
            EdgeTag::DeadEnd => "dead-end",
            EdgeTag::Threat => "threat",
            EdgeTag::Escape => "escape",
            EdgeTag::Guard => "guard",
            EdgeTag::Opening => "opening",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        EdgeTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub id: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub tag: EdgeTag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    pub directed: bool,
    pub nodes: Vec<GraphNode>,
    /// Undirected graphs store each edge once; `from`/`to` order is not significant.
    pub edges: Vec<GraphEdge>,
    pub c: usize,
    pub m: usize,
    pub h: usize,
    pub d: usize,
    index: HashMap<String, usize>,
}

impl GameGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn id(&self, node: usize) -> &str {
        &self.nodes[node].id
    }

    pub fn role(&self, node: usize) -> &NodeRole {
        &self.nodes[node].role
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn lookup(&self, id: &str) -> Result<usize, ReductionError> {
        self.find(id).ok_or_else(|| ReductionError::UnknownNode(id.to_string()))
    }

    /// Moves available from `node`, in edge-insertion order.
    pub fn successors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.from == node {
                out.push(e.to);
            } else if !self.directed && e.to == node {
                out.push(e.from);
            }
        }
        out
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.from == node || e.to == node)
            .count()
    }

    pub fn edges_tagged(&self, tag: EdgeTag) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.tag == tag)
    }
}

/// The bijection between Mouse-side and Cat-side nodes, plus every node's layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceMap {
    cat_of: Vec<Option<usize>>,
    mouse_of: Vec<Option<usize>>,
    layer: Vec<u32>,
}

impl CorrespondenceMap {
    pub fn cat_of(&self, mouse_node: usize) -> Option<usize> {
        self.cat_of.get(mouse_node).copied().flatten()
    }

    pub fn mouse_of(&self, cat_node: usize) -> Option<usize> {
        self.mouse_of.get(cat_node).copied().flatten()
    }

    pub fn layer(&self, node: usize) -> u32 {
        self.layer[node]
    }

    /// `(mouse node, cat node)` pairs in Mouse-node order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cat_of
            .iter()
            .enumerate()
            .filter_map(|(m, c)| c.map(|c| (m, c)))
    }
}

/// Layer of the node named `id`.
pub fn layer_of(graph: &GameGraph, map: &CorrespondenceMap, id: &str) -> Result<u32, ReductionError> {
    Ok(map.layer(graph.lookup(id)?))
}

struct Builder {
    nodes: Vec<GraphNode>,
    layers: Vec<u32>,
    edges: Vec<GraphEdge>,
    index: HashMap<String, usize>,
    edge_set: HashSet<(usize, usize)>,
}

impl Builder {
    fn node(&mut self, role: NodeRole, layer: u32) -> usize {
        let id = role.default_id();
        let idx = self.nodes.len();
        self.index.insert(id.clone(), idx);
        self.nodes.push(GraphNode { id, role });
        self.layers.push(layer);
        idx
    }

    fn edge(&mut self, from: usize, to: usize, tag: EdgeTag) {
        debug_assert_ne!(from, to);
        if self.edge_set.insert((from, to)) {
            self.edges.push(GraphEdge { from, to, tag });
        }
    }
}

/// Node indices of the reduction's components, recovered from node roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    /// `gadgets[gate][side]` holds nodes 1..=5 at indices 0..=4; side 0 is Cat.
    pub gadgets: Vec<[[usize; 5]; 2]>,
    /// `inputs[input][side]`, side 0 is Cat.
    pub inputs: Vec<[usize; 2]>,
    /// `escapes[gate][branch]` lists `t1, t2, ...`; branch 0 is left.
    pub escapes: Vec<[Vec<usize>; 2]>,
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Cat => 0,
        Side::Mouse => 1,
    }
}

fn branch_slot(branch: Branch) -> usize {
    match branch {
        Branch::Left => 0,
        Branch::Right => 1,
    }
}

impl Layout {
    pub fn from_graph(graph: &GameGraph, circuit: &Circuit) -> Result<Self, ReductionError> {
        let missing = usize::MAX;
        let g = circuit.gates().len();
        let mut gadgets = vec![[[missing; 5]; 2]; g];
        let mut inputs = vec![[missing; 2]; circuit.num_inputs()];
        let mut escapes: Vec<[Vec<(u32, usize)>; 2]> = vec![[Vec::new(), Vec::new()]; g];
        let gate_idx = |id: &str| {
            circuit
                .gate_index(id)
                .ok_or_else(|| ReductionError::InconsistentGraph(format!("no gate `{id}` in circuit")))
        };
        for (idx, node) in graph.nodes.iter().enumerate() {
            match &node.role {
                NodeRole::Gadget {
                    gate,
                    position,
                    side,
                } => gadgets[gate_idx(gate)?][side_slot(*side)][*position as usize - 1] = idx,
                NodeRole::Input { index, side } => {
                    if *index >= inputs.len() {
                        return Err(ReductionError::InconsistentGraph(format!("no input {index}")));
                    }
                    inputs[*index][side_slot(*side)] = idx
                }
                NodeRole::Escape { gate, branch, step } => {
                    escapes[gate_idx(gate)?][branch_slot(*branch)].push((*step, idx))
                }
                _ => {}
            }
        }
        let complete = gadgets.iter().flatten().flatten().all(|&n| n != missing)
            && inputs.iter().flatten().all(|&n| n != missing);
        if !complete {
            return Err(ReductionError::InconsistentGraph(
                "graph does not match the circuit".into(),
            ));
        }
        let escapes = escapes
            .into_iter()
            .map(|chains| {
                chains.map(|mut chain| {
                    chain.sort();
                    chain.into_iter().map(|(_, n)| n).collect()
                })
            })
            .collect();
        Ok(Layout {
            gadgets,
            inputs,
            escapes,
        })
    }

    pub fn gadget(&self, gate: usize, side: Side, position: u8) -> usize {
        self.gadgets[gate][side_slot(side)][position as usize - 1]
    }

    pub fn input(&self, index: usize, side: Side) -> usize {
        self.inputs[index][side_slot(side)]
    }

    pub fn escape_chain(&self, gate: usize, branch: Branch) -> &[usize] {
        &self.escapes[gate][branch_slot(branch)]
    }

    /// Node 1 of a gate's gadget, or the input node, on `side`.
    pub fn entry(&self, node: NodeRef, side: Side) -> usize {
        match node {
            NodeRef::Input(i) => self.input(i, side),
            NodeRef::Gate(g) => self.gadget(g, side, 1),
        }
    }
}

/// Builds the directed game graph for `(c, x)`.
pub fn build_directed(
    c: &Circuit,
    x: &Assignment,
) -> Result<(GameGraph, CorrespondenceMap), ReductionError> {
    if x.len() != c.num_inputs() {
        return Err(CircuitError::LengthMismatch {
            expected: c.num_inputs(),
            got: x.len(),
        }
        .into());
    }
    let depth = c.depth();
    let mut b = Builder {
        nodes: Vec::new(),
        layers: Vec::new(),
        edges: Vec::new(),
        index: HashMap::new(),
        edge_set: HashSet::new(),
    };
    let cat_start = b.node(NodeRole::CatStart, 3 * depth + 2);
    let hole = b.node(NodeRole::Hole, 0);
    let dead = b.node(NodeRole::DeadEnd, 0);

    let sides = [Side::Cat, Side::Mouse];
    let mut input_nodes = Vec::with_capacity(c.num_inputs());
    for index in 0..c.num_inputs() {
        input_nodes.push(sides.map(|side| b.node(NodeRole::Input { index, side }, 1)));
    }

    let layering = c.layering();
    let mut gadgets: Vec<[[usize; 5]; 2]> = Vec::with_capacity(c.gates().len());
    let mut escapes: Vec<[Vec<usize>; 2]> = Vec::with_capacity(c.gates().len());
    for (gi, gate) in c.gates().iter().enumerate() {
        let j = layering.layer(NodeRef::Gate(gi));
        let gadget_layers = [3 * j + 1, 3 * j, 3 * j, 3 * j - 1, 3 * j - 1];
        let nodes = sides.map(|side| {
            let mut ids = [0usize; 5];
            for (k, id) in ids.iter_mut().enumerate() {
                *id = b.node(
                    NodeRole::Gadget {
                        gate: gate.id.clone(),
                        position: k as u8 + 1,
                        side,
                    },
                    gadget_layers[k],
                );
            }
            ids
        });
        // Chain of 3j - 2 nodes: t1 sits on layer 3j - 2 and t_last on layer 1.
        let chain_len = 3 * j - 2;
        let chains = [Branch::Left, Branch::Right].map(|branch| {
            (1..=chain_len)
                .map(|step| {
                    b.node(
                        NodeRole::Escape {
                            gate: gate.id.clone(),
                            branch,
                            step,
                        },
                        3 * j - 1 - step,
                    )
                })
                .collect::<Vec<_>>()
        });
        gadgets.push(nodes);
        escapes.push(chains);
    }

    let entry = |node: NodeRef, side: usize, gadgets: &Vec<[[usize; 5]; 2]>| match node {
        NodeRef::Input(i) => input_nodes[i][side],
        NodeRef::Gate(g) => gadgets[g][side][0],
    };

    b.edge(cat_start, gadgets[c.output()][0][0], EdgeTag::Opening);
    for (gi, gate) in c.gates().iter().enumerate() {
        for side in 0..2 {
            let n = gadgets[gi][side];
            for (from, to) in [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4)] {
                b.edge(n[from], n[to], EdgeTag::Internal);
            }
            b.edge(n[3], entry(gate.left, side, &gadgets), EdgeTag::Inter);
            b.edge(n[4], entry(gate.right, side, &gadgets), EdgeTag::Inter);
        }
    }
    for (i, nodes) in input_nodes.iter().enumerate() {
        if x.bit(i) {
            b.edge(nodes[0], hole, EdgeTag::Hole);
            b.edge(nodes[1], hole, EdgeTag::Hole);
        }
    }
    for (i, nodes) in input_nodes.iter().enumerate() {
        if !x.bit(i) {
            b.edge(nodes[1], dead, EdgeTag::DeadEnd);
        }
        b.edge(nodes[0], dead, EdgeTag::DeadEnd);
    }
    for (gi, gate) in c.gates().iter().enumerate() {
        if gate.kind == GateKind::And {
            let [cat, mouse] = gadgets[gi];
            b.edge(cat[1], mouse[4], EdgeTag::Threat);
            b.edge(cat[2], mouse[3], EdgeTag::Threat);
        }
    }
    for gi in 0..c.gates().len() {
        let [cat, mouse] = gadgets[gi];
        for (slot, chain) in escapes[gi].iter().enumerate() {
            let bottom = 3 + slot;
            b.edge(cat[bottom], chain[0], EdgeTag::Escape);
            b.edge(mouse[bottom], chain[0], EdgeTag::Escape);
            for w in chain.windows(2) {
                b.edge(w[0], w[1], EdgeTag::Escape);
            }
            b.edge(*chain.last().expect("chains are non-empty"), hole, EdgeTag::Escape);
        }
    }

    let n = b.nodes.len();
    let mut cat_of = vec![None; n];
    let mut mouse_of = vec![None; n];
    for nodes in &input_nodes {
        cat_of[nodes[1]] = Some(nodes[0]);
        mouse_of[nodes[0]] = Some(nodes[1]);
    }
    for [cat, mouse] in &gadgets {
        for k in 0..5 {
            cat_of[mouse[k]] = Some(cat[k]);
            mouse_of[cat[k]] = Some(mouse[k]);
        }
    }
    let m = gadgets[c.output()][1][0];
    let graph = GameGraph {
        directed: true,
        nodes: b.nodes,
        edges: b.edges,
        c: cat_start,
        m,
        h: hole,
        d: dead,
        index: b.index,
    };
    let map = CorrespondenceMap {
        cat_of,
        mouse_of,
        layer: b.layers,
    };
    Ok((graph, map))
}

/// Builds the undirected game graph: the directed edges without orientation,
/// plus a guard edge `m1 -- cat_of(m2)` for each Mouse-side edge `m1 -> m2`.
pub fn build_undirected(
    c: &Circuit,
    x: &Assignment,
) -> Result<(GameGraph, CorrespondenceMap), ReductionError> {
    let (mut graph, map) = build_directed(c, x)?;
    graph.directed = false;
    let guards: Vec<GraphEdge> = graph
        .edges
        .iter()
        .filter(|e| matches!(e.tag, EdgeTag::Internal | EdgeTag::Inter))
        .filter(|e| graph.role(e.from).side() == Some(Side::Mouse))
        .map(|e| GraphEdge {
            from: e.from,
            to: map.cat_of(e.to).expect("mouse-side edges end on paired nodes"),
            tag: EdgeTag::Guard,
        })
        .collect();
    graph.edges.extend(guards);
    Ok((graph, map))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub per_tag: BTreeMap<EdgeTag, usize>,
    pub per_role: BTreeMap<&'static str, usize>,
}

pub fn stats(g: &GameGraph) -> GraphStats {
    let mut per_tag: BTreeMap<EdgeTag, usize> = EdgeTag::ALL.iter().map(|&t| (t, 0)).collect();
    for e in &g.edges {
        *per_tag.entry(e.tag).or_default() += 1;
    }
    let mut per_role = BTreeMap::new();
    for n in &g.nodes {
        *per_role.entry(n.role.kind_name()).or_default() += 1;
    }
    GraphStats {
        nodes: g.nodes.len(),
        edges: g.edges.len(),
        per_tag,
        per_role,
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes {}", self.nodes)?;
        writeln!(f, "edges {}", self.edges)?;
        for (tag, count) in &self.per_tag {
            writeln!(f, "edges.{} {count}", tag.name())?;
        }
        for (role, count) in &self.per_role {
            writeln!(f, "nodes.{role} {count}")?;
        }
        Ok(())
    }
}

/// Number of nodes the construction produces for `c`.
pub fn expected_node_count(c: &Circuit) -> usize {
    let layering = c.layering();
    let escape: usize = (0..c.gates().len())
        .map(|g| 2 * (3 * layering.layer(NodeRef::Gate(g)) as usize - 2))
        .sum();
    10 * c.gates().len() + 2 * c.num_inputs() + 3 + escape
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Structured,
}

pub fn export_graph(g: &GameGraph, map: &CorrespondenceMap, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => export_dot(g),
        ExportFormat::Structured => export_structured(g, map),
    }
}

fn export_structured(g: &GameGraph, map: &CorrespondenceMap) -> String {
    let mut out = format!("game {}\n", if g.directed { "directed" } else { "undirected" });
    for n in &g.nodes {
        out.push_str(&format!("node {} {}\n", n.id, n.role));
    }
    for e in &g.edges {
        out.push_str(&format!("edge {} {} {}\n", g.id(e.from), g.id(e.to), e.tag.name()));
    }
    out.push_str(&format!(
        "special c={} m={} h={} d={}\n",
        g.id(g.c),
        g.id(g.m),
        g.id(g.h),
        g.id(g.d)
    ));
    for (m, c) in map.pairs() {
        out.push_str(&format!("pair {} {}\n", g.id(m), g.id(c)));
    }
    for (idx, n) in g.nodes.iter().enumerate() {
        out.push_str(&format!("layer {} {}\n", n.id, map.layer(idx)));
    }
    out
}

fn dot_label(role: &NodeRole) -> String {
    match role {
        NodeRole::CatStart => "c".into(),
        NodeRole::Hole => "h".into(),
        NodeRole::DeadEnd => "d".into(),
        NodeRole::Gadget {
            gate,
            position,
            side,
        } => format!("{}{position}\\n{gate}", side.tag()),
        NodeRole::Input { index, side } => format!("{}:i{index}", side.tag()),
        NodeRole::Escape { gate, branch, step } => format!("t{step}\\n{gate}.{}", branch.tag()),
    }
}

fn export_dot(g: &GameGraph) -> String {
    let (kw, arrow) = if g.directed {
        ("digraph", "->")
    } else {
        ("graph", "--")
    };
    let mut out = format!("{kw} catmouse {{\n  rankdir=TB;\n");
    for (idx, n) in g.nodes.iter().enumerate() {
        let mut attrs = vec![format!("label=\"{}\"", dot_label(&n.role))];
        match &n.role {
            NodeRole::Escape { .. } => attrs.push("style=filled, fillcolor=gray80".into()),
            NodeRole::Hole => attrs.push("shape=doublecircle".into()),
            NodeRole::CatStart | NodeRole::DeadEnd => attrs.push("shape=box".into()),
            _ if idx == g.m => attrs.push("shape=box".into()),
            _ => {}
        }
        out.push_str(&format!("  \"{}\" [{}];\n", n.id, attrs.join(", ")));
    }
    for e in &g.edges {
        let style = match e.tag {
            EdgeTag::Threat => " [style=dashed]",
            EdgeTag::Guard => " [style=dotted]",
            EdgeTag::Escape => " [style=bold, color=gray40]",
            _ => "",
        };
        out.push_str(&format!(
            "  \"{}\" {arrow} \"{}\"{style};\n",
            g.id(e.from),
            g.id(e.to)
        ));
    }
    out.push_str("}\n");
    out
}

fn parse_role(tokens: &[&str]) -> Option<NodeRole> {
    match tokens {
        ["cat-start"] => Some(NodeRole::CatStart),
        ["hole"] => Some(NodeRole::Hole),
        ["dead-end"] => Some(NodeRole::DeadEnd),
        ["gadget", gate, pos, side] => {
            let position: u8 = pos.parse().ok()?;
            if !(1..=5).contains(&position) {
                return None;
            }
            Some(NodeRole::Gadget {
                gate: gate.to_string(),
                position,
                side: Side::from_tag(side)?,
            })
        }
        ["input", index, side] => Some(NodeRole::Input {
            index: index.parse().ok()?,
            side: Side::from_tag(side)?,
        }),
        ["escape", gate, branch, step] => Some(NodeRole::Escape {
            gate: gate.to_string(),
            branch: Branch::from_tag(branch)?,
            step: step.parse().ok().filter(|&s: &u32| s >= 1)?,
        }),
        _ => None,
    }
}

/// Parses the structured format written by [`export_graph`].
pub fn import_graph(text: &str) -> Result<(GameGraph, CorrespondenceMap), ReductionError> {
    let syntax = |line: usize, message: String| ReductionError::Syntax { line, message };
    let mut directed = None;
    let mut nodes: Vec<GraphNode> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut special: Option<[usize; 4]> = None;
    let mut pairs = Vec::new();
    let mut layers: Vec<Option<u32>> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let resolve = |id: &str, index: &HashMap<String, usize>| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| ReductionError::UnknownNode(id.to_string()))
        };
        match toks[0] {
            "game" if directed.is_none() && toks.len() == 2 => {
                directed = Some(match toks[1] {
                    "directed" => true,
                    "undirected" => false,
                    other => return Err(syntax(line, format!("unknown game kind `{other}`"))),
                });
            }
            _ if directed.is_none() => return Err(syntax(line, "expected `game <kind>` header".into())),
            "node" if toks.len() >= 3 => {
                let role = parse_role(&toks[2..])
                    .ok_or_else(|| syntax(line, format!("bad role for `{}`", toks[1])))?;
                if index.insert(toks[1].to_string(), nodes.len()).is_some() {
                    return Err(ReductionError::InconsistentGraph(format!(
                        "duplicate node `{}`",
                        toks[1]
                    )));
                }
                nodes.push(GraphNode {
                    id: toks[1].to_string(),
                    role,
                });
                layers.push(None);
            }
            "edge" if toks.len() == 4 => {
                let tag = EdgeTag::from_name(toks[3])
                    .ok_or_else(|| syntax(line, format!("unknown edge tag `{}`", toks[3])))?;
                edges.push(GraphEdge {
                    from: resolve(toks[1], &index)?,
                    to: resolve(toks[2], &index)?,
                    tag,
                });
            }
            "special" if toks.len() == 5 => {
                let mut ids = [0usize; 4];
                for (slot, (key, tok)) in ["c=", "m=", "h=", "d="].iter().zip(&toks[1..]).enumerate() {
                    let id = tok
                        .strip_prefix(key)
                        .ok_or_else(|| syntax(line, format!("expected `{key}<id>`")))?;
                    ids[slot] = resolve(id, &index)?;
                }
                special = Some(ids);
            }
            "pair" if toks.len() == 3 => {
                pairs.push((resolve(toks[1], &index)?, resolve(toks[2], &index)?));
            }
            "layer" if toks.len() == 3 => {
                let node = resolve(toks[1], &index)?;
                let value = toks[2]
                    .parse()
                    .map_err(|_| syntax(line, format!("bad layer `{}`", toks[2])))?;
                layers[node] = Some(value);
            }
            other => return Err(syntax(line, format!("unexpected `{other}` line"))),
        }
    }
    let directed = directed.ok_or_else(|| syntax(0, "missing `game` header".into()))?;
    let [c, m, h, d] = special.ok_or_else(|| syntax(0, "missing `special` line".into()))?;
    let layer = layers
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| {
                ReductionError::InconsistentGraph(format!("node `{}` has no layer", nodes[i].id))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut cat_of = vec![None; nodes.len()];
    let mut mouse_of = vec![None; nodes.len()];
    for (mn, cn) in pairs {
        if cat_of[mn].is_some() || mouse_of[cn].is_some() {
            return Err(ReductionError::InconsistentGraph(format!(
                "pair `{}` `{}` breaks the bijection",
                nodes[mn].id, nodes[cn].id
            )));
        }
        cat_of[mn] = Some(cn);
        mouse_of[cn] = Some(mn);
    }
    let graph = GameGraph {
        directed,
        nodes,
        edges,
        c,
        m,
        h,
        d,
        index,
    };
    let map = CorrespondenceMap {
        cat_of,
        mouse_of,
        layer,
    };
    check_consistency(&graph, &map)?;
    Ok((graph, map))
}

/// Verifies the structural invariants every game graph must satisfy.
pub fn check_consistency(g: &GameGraph, map: &CorrespondenceMap) -> Result<(), ReductionError> {
    let bad = |msg: String| Err(ReductionError::InconsistentGraph(msg));
    let mut seen = HashSet::new();
    for e in &g.edges {
        if e.from == e.to {
            return bad(format!("self-loop at `{}`", g.id(e.from)));
        }
        let key = if g.directed {
            (e.from, e.to)
        } else {
            (e.from.min(e.to), e.from.max(e.to))
        };
        if !seen.insert(key) {
            return bad(format!("parallel edge `{}` `{}`", g.id(e.from), g.id(e.to)));
        }
        let (lf, lt) = (map.layer(e.from), map.layer(e.to));
        let adjacent = if g.directed {
            lf == lt + 1
        } else {
            lf.abs_diff(lt) == 1
        };
        if !adjacent {
            return bad(format!(
                "edge `{}` -> `{}` spans layers {lf} and {lt}",
                g.id(e.from),
                g.id(e.to)
            ));
        }
    }
    let expect_role = |node: usize, want: &NodeRole| {
        if g.role(node) == want {
            Ok(())
        } else {
            bad(format!("`{}` does not have role {want}", g.id(node)))
        }
    };
    expect_role(g.c, &NodeRole::CatStart)?;
    expect_role(g.h, &NodeRole::Hole)?;
    expect_role(g.d, &NodeRole::DeadEnd)?;
    match g.role(g.m) {
        NodeRole::Gadget {
            position: 1,
            side: Side::Mouse,
            ..
        } => {}
        _ => return bad(format!("`{}` is not a Mouse-side node 1", g.id(g.m))),
    }
    let opening: Vec<&GraphEdge> = g
        .edges
        .iter()
        .filter(|e| e.from == g.c || e.to == g.c)
        .collect();
    if opening.len() != 1 || opening[0].from != g.c || Some(opening[0].to) != map.cat_of(g.m) {
        return bad("the Cat start must have a single edge to the Cat copy of the Mouse start".into());
    }
    for (m, c) in map.pairs() {
        if g.role(m).side() != Some(Side::Mouse) || g.role(c).side() != Some(Side::Cat) {
            return bad(format!("pair `{}` `{}` crosses sides wrongly", g.id(m), g.id(c)));
        }
        if map.layer(m) != map.layer(c) {
            return bad(format!("pair `{}` `{}` has unequal layers", g.id(m), g.id(c)));
        }
    }
    for (idx, node) in g.nodes.iter().enumerate() {
        let paired = match node.role.side() {
            Some(Side::Mouse) => map.cat_of(idx).is_some(),
            Some(Side::Cat) => map.mouse_of(idx).is_some(),
            None => true,
        };
        if !paired {
            return bad(format!("`{}` has no counterpart", node.id));
        }
    }
    Ok(())
}
