//! End-to-end checks that the reduction preserves the circuit's value:
//! true circuits give Mouse a win, false ones give Cat a win, on both the
//! directed and undirected graphs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{
    generate_random, Assignment, Circuit, CircuitError, GateKind, GenParams, NodeValues,
};
use crate::reduction::{
    build_directed, build_undirected, check_consistency, expected_node_count, export_graph, stats,
    Branch, CorrespondenceMap, EdgeTag, ExportFormat, GameGraph, GraphStats, Layout, NodeRole,
    ReductionError, Side,
};
use crate::solver::{
    play_match, solve_reachable, EndReason, GameInstance, MatchError, Outcome, Player, SolveError,
    Solution, Transcript,
};
use crate::strategy::{
    BacktrackCat, BacktrackMouse, GuardCrossMouse, MirrorCat, OptimalStrategy, Strategy,
    StrategyError, ThreatCrossMouse, TruePathMouse,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Directed,
    Undirected,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Directed, Mode::Undirected];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Directed => "directed",
            Mode::Undirected => "undirected",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "directed" => Ok(Mode::Directed),
            "undirected" => Ok(Mode::Undirected),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// A node's role with gate names resolved to circuit indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeInfo {
    CatStart,
    Hole,
    DeadEnd,
    Gadget { gate: usize, position: u8, side: Side },
    Input { index: usize, side: Side },
    Escape { gate: usize, branch: Branch, step: u32 },
}

/// A circuit instance compiled into one game graph, with everything the
/// strategies and checks need.
#[derive(Debug)]
pub struct BuiltGame {
    pub mode: Mode,
    pub circuit: Circuit,
    pub assignment: Assignment,
    pub value: bool,
    pub values: NodeValues,
    pub graph: GameGraph,
    pub map: CorrespondenceMap,
    pub layout: Layout,
    pub instance: GameInstance,
    info: Vec<NodeInfo>,
    solution: OnceLock<Arc<Solution>>,
}

impl BuiltGame {
    pub fn new(c: &Circuit, x: &Assignment, mode: Mode) -> Result<Self, HarnessError> {
        let (value, values) = c.evaluate(x)?;
        let (graph, map) = match mode {
            Mode::Directed => build_directed(c, x)?,
            Mode::Undirected => build_undirected(c, x)?,
        };
        let layout = Layout::from_graph(&graph, c)?;
        let gate = |id: &str| c.gate_index(id).expect("layout checked every gate id");
        let info = graph
            .nodes
            .iter()
            .map(|n| match &n.role {
                NodeRole::CatStart => NodeInfo::CatStart,
                NodeRole::Hole => NodeInfo::Hole,
                NodeRole::DeadEnd => NodeInfo::DeadEnd,
                NodeRole::Gadget {
                    gate: g,
                    position,
                    side,
                } => NodeInfo::Gadget {
                    gate: gate(g),
                    position: *position,
                    side: *side,
                },
                NodeRole::Input { index, side } => NodeInfo::Input {
                    index: *index,
                    side: *side,
                },
                NodeRole::Escape { gate: g, branch, step } => NodeInfo::Escape {
                    gate: gate(g),
                    branch: *branch,
                    step: *step,
                },
            })
            .collect();
        let instance = GameInstance::from_game_graph(&graph)?;
        Ok(BuiltGame {
            mode,
            circuit: c.clone(),
            assignment: x.clone(),
            value,
            values,
            graph,
            map,
            layout,
            instance,
            info,
            solution: OnceLock::new(),
        })
    }

    pub fn info(&self, node: usize) -> NodeInfo {
        self.info[node]
    }

    pub fn layer(&self, node: usize) -> u32 {
        self.map.layer(node)
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.instance.board().successors(node)
    }

    pub fn is_move(&self, from: usize, to: usize) -> bool {
        self.instance.board().is_move(from, to)
    }

    /// Solution over the states reachable from the start, computed once.
    pub fn solution(&self) -> Arc<Solution> {
        Arc::clone(
            self.solution
                .get_or_init(|| Arc::new(solve_reachable(&self.instance))),
        )
    }

    pub fn outcome(&self) -> Outcome {
        self.solution().outcome()
    }

    /// Enough plies for any match to repeat a state.
    pub fn ply_budget(&self) -> usize {
        self.instance.state_count() + 1
    }

    pub fn play(
        &self,
        cat: &mut dyn Strategy,
        mouse: &mut dyn Strategy,
    ) -> Result<Transcript, MatchError> {
        play_match(&self.instance, cat, mouse, self.ply_budget())
    }

    pub fn expected_outcome(&self) -> Outcome {
        if self.value {
            Outcome::MouseWin
        } else {
            Outcome::CatWin
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub assignment: String,
    pub value: bool,
    pub outcomes: Vec<(Mode, Outcome)>,
    pub equivalence_ok: bool,
    pub draw_seen: bool,
    pub stats: Vec<(Mode, GraphStats)>,
    pub seed: Option<u64>,
    pub params: Option<GenParams>,
}

impl VerificationReport {
    pub fn outcome(&self, mode: Mode) -> Option<Outcome> {
        self.outcomes.iter().find(|(m, _)| *m == mode).map(|(_, o)| *o)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "assignment {}", self.assignment)?;
        writeln!(f, "value {}", self.value as u8)?;
        for (mode, outcome) in &self.outcomes {
            writeln!(f, "{mode} {outcome}")?;
        }
        writeln!(f, "draw_seen {}", self.draw_seen)?;
        if let Some(seed) = self.seed {
            writeln!(f, "seed {seed}")?;
        }
        if let Some(p) = &self.params {
            writeln!(
                f,
                "params layers={} width={} inputs={} p_or={} fanout2={}",
                p.layers, p.width, p.num_inputs, p.p_or, p.fanout2
            )?;
        }
        for (mode, s) in &self.stats {
            for line in s.to_string().lines() {
                writeln!(f, "stats.{mode}.{line}")?;
            }
        }
        writeln!(f, "{}", if self.equivalence_ok { "ok" } else { "mismatch" })
    }
}

/// Builds, solves and compares each requested mode against the circuit value.
pub fn verify_equivalence(
    c: &Circuit,
    x: &Assignment,
    modes: &[Mode],
) -> Result<VerificationReport, HarnessError> {
    let (value, _) = c.evaluate(x)?;
    let expected = if value {
        Outcome::MouseWin
    } else {
        Outcome::CatWin
    };
    let mut outcomes = Vec::new();
    let mut graph_stats = Vec::new();
    for &mode in modes {
        let game = BuiltGame::new(c, x, mode)?;
        outcomes.push((mode, game.outcome()));
        graph_stats.push((mode, stats(&game.graph)));
    }
    Ok(VerificationReport {
        assignment: x.to_string(),
        value,
        equivalence_ok: outcomes.iter().all(|(_, o)| *o == expected),
        draw_seen: outcomes.iter().any(|(_, o)| *o == Outcome::Draw),
        outcomes,
        stats: graph_stats,
        seed: None,
        params: None,
    })
}

/// Structural invariants of a built instance; returns every violation found.
pub fn structural_violations(game: &BuiltGame) -> Vec<String> {
    let g = &game.graph;
    let map = &game.map;
    let c = &game.circuit;
    let mut out = Vec::new();

    if let Err(e) = check_consistency(g, map) {
        out.push(e.to_string());
    }
    if g.node_count() != expected_node_count(c) {
        out.push(format!(
            "node count {} != expected {}",
            g.node_count(),
            expected_node_count(c)
        ));
    }
    if g.degree(g.c) != 1 {
        out.push(format!("Cat start has degree {}", g.degree(g.c)));
    }

    let ands = c.gates().iter().filter(|gate| gate.kind == GateKind::And).count();
    let threats = g.edges_tagged(EdgeTag::Threat).count();
    if threats != 2 * ands {
        out.push(format!("{threats} threat edges for {ands} AND gates"));
    }
    for e in g.edges_tagged(EdgeTag::Threat) {
        let at_and = matches!(game.info(e.from), NodeInfo::Gadget { gate, side: Side::Cat, .. }
            if c.gate(gate).kind == GateKind::And);
        if !at_and {
            out.push(format!("threat edge from `{}` outside an AND gadget", g.id(e.from)));
        }
    }

    // Mouse-side circuit edges, and their Cat-side images.
    let mouse_edges: HashSet<(usize, usize)> = g
        .edges
        .iter()
        .filter(|e| matches!(e.tag, EdgeTag::Internal | EdgeTag::Inter))
        .filter(|e| g.role(e.from).side() == Some(Side::Mouse))
        .map(|e| (e.from, e.to))
        .collect();
    let cat_edges: HashSet<(usize, usize)> = g
        .edges
        .iter()
        .filter(|e| matches!(e.tag, EdgeTag::Internal | EdgeTag::Inter))
        .filter(|e| g.role(e.from).side() == Some(Side::Cat))
        .map(|e| (e.from, e.to))
        .collect();
    let image: HashSet<(usize, usize)> = mouse_edges
        .iter()
        .filter_map(|&(a, b)| Some((map.cat_of(a)?, map.cat_of(b)?)))
        .collect();
    if image != cat_edges || image.len() != mouse_edges.len() {
        out.push("Cat and Mouse subgraphs are not isomorphic under the correspondence".into());
    }

    let guards: Vec<(usize, usize)> = g.edges_tagged(EdgeTag::Guard).map(|e| (e.from, e.to)).collect();
    match game.mode {
        Mode::Directed if !guards.is_empty() => out.push("directed graph has guard edges".into()),
        Mode::Directed => {}
        Mode::Undirected => {
            let preimage: HashSet<(usize, usize)> = guards
                .iter()
                .filter_map(|&(m1, c2)| Some((m1, map.mouse_of(c2)?)))
                .collect();
            if guards.len() != mouse_edges.len() || preimage != mouse_edges {
                out.push(format!(
                    "{} guard edges are not in bijection with {} Mouse-side edges",
                    guards.len(),
                    mouse_edges.len()
                ));
            }
        }
    }

    let mut escape_seen = HashSet::new();
    for gi in 0..c.gates().len() {
        for branch in [Branch::Left, Branch::Right] {
            let chain = game.layout.escape_chain(gi, branch);
            for &t in chain {
                if !escape_seen.insert(t) {
                    out.push(format!("escape node `{}` shared between chains", g.id(t)));
                }
            }
            for side in [Side::Cat, Side::Mouse] {
                let bottom = game.layout.gadget(gi, side, branch.position());
                if chain.len() as u32 + 1 != map.layer(bottom) {
                    out.push(format!(
                        "escape chain below `{}` has {} nodes for layer {}",
                        g.id(bottom),
                        chain.len(),
                        map.layer(bottom)
                    ));
                }
                if !game.is_move(bottom, chain[0]) {
                    out.push(format!("`{}` does not enter its escape chain", g.id(bottom)));
                }
            }
            let linked = chain.windows(2).all(|w| game.is_move(w[0], w[1]))
                && game.is_move(*chain.last().unwrap(), g.h);
            if !linked {
                out.push(format!("escape chain {}/{} is broken", c.gate(gi).id, branch.tag()));
            }
        }
    }

    // Forward distance to the Hole, following layer-decreasing edges only.
    let n = g.node_count();
    let mut dist: Vec<Option<u32>> = vec![None; n];
    dist[g.h] = Some(0);
    let mut by_layer: Vec<usize> = (0..n).collect();
    by_layer.sort_by_key(|&v| map.layer(v));
    for &v in &by_layer {
        if v == g.h {
            continue;
        }
        let best = game
            .successors(v)
            .filter(|&w| map.layer(w) + 1 == map.layer(v))
            .filter_map(|w| dist[w])
            .max();
        let worst = game
            .successors(v)
            .filter(|&w| map.layer(w) + 1 == map.layer(v))
            .filter_map(|w| dist[w])
            .min();
        if best != worst {
            out.push(format!("forward paths from `{}` differ in length", g.id(v)));
        }
        dist[v] = best.map(|d| d + 1);
    }
    for (v, node) in g.nodes.iter().enumerate() {
        let exempt = match node.role {
            NodeRole::Input { index, .. } => !game.assignment.bit(index),
            NodeRole::Hole | NodeRole::DeadEnd => true,
            _ => false,
        };
        if exempt {
            continue;
        }
        if dist[v] != Some(map.layer(v)) {
            out.push(format!(
                "`{}` has forward distance {:?} but layer {}",
                node.id,
                dist[v],
                map.layer(v)
            ));
        }
    }
    out
}

/// Results of playing the scripted strategies on one instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofReport {
    pub failures: Vec<String>,
    /// NoMove / NoSafeMove raised by a scripted strategy.
    pub script_errors: usize,
    pub matches: usize,
}

impl ProofReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.script_errors == 0
    }
}

fn record_match(
    report: &mut ProofReport,
    label: &str,
    result: Result<Transcript, MatchError>,
) -> Option<Transcript> {
    report.matches += 1;
    match result {
        Ok(t) => Some(t),
        Err(e) => {
            if matches!(
                e,
                MatchError::Policy {
                    source: StrategyError::NoMove(_) | StrategyError::NoSafeMove(_),
                    ..
                }
            ) {
                report.script_errors += 1;
            }
            report.failures.push(format!("{label}: {e}"));
            None
        }
    }
}

/// Plays the scripted Cat and Mouse against the solver and each other.
pub fn proof_matches(game: &Arc<BuiltGame>) -> ProofReport {
    let mut report = ProofReport::default();
    let solution = game.solution();
    let expected = game.expected_outcome();

    if game.value {
        let mut cat = OptimalStrategy::new(Arc::clone(&solution));
        let mut mouse = TruePathMouse::new(Arc::clone(game));
        if let Some(t) = record_match(&mut report, "true-path vs optimal", game.play(&mut cat, &mut mouse)) {
            if t.result != Outcome::MouseWin {
                report
                    .failures
                    .push(format!("true-path Mouse lost to optimal Cat ({} {})", t.result, t.reason));
            }
        }
    } else {
        let mut cat = MirrorCat::new(Arc::clone(game));
        let mut mouse = OptimalStrategy::new(Arc::clone(&solution));
        if let Some(t) = record_match(&mut report, "mirror vs optimal", game.play(&mut cat, &mut mouse)) {
            if t.result != Outcome::CatWin {
                report
                    .failures
                    .push(format!("mirror Cat lost to optimal Mouse ({} {})", t.result, t.reason));
            }
        }
    }

    let mut cat = MirrorCat::new(Arc::clone(game));
    let mut mouse = TruePathMouse::new(Arc::clone(game));
    if let Some(t) = record_match(&mut report, "mirror vs true-path", game.play(&mut cat, &mut mouse)) {
        if t.result != expected {
            report.failures.push(format!(
                "mirror vs true-path gave {} ({}), circuit value {}",
                t.result, t.reason, game.value as u8
            ));
        } else if t.result == Outcome::MouseWin {
            let layer_m = game.layer(game.graph.m) as usize;
            if t.moves_by(Player::Mouse) != layer_m || t.plies() != 2 * layer_m {
                report.failures.push(format!(
                    "winning line has {} Mouse moves and {} plies; layer(m) = {layer_m}",
                    t.moves_by(Player::Mouse),
                    t.plies()
                ));
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbeKind {
    /// Mouse steps back within its subgraph against the mirroring Cat.
    MouseBacktrack,
    /// Mouse walks back along a threat edge into the Cat subgraph.
    ThreatCross,
    /// Mouse steps forward along a guard edge into the Cat subgraph.
    GuardCross,
    /// Cat steps back a layer against the optimal Mouse on a true circuit.
    CatBacktrack,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 4] = [
        ProbeKind::MouseBacktrack,
        ProbeKind::ThreatCross,
        ProbeKind::GuardCross,
        ProbeKind::CatBacktrack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::MouseBacktrack => "mouse-backtrack",
            ProbeKind::ThreatCross => "threat-cross",
            ProbeKind::GuardCross => "guard-cross",
            ProbeKind::CatBacktrack => "cat-backtrack",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub kind: ProbeKind,
    pub deviation_ply: usize,
    pub result: Outcome,
    pub reason: EndReason,
    pub plies: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbeReport {
    pub results: Vec<ProbeResult>,
    pub errors: Vec<String>,
}

impl ProbeReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty() && self.results.iter().all(|r| r.ok)
    }

    pub fn of_kind(&self, kind: ProbeKind) -> impl Iterator<Item = &ProbeResult> {
        self.results.iter().filter(move |r| r.kind == kind)
    }
}

/// Runs every deviation probe at every point along the scripted line where it
/// applies. Mouse deviations must be captured on the very next ply; Cat
/// backtracks on a true circuit must lose.
pub fn targeted_undirected_checks(c: &Circuit, x: &Assignment) -> Result<ProbeReport, HarnessError> {
    let game = Arc::new(BuiltGame::new(c, x, Mode::Undirected)?);
    let mut report = ProbeReport::default();
    let horizon = game.layer(game.graph.m) as usize + 1;
    let solution = game.solution();

    for kind in ProbeKind::ALL {
        if kind == ProbeKind::CatBacktrack && !game.value {
            continue;
        }
        let mut seen = HashSet::new();
        for after in 0..=horizon {
            let (mut cat, mut mouse): (Box<dyn Strategy>, Box<dyn Strategy>) = match kind {
                ProbeKind::MouseBacktrack => (
                    Box::new(MirrorCat::new(Arc::clone(&game))),
                    Box::new(BacktrackMouse::new(Arc::clone(&game), after)),
                ),
                ProbeKind::ThreatCross => (
                    Box::new(MirrorCat::new(Arc::clone(&game))),
                    Box::new(ThreatCrossMouse::new(Arc::clone(&game), after)),
                ),
                ProbeKind::GuardCross => (
                    Box::new(MirrorCat::new(Arc::clone(&game))),
                    Box::new(GuardCrossMouse::new(Arc::clone(&game), after)),
                ),
                ProbeKind::CatBacktrack => (
                    Box::new(BacktrackCat::new(Arc::clone(&game), Arc::clone(&solution), after)),
                    Box::new(OptimalStrategy::new(Arc::clone(&solution))),
                ),
            };
            let t = match game.play(cat.as_mut(), mouse.as_mut()) {
                Ok(t) => t,
                Err(e) => {
                    report.errors.push(format!("{} after {after}: {e}", kind.name()));
                    continue;
                }
            };
            let deviator = match kind {
                ProbeKind::CatBacktrack => &cat,
                _ => &mouse,
            };
            let Some(ply) = deviator.deviation_ply() else {
                continue;
            };
            if !seen.insert(ply) {
                continue;
            }
            let ok = match kind {
                ProbeKind::CatBacktrack => t.result == Outcome::MouseWin,
                _ => {
                    t.result == Outcome::CatWin
                        && t.reason == EndReason::Capture
                        && t.plies() == ply + 1
                }
            };
            report.results.push(ProbeResult {
                kind,
                deviation_ply: ply,
                result: t.result,
                reason: t.reason,
                plies: t.plies(),
                ok,
            });
        }
    }
    Ok(report)
}

/// Ranges for randomly generated fuzz instances; each instance draws its
/// layers, width and inputs uniformly from `1..=max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzParams {
    pub max_layers: u32,
    pub max_width: usize,
    pub max_inputs: usize,
    /// Fixed OR probability, or `None` to draw one per instance.
    pub p_or: Option<f64>,
    pub fanout2: bool,
    pub modes: Vec<Mode>,
}

impl Default for FuzzParams {
    fn default() -> Self {
        FuzzParams {
            max_layers: 2,
            max_width: 3,
            max_inputs: 4,
            p_or: None,
            fanout2: false,
            modes: Mode::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub index: usize,
    pub seed: u64,
    pub params: GenParams,
    pub circuit: Circuit,
}

/// The circuits a fuzz run with `seed` visits, in order.
pub fn fuzz_corpus(params: &FuzzParams, seed: u64, n: usize) -> Result<Vec<CorpusEntry>, CircuitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|index| {
            let num_inputs = rng.gen_range(1..=params.max_inputs.max(1));
            let gen = GenParams {
                layers: rng.gen_range(1..=params.max_layers.max(1)),
                width: rng.gen_range(1..=params.max_width.max(1)),
                num_inputs,
                p_or: params.p_or.unwrap_or_else(|| rng.gen_range(0..=4) as f64 / 4.0),
                fanout2: params.fanout2,
            };
            let circuit_seed: u64 = rng.gen();
            Ok(CorpusEntry {
                index,
                seed: circuit_seed,
                params: gen,
                circuit: generate_random(&gen, circuit_seed)?,
            })
        })
        .collect()
}

/// Every assignment when there are at most 6 inputs, else 16 seeded samples.
pub fn assignments_for(c: &Circuit, seed: u64) -> Vec<Assignment> {
    let k = c.num_inputs();
    if k <= 6 {
        (0..1u64 << k).map(|mask| Assignment::from_mask(mask, k)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a551_9e00_0000);
        (0..16)
            .map(|_| Assignment::new((0..k).map(|_| rng.gen()).collect()))
            .collect()
    }
}

/// Everything needed to replay a failing case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reproducer {
    pub index: usize,
    pub seed: u64,
    pub mode: Option<Mode>,
    pub circuit: String,
    pub assignment: String,
    /// Structured export of the failing graph, when one was built.
    pub graph: Option<String>,
    pub detail: String,
}

impl fmt::Display for Reproducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = self.mode.map_or("-", Mode::name);
        writeln!(
            f,
            "# reproducer index={} seed={} mode={mode} assignment={}",
            self.index, self.seed, self.assignment
        )?;
        writeln!(f, "# {}", self.detail)?;
        f.write_str(&self.circuit)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub n: usize,
    pub passed: usize,
    pub assignments_checked: usize,
    pub failures: Vec<Reproducer>,
}

impl fmt::Display for FuzzSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}/{} {}",
            self.passed,
            self.n,
            if self.failures.is_empty() { "ok" } else { "FAILED" }
        )?;
        for r in &self.failures {
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

fn check_entry(entry: &CorpusEntry, modes: &[Mode]) -> (usize, Vec<Reproducer>) {
    let assignments = assignments_for(&entry.circuit, entry.seed);
    let mut failures = Vec::new();
    for x in &assignments {
        for &mode in modes {
            let repro = |detail: String, graph: Option<String>| Reproducer {
                index: entry.index,
                seed: entry.seed,
                mode: Some(mode),
                circuit: entry.circuit.serialize(),
                assignment: x.to_string(),
                graph,
                detail,
            };
            match BuiltGame::new(&entry.circuit, x, mode) {
                Ok(game) => {
                    let outcome = game.outcome();
                    if outcome != game.expected_outcome() {
                        let graph = export_graph(&game.graph, &game.map, ExportFormat::Structured);
                        failures.push(repro(
                            format!("value {} but outcome {outcome}", game.value as u8),
                            Some(graph),
                        ));
                    }
                }
                Err(e) => failures.push(repro(e.to_string(), None)),
            }
        }
    }
    (assignments.len(), failures)
}

/// Checks `n` generated circuits under every assignment; deterministic in `seed`.
pub fn fuzz_equivalence(params: &FuzzParams, seed: u64, n: usize) -> Result<FuzzSummary, CircuitError> {
    let corpus = fuzz_corpus(params, seed, n)?;
    let results: Vec<(usize, Vec<Reproducer>)> = corpus
        .par_iter()
        .map(|entry| check_entry(entry, &params.modes))
        .collect();
    let mut summary = FuzzSummary {
        n,
        ..FuzzSummary::default()
    };
    for (checked, failures) in results {
        summary.assignments_checked += checked;
        if failures.is_empty() {
            summary.passed += 1;
        }
        summary.failures.extend(failures);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn game(text: &str, bits: &str, mode: Mode) -> Arc<BuiltGame> {
        let c = parse_circuit(text).unwrap();
        Arc::new(BuiltGame::new(&c, &Assignment::parse(bits).unwrap(), mode).unwrap())
    }

    const OR: &str = "inputs 2\ngate g0 OR i0 i1\noutput g0";
    const AND: &str = "inputs 2\ngate g0 AND i0 i1\noutput g0";
    const AND_DUP: &str = "inputs 1\ngate g0 AND i0 i0\noutput g0";

    #[test]
    fn verify_examples() {
        let or = parse_circuit(OR).unwrap();
        let r = verify_equivalence(&or, &Assignment::parse("10").unwrap(), &Mode::BOTH).unwrap();
        assert!(r.value && r.equivalence_ok && !r.draw_seen);
        assert_eq!(r.outcome(Mode::Directed), Some(Outcome::MouseWin));
        assert_eq!(r.outcome(Mode::Undirected), Some(Outcome::MouseWin));

        let and = parse_circuit(AND).unwrap();
        let r = verify_equivalence(&and, &Assignment::parse("10").unwrap(), &Mode::BOTH).unwrap();
        assert!(!r.value && r.equivalence_ok);
        assert_eq!(r.outcome(Mode::Undirected), Some(Outcome::CatWin));

        let dup = parse_circuit(AND_DUP).unwrap();
        let r = verify_equivalence(&dup, &Assignment::parse("1").unwrap(), &Mode::BOTH).unwrap();
        assert!(r.value && r.equivalence_ok);
    }

    #[test]
    fn mirror_cat_examples() {
        let g = game(AND, "01", Mode::Directed);
        let n = |id: &str| g.graph.find(id).unwrap();
        let mut cat = MirrorCat::new(Arc::clone(&g));
        let view = |cat: usize, mouse: usize| crate::strategy::MatchView {
            instance: &g.instance,
            state: crate::solver::GameState {
                cat,
                mouse,
                turn: Player::Cat,
            },
            ply: 1,
        };
        assert_eq!(cat.choose(&view(g.graph.c, g.graph.m)).unwrap(), n("g0.C.1"));
        // Only the right input is true: threaten node 5 from C2.
        assert_eq!(cat.choose(&view(n("g0.C.1"), n("g0.M.2"))).unwrap(), n("g0.C.2"));

        let u = game(AND, "11", Mode::Undirected);
        let n = |id: &str| u.graph.find(id).unwrap();
        let mut cat = MirrorCat::new(Arc::clone(&u));
        let view = crate::strategy::MatchView {
            instance: &u.instance,
            state: crate::solver::GameState {
                cat: n("g0.C.2"),
                mouse: n("g0.M.1"),
                turn: Player::Cat,
            },
            ply: 5,
        };
        assert_eq!(cat.choose(&view).unwrap(), n("g0.M.1"));
    }

    #[test]
    fn true_path_mouse_examples() {
        let g = game(OR, "10", Mode::Directed);
        let n = |id: &str| g.graph.find(id).unwrap();
        let mut mouse = TruePathMouse::new(Arc::clone(&g));
        let view = |cat: usize, mouse: usize| crate::strategy::MatchView {
            instance: &g.instance,
            state: crate::solver::GameState {
                cat,
                mouse,
                turn: Player::Mouse,
            },
            ply: 3,
        };
        assert_eq!(mouse.choose(&view(n("g0.C.2"), n("g0.M.2"))).unwrap(), n("g0.M.4"));

        let g = game(AND, "11", Mode::Directed);
        let n = |id: &str| g.graph.find(id).unwrap();
        let mut mouse = TruePathMouse::new(Arc::clone(&g));
        let view = crate::strategy::MatchView {
            instance: &g.instance,
            state: crate::solver::GameState {
                cat: n("g0.C.2"),
                mouse: n("g0.M.2"),
                turn: Player::Mouse,
            },
            ply: 3,
        };
        assert_eq!(mouse.choose(&view).unwrap(), n("g0.M.4"));
        assert!(!mouse.escaped());
    }

    #[test]
    fn escape_reaches_hole_in_layer_moves() {
        // Depth-2 circuit; Cat followed the wrong child gadget, so Mouse on
        // the true gate `a` is no longer mirrored and runs for the Hole.
        let text = "inputs 3\ngate a OR i0 i1\ngate b AND i1 i2\ngate c AND a b\noutput c";
        let g = game(text, "011", Mode::Undirected);
        let n = |id: &str| g.graph.find(id).unwrap();
        let start = crate::solver::GameState {
            cat: n("b.C.1"),
            mouse: n("a.M.1"),
            turn: Player::Mouse,
        };
        let solution = Arc::new(crate::solver::solve(&g.instance));
        assert_eq!(solution.value(&start), Some(Outcome::MouseWin));
        let mut cat = OptimalStrategy::new(solution);
        let mut mouse = TruePathMouse::new(Arc::clone(&g));
        let t = crate::solver::play_match_from(&g.instance, start, &mut cat, &mut mouse, 1000).unwrap();
        assert_eq!(t.result, Outcome::MouseWin);
        assert_eq!(t.moves_by(Player::Mouse), g.layer(n("a.M.1")) as usize);
        assert!(mouse.escaped());
    }

    #[test]
    fn probes_on_small_circuits() {
        let or = parse_circuit(OR).unwrap();
        let r = targeted_undirected_checks(&or, &Assignment::parse("10").unwrap()).unwrap();
        assert!(r.ok(), "{r:?}");
        assert!(r.of_kind(ProbeKind::CatBacktrack).count() > 0);
        assert!(r.of_kind(ProbeKind::CatBacktrack).all(|p| p.result == Outcome::MouseWin));

        let and = parse_circuit(AND).unwrap();
        let r = targeted_undirected_checks(&and, &Assignment::parse("11").unwrap()).unwrap();
        assert!(r.ok(), "{r:?}");
        assert!(r.of_kind(ProbeKind::ThreatCross).count() > 0);
        assert!(r.of_kind(ProbeKind::MouseBacktrack).count() > 0);
        assert!(r.of_kind(ProbeKind::GuardCross).count() > 0);
    }

    #[test]
    fn proof_matches_small() {
        for (text, bits) in [(OR, "10"), (OR, "00"), (AND, "11"), (AND, "10"), (AND_DUP, "1")] {
            for mode in Mode::BOTH {
                let g = game(text, bits, mode);
                let r = proof_matches(&g);
                assert!(r.ok(), "{text} {bits} {mode}: {r:?}");
                assert!(structural_violations(&g).is_empty());
            }
        }
    }

    #[test]
    fn fuzz_small_and_deterministic() {
        let params = FuzzParams::default();
        let a = fuzz_equivalence(&params, 1, 10).unwrap();
        let b = fuzz_equivalence(&params, 1, 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.passed, 10, "{a}");
        let empty = fuzz_equivalence(&params, 1, 0).unwrap();
        assert_eq!(empty.n, 0);
        assert_eq!(empty.to_string(), "0/0 ok\n");
    }

    #[test]
    fn sampled_assignments_for_wide_circuits() {
        let gen = GenParams {
            layers: 1,
            width: 2,
            num_inputs: 8,
            p_or: 0.5,
            fanout2: false,
        };
        let c = generate_random(&gen, 3).unwrap();
        let xs = assignments_for(&c, 3);
        assert_eq!(xs.len(), 16);
        assert_eq!(xs, assignments_for(&c, 3));
        assert_eq!(assignments_for(&parse_circuit(OR).unwrap(), 0).len(), 4);
    }
}
