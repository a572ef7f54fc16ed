//! Hand-written policies that play out the correctness argument of the
//! reduction, plus deliberately deviating variants used as probes.

use std::sync::Arc;

use super::{MatchView, OptimalStrategy, Strategy, StrategyError};
use crate::circuit::GateKind;
use crate::harness::{BuiltGame, NodeInfo};
use crate::reduction::{Branch, Side};
use crate::solver::{GameState, Solution};

/// Whether Cat, standing on `cat` with the move, can land on `target`.
fn threatens(game: &BuiltGame, cat: usize, target: usize) -> bool {
    cat == target || game.is_move(cat, target)
}

fn smallest_by_name(game: &BuiltGame, nodes: impl IntoIterator<Item = usize>) -> Option<usize> {
    nodes.into_iter().min_by(|&a, &b| game.graph.id(a).cmp(game.graph.id(b)))
}

/// Cat policy: capture if Mouse is adjacent; when Mouse sits on node 2 or 3
/// of an AND gadget, threaten a true branch (C3 guards node 4, C2 node 5);
/// otherwise step onto the Cat copy of Mouse's node.
pub struct MirrorCat {
    game: Arc<BuiltGame>,
}

impl MirrorCat {
    pub fn new(game: Arc<BuiltGame>) -> Self {
        MirrorCat { game }
    }

    fn target(&self, s: &GameState) -> Result<usize, StrategyError> {
        let g = &*self.game;
        if g.is_move(s.cat, s.mouse) {
            return Ok(s.mouse);
        }
        let target = match g.info(s.mouse) {
            NodeInfo::Gadget {
                gate,
                position: 2 | 3,
                side: Side::Mouse,
            } if g.circuit.gate(gate).kind == GateKind::And => {
                let left_true = g.values.value(g.circuit.gate(gate).left);
                g.layout.gadget(gate, Side::Cat, if left_true { 3 } else { 2 })
            }
            _ => g.map.cat_of(s.mouse).ok_or_else(|| {
                StrategyError::NoMove(format!("Mouse on unpaired node `{}`", g.graph.id(s.mouse)))
            })?,
        };
        if g.is_move(s.cat, target) {
            Ok(target)
        } else {
            Err(StrategyError::NoMove(format!(
                "`{}` is not adjacent to `{}`",
                g.graph.id(target),
                g.graph.id(s.cat)
            )))
        }
    }
}

impl Strategy for MirrorCat {
    fn name(&self) -> &str {
        "mirror-cat"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.target(&view.state)
    }
}

/// Mouse policy for true circuits: walk true gates from the output to a true
/// input and into the Hole while Cat mirrors; as soon as Cat is anywhere
/// else, head for an escape chain Cat cannot cover.
pub struct TruePathMouse {
    game: Arc<BuiltGame>,
    escaping: bool,
}

impl TruePathMouse {
    pub fn new(game: Arc<BuiltGame>) -> Self {
        TruePathMouse {
            game,
            escaping: false,
        }
    }

    /// Whether escape mode has been entered at least once.
    pub fn escaped(&self) -> bool {
        self.escaping
    }

    fn is_mirroring(&self, s: &GameState) -> bool {
        let g = &*self.game;
        if g.map.cat_of(s.mouse) == Some(s.cat) {
            return true;
        }
        match g.info(s.mouse) {
            NodeInfo::Gadget {
                gate,
                position: 2 | 3,
                side: Side::Mouse,
            } if g.circuit.gate(gate).kind == GateKind::And => {
                s.cat == g.layout.gadget(gate, Side::Cat, 2) || s.cat == g.layout.gadget(gate, Side::Cat, 3)
            }
            _ => false,
        }
    }

    fn next(&mut self, s: &GameState) -> Result<usize, StrategyError> {
        let g = Arc::clone(&self.game);
        let (cat, mouse) = (s.cat, s.mouse);
        // Reaching the Hole ends the game at once, so only Cat on it matters.
        let safe = |v: usize| if v == g.graph.h { cat != v } else { !threatens(&g, cat, v) };
        let forward: Vec<usize> = g
            .successors(mouse)
            .filter(|&v| g.layer(v) + 1 == g.layer(mouse))
            .collect();
        let no_safe = || {
            StrategyError::NoSafeMove(format!(
                "Mouse at `{}`, Cat at `{}`",
                g.graph.id(mouse),
                g.graph.id(cat)
            ))
        };
        let any_safe = || forward.iter().copied().find(|&v| safe(v)).ok_or_else(no_safe);

        match g.info(mouse) {
            NodeInfo::Input {
                index,
                side: Side::Mouse,
            } => Ok(if g.values.input(index) { g.graph.h } else { g.graph.d }),
            NodeInfo::Escape { .. } => any_safe(),
            NodeInfo::Gadget {
                gate,
                position,
                side: Side::Mouse,
            } => {
                let mirroring = self.is_mirroring(s);
                if !mirroring {
                    self.escaping = true;
                }
                let own = |p: u8| g.layout.gadget(gate, Side::Mouse, p);
                let theirs = |p: u8| g.layout.gadget(gate, Side::Cat, p);
                let spec = g.circuit.gate(gate);
                match position {
                    1 if mirroring => Ok(own(2)),
                    1 => [own(2), own(3)].into_iter().find(|&v| safe(v)).ok_or_else(no_safe),
                    2 | 3 => {
                        let normal = match spec.kind {
                            GateKind::Or if g.values.value(spec.left) => own(4),
                            GateKind::Or if g.values.value(spec.right) => own(5),
                            GateKind::Or => own(4),
                            GateKind::And if cat == theirs(3) => own(5),
                            GateKind::And => own(4),
                        };
                        if mirroring {
                            return Ok(normal);
                        }
                        // A branch is an escape if Mouse can reach its bottom node and
                        // Cat cannot then stand next to the chain entry.
                        for branch in [Branch::Left, Branch::Right] {
                            let (mb, cb) = (own(branch.position()), theirs(branch.position()));
                            if safe(mb) && cat != cb && !g.is_move(cat, cb) {
                                return Ok(mb);
                            }
                        }
                        if safe(normal) {
                            Ok(normal)
                        } else {
                            any_safe()
                        }
                    }
                    _ => {
                        let branch = if position == 4 { Branch::Left } else { Branch::Right };
                        let entry = g.layout.escape_chain(gate, branch)[0];
                        let child = if position == 4 { spec.left } else { spec.right };
                        let child = g.layout.entry(child, Side::Mouse);
                        if !mirroring && safe(entry) {
                            Ok(entry)
                        } else if safe(child) {
                            Ok(child)
                        } else if safe(entry) {
                            Ok(entry)
                        } else {
                            Err(no_safe())
                        }
                    }
                }
            }
            _ => any_safe(),
        }
    }
}

impl Strategy for TruePathMouse {
    fn name(&self) -> &str {
        "true-path-mouse"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.next(&view.state)
    }
}

/// Shared bookkeeping for Mouse probes that follow the true path and then
/// take one deviating move.
struct MouseProbe {
    path: TruePathMouse,
    after: usize,
    moves: usize,
    deviated: Option<usize>,
}

impl MouseProbe {
    fn new(game: Arc<BuiltGame>, after: usize) -> Self {
        MouseProbe {
            path: TruePathMouse::new(game),
            after,
            moves: 0,
            deviated: None,
        }
    }

    fn choose(
        &mut self,
        view: &MatchView<'_>,
        deviation: impl Fn(&BuiltGame, &GameState) -> Option<usize>,
    ) -> Result<usize, StrategyError> {
        self.moves += 1;
        if self.deviated.is_none() && self.moves > self.after {
            if let Some(v) = deviation(&self.path.game, &view.state) {
                self.deviated = Some(view.ply);
                return Ok(v);
            }
        }
        self.path.next(&view.state)
    }
}

/// Steps from a Mouse-side node back to a Mouse-side node one layer up.
pub struct BacktrackMouse(MouseProbe);

impl BacktrackMouse {
    pub fn new(game: Arc<BuiltGame>, after: usize) -> Self {
        BacktrackMouse(MouseProbe::new(game, after))
    }
}

impl Strategy for BacktrackMouse {
    fn name(&self) -> &str {
        "backtrack-mouse"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.0.choose(view, |g, s| {
            let up = g.successors(s.mouse).filter(|&v| {
                g.layer(v) == g.layer(s.mouse) + 1 && g.graph.role(v).side() == Some(Side::Mouse)
            });
            smallest_by_name(g, up)
        })
    }

    fn deviation_ply(&self) -> Option<usize> {
        self.0.deviated
    }
}

/// From node 4 or 5 of an AND gadget, walks back along the threat edge into
/// the Cat copy of the gadget.
pub struct ThreatCrossMouse(MouseProbe);

impl ThreatCrossMouse {
    pub fn new(game: Arc<BuiltGame>, after: usize) -> Self {
        ThreatCrossMouse(MouseProbe::new(game, after))
    }
}

impl Strategy for ThreatCrossMouse {
    fn name(&self) -> &str {
        "threat-cross-mouse"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.0.choose(view, |g, s| match g.info(s.mouse) {
            NodeInfo::Gadget {
                gate,
                position: position @ (4 | 5),
                side: Side::Mouse,
            } if g.circuit.gate(gate).kind == GateKind::And => {
                let target = g.layout.gadget(gate, Side::Cat, if position == 4 { 3 } else { 2 });
                g.is_move(s.mouse, target).then_some(target)
            }
            _ => None,
        })
    }

    fn deviation_ply(&self) -> Option<usize> {
        self.0.deviated
    }
}

/// Steps forward along a guard edge onto a Cat-side node.
pub struct GuardCrossMouse(MouseProbe);

impl GuardCrossMouse {
    pub fn new(game: Arc<BuiltGame>, after: usize) -> Self {
        GuardCrossMouse(MouseProbe::new(game, after))
    }
}

impl Strategy for GuardCrossMouse {
    fn name(&self) -> &str {
        "guard-cross-mouse"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.0.choose(view, |g, s| {
            if g.graph.role(s.mouse).side() != Some(Side::Mouse) {
                return None;
            }
            let down = g.successors(s.mouse).filter(|&v| {
                g.layer(v) + 1 == g.layer(s.mouse) && g.graph.role(v).side() == Some(Side::Cat)
            });
            smallest_by_name(g, down)
        })
    }

    fn deviation_ply(&self) -> Option<usize> {
        self.0.deviated
    }
}

/// Mirrors for `after` moves, steps one layer back up, then plays optimally.
pub struct BacktrackCat {
    game: Arc<BuiltGame>,
    mirror: MirrorCat,
    optimal: OptimalStrategy,
    after: usize,
    moves: usize,
    deviated: Option<usize>,
}

impl BacktrackCat {
    pub fn new(game: Arc<BuiltGame>, solution: Arc<Solution>, after: usize) -> Self {
        BacktrackCat {
            mirror: MirrorCat::new(Arc::clone(&game)),
            game,
            optimal: OptimalStrategy::new(solution),
            after,
            moves: 0,
            deviated: None,
        }
    }
}

impl Strategy for BacktrackCat {
    fn name(&self) -> &str {
        "backtrack-cat"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.moves += 1;
        if self.deviated.is_some() {
            return self.optimal.choose(view);
        }
        if self.moves > self.after {
            let g = &*self.game;
            let cat = view.state.cat;
            let up = g.successors(cat).filter(|&v| g.layer(v) == g.layer(cat) + 1);
            if let Some(v) = smallest_by_name(g, up) {
                self.deviated = Some(view.ply);
                return Ok(v);
            }
        }
        self.mirror.choose(view)
    }

    fn deviation_ply(&self) -> Option<usize> {
        self.deviated
    }
}

/// Moves back to where it just came from when it can, otherwise to the
/// first neighbour by name.
#[derive(Default)]
pub struct ShuttleMouse {
    previous: Option<usize>,
}

impl Strategy for ShuttleMouse {
    fn name(&self) -> &str {
        "shuttle-mouse"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        let board = view.instance.board();
        let here = view.state.mouse;
        let next = match self.previous {
            Some(p) if board.is_move(here, p) => p,
            _ => board
                .successors(here)
                .min_by(|&a, &b| board.name(a).cmp(board.name(b)))
                .ok_or_else(|| StrategyError::NoMove("Mouse has no neighbours".into()))?,
        };
        self.previous = Some(here);
        Ok(next)
    }
}
