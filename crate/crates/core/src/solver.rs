//! Exact solution of cat-and-mouse games.
//!
//! Rules: Cat moves first, moves are mandatory, Cat wins on co-location
//! (even on the Hole), Mouse wins on reaching the Hole, a player with no legal
//! move loses, and a repeated `(cat, mouse, turn)` triple is a draw.
//!
//! [`solve`] labels every state by retrograde analysis: terminal states seed a
//! queue, a predecessor whose mover can step into an own win is won, and one
//! whose every move leads into an opponent win is lost. States never labelled
//! are draws. [`minimax_oracle`] is an independent exhaustive search used to
//! cross-check the solver on small graphs.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::reduction::GameGraph;
use crate::strategy::{MatchView, Strategy, StrategyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("graph has {0} nodes; the exhaustive oracle handles at most 10")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("{player} policy chose `{to}`, which is not adjacent to `{from}`")]
    PolicyIllegalMove {
        player: Player,
        from: String,
        to: String,
    },
    #[error("{player} policy failed: {source}")]
    Policy {
        player: Player,
        #[source]
        source: StrategyError,
    },
}

/// Adjacency over named nodes. Node indices are shared with the
/// [`GameGraph`] a board was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Board {
    names: Vec<String>,
    directed: bool,
    succ: Vec<Vec<u32>>,
    pred: Vec<Vec<u32>>,
}

impl Board {
    pub fn new(names: Vec<String>, directed: bool) -> Self {
        let n = names.len();
        Board {
            names,
            directed,
            succ: vec![Vec::new(); n],
            pred: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].push(to as u32);
        self.pred[to].push(from as u32);
        if !self.directed {
            self.succ[to].push(from as u32);
            self.pred[from].push(to as u32);
        }
    }

    pub fn from_game_graph(g: &GameGraph) -> Self {
        let mut board = Board::new(g.nodes.iter().map(|n| n.id.clone()).collect(), g.directed);
        for e in &g.edges {
            board.add_edge(e.from, e.to);
        }
        board
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[node].iter().map(|&v| v as usize)
    }

    pub fn predecessors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.pred[node].iter().map(|&v| v as usize)
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.succ[node].len()
    }

    pub fn is_move(&self, from: usize, to: usize) -> bool {
        self.succ[from].contains(&(to as u32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Cat,
    Mouse,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Cat => Player::Mouse,
            Player::Mouse => Player::Cat,
        }
    }

    pub fn wins(self) -> Outcome {
        match self {
            Player::Cat => Outcome::CatWin,
            Player::Mouse => Outcome::MouseWin,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Cat => "Cat",
            Player::Mouse => "Mouse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    CatWin,
    MouseWin,
    Draw,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::CatWin => "CatWin",
            Outcome::MouseWin => "MouseWin",
            Outcome::Draw => "Draw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameState {
    pub cat: usize,
    pub mouse: usize,
    pub turn: Player,
}

impl GameState {
    pub fn mover_position(&self) -> usize {
        match self.turn {
            Player::Cat => self.cat,
            Player::Mouse => self.mouse,
        }
    }

    /// State after the player to move goes to `to`.
    pub fn advance(&self, to: usize) -> GameState {
        match self.turn {
            Player::Cat => GameState {
                cat: to,
                mouse: self.mouse,
                turn: Player::Mouse,
            },
            Player::Mouse => GameState {
                cat: self.cat,
                mouse: to,
                turn: Player::Cat,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameInstance {
    board: Arc<Board>,
    pub cat_start: usize,
    pub mouse_start: usize,
    pub hole: usize,
}

impl GameInstance {
    pub fn new(
        board: impl Into<Arc<Board>>,
        cat_start: usize,
        mouse_start: usize,
        hole: usize,
    ) -> Result<Self, SolveError> {
        let board = board.into();
        let n = board.len();
        if cat_start >= n || mouse_start >= n || hole >= n {
            return Err(SolveError::InvalidInstance("start or hole node out of range".into()));
        }
        if cat_start == mouse_start {
            return Err(SolveError::InvalidInstance("Cat and Mouse start on the same node".into()));
        }
        if mouse_start == hole {
            return Err(SolveError::InvalidInstance("Mouse starts on the Hole".into()));
        }
        Ok(GameInstance {
            board,
            cat_start,
            mouse_start,
            hole,
        })
    }

    /// The instance `(G, c, m, h)` of a reduction graph.
    pub fn from_game_graph(g: &GameGraph) -> Result<Self, SolveError> {
        GameInstance::new(Board::from_game_graph(g), g.c, g.m, g.h)
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn initial_state(&self) -> GameState {
        GameState {
            cat: self.cat_start,
            mouse: self.mouse_start,
            turn: Player::Cat,
        }
    }

    pub fn state_count(&self) -> usize {
        self.board.len() * self.board.len() * 2
    }

    pub fn state_index(&self, s: &GameState) -> usize {
        (s.cat * self.board.len() + s.mouse) * 2 + (s.turn == Player::Mouse) as usize
    }

    pub fn state_at(&self, index: usize) -> GameState {
        let n = self.board.len();
        let turn = if index % 2 == 0 { Player::Cat } else { Player::Mouse };
        let pair = index / 2;
        GameState {
            cat: pair / n,
            mouse: pair % n,
            turn,
        }
    }

    pub fn describe(&self, s: &GameState) -> String {
        format!(
            "{},{},{}",
            self.board.name(s.cat),
            self.board.name(s.mouse),
            s.turn
        )
    }

    /// Parses `cat,mouse,turn` with node names and `Cat`/`Mouse` (case-insensitive).
    pub fn parse_state(&self, text: &str) -> Option<GameState> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let [cat, mouse, turn] = parts.as_slice() else {
            return None;
        };
        let turn = match turn.to_ascii_lowercase().as_str() {
            "cat" => Player::Cat,
            "mouse" => Player::Mouse,
            _ => return None,
        };
        Some(GameState {
            cat: self.board.find(cat)?,
            mouse: self.board.find(mouse)?,
            turn,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    CatTerminal,
    MouseTerminal,
    Open,
}

/// Capture takes precedence over reaching the Hole.
pub fn classify(s: &GameState, inst: &GameInstance) -> Terminal {
    if s.cat == s.mouse {
        Terminal::CatTerminal
    } else if s.mouse == inst.hole {
        Terminal::MouseTerminal
    } else {
        Terminal::Open
    }
}

const UNKNOWN: u8 = 0;
const CAT_WIN: u8 = 1;
const MOUSE_WIN: u8 = 2;
const DRAW: u8 = 3;

fn win_code(p: Player) -> u8 {
    match p {
        Player::Cat => CAT_WIN,
        Player::Mouse => MOUSE_WIN,
    }
}

/// Solved values for every explored state.
#[derive(Debug, Clone)]
pub struct Solution {
    instance: GameInstance,
    values: Vec<u8>,
    dist: Vec<u32>,
}

impl Solution {
    pub fn instance(&self) -> &GameInstance {
        &self.instance
    }

    /// `None` for states outside the explored region (see [`solve_reachable`]).
    pub fn value(&self, s: &GameState) -> Option<Outcome> {
        match self.values[self.instance.state_index(s)] {
            CAT_WIN => Some(Outcome::CatWin),
            MOUSE_WIN => Some(Outcome::MouseWin),
            DRAW => Some(Outcome::Draw),
            _ => None,
        }
    }

    /// Plies to forced termination under optimal play; `None` for draws.
    pub fn dist(&self, s: &GameState) -> Option<u32> {
        match self.value(s)? {
            Outcome::Draw => None,
            _ => Some(self.dist[self.instance.state_index(s)]),
        }
    }

    pub fn outcome(&self) -> Outcome {
        self.value(&self.instance.initial_state())
            .expect("the initial state is always explored")
    }

    /// Optimal move for the player to move. Winners take the fastest win,
    /// losers the slowest loss, drawing players stay in the draw region; ties
    /// go to the lexicographically smallest node name. `None` on terminal or
    /// stuck states.
    pub fn best_move(&self, s: &GameState) -> Option<usize> {
        if classify(s, &self.instance) != Terminal::Open {
            return None;
        }
        let value = self.value(s)?;
        let mover = s.turn;
        let board = self.instance.board();
        let mut best: Option<(i64, &str, usize)> = None;
        for to in board.successors(s.mover_position()) {
            let next = s.advance(to);
            let Some(v) = self.value(&next) else {
                continue;
            };
            let score = if value == mover.wins() {
                if v != value {
                    continue;
                }
                -(self.dist[self.instance.state_index(&next)] as i64)
            } else if value == Outcome::Draw {
                if v != Outcome::Draw {
                    continue;
                }
                0
            } else {
                self.dist[self.instance.state_index(&next)] as i64
            };
            let name = board.name(to);
            let better = match best {
                None => true,
                Some((bs, bn, _)) => score > bs || (score == bs && name < bn),
            };
            if better {
                best = Some((score, name, to));
            }
        }
        best.map(|(_, _, to)| to)
    }

    /// The line of best moves from `s` until the game ends, repeats or hits `limit` plies.
    pub fn principal_line(&self, s: &GameState, limit: usize) -> Vec<GameState> {
        let mut line = vec![*s];
        let mut seen = HashSet::from([*s]);
        let mut cur = *s;
        while line.len() <= limit {
            let Some(to) = self.best_move(&cur) else {
                break;
            };
            cur = cur.advance(to);
            line.push(cur);
            if !seen.insert(cur) {
                break;
            }
        }
        line
    }
}

/// Solves every state of the game.
pub fn solve(inst: &GameInstance) -> Solution {
    let scope = vec![true; inst.state_count()];
    retrograde(inst, scope)
}

/// Solves only the states reachable from the initial state. Values of those
/// states coincide with [`solve`]'s, since their successors are reachable too.
pub fn solve_reachable(inst: &GameInstance) -> Solution {
    let board = inst.board();
    let mut scope = vec![false; inst.state_count()];
    let start = inst.initial_state();
    scope[inst.state_index(&start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if classify(&s, inst) != Terminal::Open {
            continue;
        }
        for to in board.successors(s.mover_position()) {
            let next = s.advance(to);
            let idx = inst.state_index(&next);
            if !scope[idx] {
                scope[idx] = true;
                queue.push_back(next);
            }
        }
    }
    retrograde(inst, scope)
}

fn retrograde(inst: &GameInstance, scope: Vec<bool>) -> Solution {
    let board = inst.board();
    let total = inst.state_count();
    let mut values = vec![UNKNOWN; total];
    let mut dist = vec![0u32; total];
    let mut remaining = vec![0u32; total];
    let mut queue = VecDeque::new();

    for idx in (0..total).filter(|&i| scope[i]) {
        let s = inst.state_at(idx);
        match classify(&s, inst) {
            Terminal::CatTerminal => values[idx] = CAT_WIN,
            Terminal::MouseTerminal => values[idx] = MOUSE_WIN,
            Terminal::Open => {
                let moves = board.out_degree(s.mover_position());
                if moves == 0 {
                    values[idx] = win_code(s.turn.other());
                } else {
                    remaining[idx] = moves as u32;
                    continue;
                }
            }
        }
        queue.push_back(idx);
    }

    while let Some(idx) = queue.pop_front() {
        let s = inst.state_at(idx);
        let value = values[idx];
        let next_dist = dist[idx] + 1;
        // The player who moved into `s`.
        let mover = s.turn.other();
        let preds: Box<dyn Iterator<Item = GameState>> = match mover {
            Player::Cat => Box::new(board.predecessors(s.cat).map(|c| GameState {
                cat: c,
                mouse: s.mouse,
                turn: Player::Cat,
            })),
            Player::Mouse => Box::new(board.predecessors(s.mouse).map(|m| GameState {
                cat: s.cat,
                mouse: m,
                turn: Player::Mouse,
            })),
        };
        for p in preds {
            let pi = inst.state_index(&p);
            if !scope[pi] || values[pi] != UNKNOWN {
                continue;
            }
            if value == win_code(mover) {
                values[pi] = value;
                dist[pi] = next_dist;
                queue.push_back(pi);
            } else {
                remaining[pi] -= 1;
                if remaining[pi] == 0 {
                    values[pi] = value;
                    dist[pi] = next_dist;
                    queue.push_back(pi);
                }
            }
        }
    }

    for idx in 0..total {
        if scope[idx] && values[idx] == UNKNOWN {
            values[idx] = DRAW;
        }
    }
    Solution {
        instance: inst.clone(),
        values,
        dist,
    }
}

/// Value of the initial state.
pub fn outcome(inst: &GameInstance) -> Outcome {
    solve_reachable(inst).outcome()
}

/// Exhaustive game-tree search from the initial state; a state repeated on
/// the current line scores a draw. No memoization.
pub fn minimax_oracle(inst: &GameInstance) -> Result<Outcome, SolveError> {
    minimax_value(inst, &inst.initial_state())
}

/// [`minimax_oracle`] from an arbitrary state.
pub fn minimax_value(inst: &GameInstance, s: &GameState) -> Result<Outcome, SolveError> {
    if inst.board().len() > 10 {
        return Err(SolveError::TooLarge(inst.board().len()));
    }
    let mut on_path = vec![false; inst.state_count()];
    Ok(search(inst, s, &mut on_path))
}

fn search(inst: &GameInstance, s: &GameState, on_path: &mut [bool]) -> Outcome {
    match classify(s, inst) {
        Terminal::CatTerminal => return Outcome::CatWin,
        Terminal::MouseTerminal => return Outcome::MouseWin,
        Terminal::Open => {}
    }
    let mover = s.turn;
    let idx = inst.state_index(s);
    on_path[idx] = true;
    let mut best = mover.other().wins();
    for to in inst.board().successors(s.mover_position()) {
        let next = s.advance(to);
        let v = if on_path[inst.state_index(&next)] {
            Outcome::Draw
        } else {
            search(inst, &next, on_path)
        };
        if v == mover.wins() {
            best = v;
            break;
        }
        if v == Outcome::Draw {
            best = Outcome::Draw;
        }
    }
    on_path[idx] = false;
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    Capture,
    Hole,
    Repetition,
    Stuck,
    PlyLimit,
}

impl fmt::Display for EndReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndReason::Capture => "capture",
            EndReason::Hole => "hole",
            EndReason::Repetition => "repetition",
            EndReason::Stuck => "stuck",
            EndReason::PlyLimit => "ply-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub ply: usize,
    pub player: Player,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// Every state visited, starting with the initial one.
    pub states: Vec<GameState>,
    pub moves: Vec<MoveRecord>,
    pub result: Outcome,
    pub reason: EndReason,
}

impl Transcript {
    pub fn plies(&self) -> usize {
        self.moves.len()
    }

    pub fn moves_by(&self, player: Player) -> usize {
        self.moves.iter().filter(|m| m.player == player).count()
    }

    pub fn render(&self, board: &Board) -> String {
        let mut out = String::new();
        for m in &self.moves {
            out.push_str(&format!(
                "ply {} {} {} -> {}\n",
                m.ply,
                m.player,
                board.name(m.from),
                board.name(m.to)
            ));
        }
        out.push_str(&format!("result {} {}\n", self.result, self.reason));
        out
    }
}

/// Plays `cat` against `mouse` from the initial state, Cat first.
pub fn play_match(
    inst: &GameInstance,
    cat: &mut dyn Strategy,
    mouse: &mut dyn Strategy,
    max_plies: usize,
) -> Result<Transcript, MatchError> {
    play_match_from(inst, inst.initial_state(), cat, mouse, max_plies)
}

pub fn play_match_from(
    inst: &GameInstance,
    start: GameState,
    cat: &mut dyn Strategy,
    mouse: &mut dyn Strategy,
    max_plies: usize,
) -> Result<Transcript, MatchError> {
    let board = inst.board();
    let mut state = start;
    let mut seen = HashSet::from([state]);
    let mut states = vec![state];
    let mut moves = Vec::new();
    let (result, reason) = loop {
        match classify(&state, inst) {
            Terminal::CatTerminal => break (Outcome::CatWin, EndReason::Capture),
            Terminal::MouseTerminal => break (Outcome::MouseWin, EndReason::Hole),
            Terminal::Open => {}
        }
        let player = state.turn;
        let from = state.mover_position();
        if board.out_degree(from) == 0 {
            break (player.other().wins(), EndReason::Stuck);
        }
        if moves.len() >= max_plies {
            break (Outcome::Draw, EndReason::PlyLimit);
        }
        let view = MatchView {
            instance: inst,
            state,
            ply: moves.len() + 1,
        };
        let policy: &mut dyn Strategy = match player {
            Player::Cat => &mut *cat,
            Player::Mouse => &mut *mouse,
        };
        let to = policy
            .choose(&view)
            .map_err(|source| MatchError::Policy { player, source })?;
        if !board.is_move(from, to) {
            return Err(MatchError::PolicyIllegalMove {
                player,
                from: board.name(from).to_string(),
                to: board.name(to).to_string(),
            });
        }
        moves.push(MoveRecord {
            ply: moves.len() + 1,
            player,
            from,
            to,
        });
        state = state.advance(to);
        states.push(state);
        if classify(&state, inst) == Terminal::Open && !seen.insert(state) {
            break (Outcome::Draw, EndReason::Repetition);
        }
    };
    Ok(Transcript {
        states,
        moves,
        result,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::OptimalStrategy;

    fn board(names: &[&str], directed: bool, edges: &[(usize, usize)]) -> Board {
        let mut b = Board::new(names.iter().map(|s| s.to_string()).collect(), directed);
        for &(a, c) in edges {
            b.add_edge(a, c);
        }
        b
    }

    /// Directed path a -> b plus an isolated hole.
    fn capture_instance() -> GameInstance {
        GameInstance::new(board(&["a", "b", "h"], true, &[(0, 1)]), 0, 1, 2).unwrap()
    }

    /// Cat shuttles on c1 -- c2, Mouse walks u -- h.
    fn race_instance() -> GameInstance {
        GameInstance::new(board(&["c1", "c2", "u", "h"], false, &[(0, 1), (2, 3)]), 0, 2, 3).unwrap()
    }

    /// 4-cycle a-b-c-d with an isolated hole.
    fn cycle_instance() -> GameInstance {
        let b = board(
            &["a", "b", "c", "d", "h"],
            false,
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        );
        GameInstance::new(b, 0, 2, 4).unwrap()
    }

    #[test]
    fn classify_precedence() {
        let inst = race_instance();
        let h = inst.hole;
        for turn in [Player::Cat, Player::Mouse] {
            let s = |cat, mouse| GameState { cat, mouse, turn };
            assert_eq!(classify(&s(2, 2), &inst), Terminal::CatTerminal);
            assert_eq!(classify(&s(0, h), &inst), Terminal::MouseTerminal);
            assert_eq!(classify(&s(h, h), &inst), Terminal::CatTerminal);
            assert_eq!(classify(&s(0, 2), &inst), Terminal::Open);
        }
    }

    #[test]
    fn solve_examples() {
        let inst = capture_instance();
        let sol = solve(&inst);
        assert_eq!(sol.outcome(), Outcome::CatWin);
        assert_eq!(sol.dist(&inst.initial_state()), Some(1));

        let inst = race_instance();
        let sol = solve(&inst);
        assert_eq!(sol.outcome(), Outcome::MouseWin);
        assert_eq!(sol.dist(&inst.initial_state()), Some(2));

        let inst = cycle_instance();
        let sol = solve(&inst);
        assert_eq!(sol.outcome(), Outcome::Draw);
        assert_eq!(sol.dist(&inst.initial_state()), None);
    }

    #[test]
    fn oracle_agrees_on_examples() {
        for inst in [capture_instance(), race_instance(), cycle_instance()] {
            assert_eq!(minimax_oracle(&inst).unwrap(), outcome(&inst));
        }
    }

    #[test]
    fn stuck_player_loses() {
        // Mouse at a sink that is not the Hole.
        let inst = GameInstance::new(board(&["c", "x", "m", "h"], true, &[(0, 1)]), 0, 2, 3).unwrap();
        let s = GameState {
            cat: 1,
            mouse: 2,
            turn: Player::Mouse,
        };
        assert_eq!(solve(&inst).value(&s), Some(Outcome::CatWin));
        assert_eq!(minimax_value(&inst, &s).unwrap(), Outcome::CatWin);
        // Cat stuck at its start.
        let inst = GameInstance::new(board(&["c", "m", "h"], true, &[(1, 2)]), 0, 1, 2).unwrap();
        assert_eq!(outcome(&inst), Outcome::MouseWin);
        assert_eq!(minimax_oracle(&inst).unwrap(), Outcome::MouseWin);
    }

    #[test]
    fn capture_at_hole_is_cat_win() {
        let inst = GameInstance::new(board(&["c", "m", "h"], true, &[(0, 2), (1, 2)]), 0, 1, 2).unwrap();
        let sol = solve(&inst);
        let both_at_hole = GameState {
            cat: 2,
            mouse: 2,
            turn: Player::Mouse,
        };
        assert_eq!(sol.value(&both_at_hole), Some(Outcome::CatWin));
        // Cat reaches h first and Mouse's only move lands on it.
        assert_eq!(sol.outcome(), Outcome::CatWin);
        assert_eq!(minimax_oracle(&inst).unwrap(), Outcome::CatWin);
    }

    #[test]
    fn instance_invariants() {
        let b = board(&["u", "h"], false, &[(0, 1)]);
        assert!(matches!(
            GameInstance::new(b.clone(), 0, 1, 1),
            Err(SolveError::InvalidInstance(_))
        ));
        assert!(matches!(
            GameInstance::new(b.clone(), 0, 0, 1),
            Err(SolveError::InvalidInstance(_))
        ));
        assert!(matches!(
            GameInstance::new(b, 0, 5, 1),
            Err(SolveError::InvalidInstance(_))
        ));
    }

    #[test]
    fn oracle_rejects_large_graphs() {
        let names: Vec<String> = (0..11).map(|i| format!("n{i}")).collect();
        let inst = GameInstance::new(Board::new(names, true), 0, 1, 2).unwrap();
        assert_eq!(minimax_oracle(&inst), Err(SolveError::TooLarge(11)));
    }

    #[test]
    fn directed_star_tables_match() {
        // Center 0 with spokes to 1..=3.
        let b = board(&["s", "x", "y", "z"], true, &[(0, 1), (0, 2), (0, 3)]);
        for hole in 0..4 {
            for cat in 0..4 {
                for mouse in 0..4 {
                    let Ok(inst) = GameInstance::new(b.clone(), cat, mouse, hole) else {
                        continue;
                    };
                    let sol = solve(&inst);
                    for idx in 0..inst.state_count() {
                        let s = inst.state_at(idx);
                        assert_eq!(sol.value(&s), Some(minimax_value(&inst, &s).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn optimal_play_realizes_values() {
        for inst in [capture_instance(), race_instance()] {
            let sol = Arc::new(solve(&inst));
            let mut cat = OptimalStrategy::new(sol.clone());
            let mut mouse = OptimalStrategy::new(sol.clone());
            let t = play_match(&inst, &mut cat, &mut mouse, 100).unwrap();
            assert_eq!(t.result, sol.outcome());
            assert_eq!(t.plies() as u32, sol.dist(&inst.initial_state()).unwrap());
        }
        let inst = cycle_instance();
        let sol = Arc::new(solve(&inst));
        let mut cat = OptimalStrategy::new(sol.clone());
        let mut mouse = OptimalStrategy::new(sol.clone());
        let t = play_match(&inst, &mut cat, &mut mouse, 1000).unwrap();
        assert_eq!(t.result, Outcome::Draw);
        assert_eq!(t.reason, EndReason::Repetition);
        assert!(t.plies() <= 2 * 5 * 5);
    }

    #[test]
    fn transcript_render_format() {
        let inst = race_instance();
        let sol = Arc::new(solve(&inst));
        let mut cat = OptimalStrategy::new(sol.clone());
        let mut mouse = OptimalStrategy::new(sol);
        let t = play_match(&inst, &mut cat, &mut mouse, 10).unwrap();
        assert_eq!(
            t.render(inst.board()),
            "ply 1 Cat c1 -> c2\nply 2 Mouse u -> h\nresult MouseWin hole\n"
        );
    }

    #[test]
    fn parse_state_round_trip() {
        let inst = race_instance();
        let s = inst.parse_state("c2,u,mouse").unwrap();
        assert_eq!(inst.describe(&s), "c2,u,Mouse");
        assert!(inst.parse_state("c2,u").is_none());
        assert!(inst.parse_state("zz,u,Cat").is_none());
    }
}
