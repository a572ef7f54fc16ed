//! Move-selection policies and the registry that names them.
//!
//! Every policy implements [`Strategy`]. The [`StrategyRegistry`] maps a
//! name to a factory so that matches can be configured at runtime, e.g.
//! `catmouse match --cat mirror-cat --mouse optimal`.

mod scripted;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::harness::BuiltGame;
use crate::solver::{GameInstance, GameState, Player, Solution};

pub use scripted::{
    BacktrackCat, BacktrackMouse, GuardCrossMouse, MirrorCat, ShuttleMouse, ThreatCrossMouse,
    TruePathMouse,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    /// The mirroring Cat found no mirrored move; the construction is broken.
    #[error("no move: {0}")]
    NoMove(String),
    /// The true-path Mouse found no safe move; the construction is broken.
    #[error("no safe move: {0}")]
    NoSafeMove(String),
    #[error("state not covered by the solution: {0}")]
    Unsolved(String),
    #[error("unknown strategy `{0}`")]
    Unknown(String),
    #[error("strategy `{name}` needs {what}")]
    MissingContext { name: String, what: &'static str },
    #[error("strategy `{name}` cannot play {player}")]
    WrongSide { name: String, player: Player },
    #[error("{0}")]
    Input(String),
}

/// What a policy sees when asked for a move.
#[derive(Debug, Clone, Copy)]
pub struct MatchView<'a> {
    pub instance: &'a GameInstance,
    pub state: GameState,
    /// 1-based number of the ply about to be played.
    pub ply: usize,
}

pub trait Strategy {
    fn name(&self) -> &str;

    /// Destination node for the player to move. Only asked on open states
    /// where that player has at least one legal move.
    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError>;

    /// Ply at which a deliberately deviating policy left its script.
    fn deviation_ply(&self) -> Option<usize> {
        None
    }
}

/// Plays the solver's best move (fastest win, slowest loss, deterministic ties).
pub struct OptimalStrategy {
    solution: Arc<Solution>,
}

impl OptimalStrategy {
    pub fn new(solution: Arc<Solution>) -> Self {
        OptimalStrategy { solution }
    }
}

impl Strategy for OptimalStrategy {
    fn name(&self) -> &str {
        "optimal"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        self.solution
            .best_move(&view.state)
            .ok_or_else(|| StrategyError::Unsolved(view.instance.describe(&view.state)))
    }
}

/// Inputs available to strategy factories.
#[derive(Clone, Default)]
pub struct StrategyContext {
    pub game: Option<Arc<BuiltGame>>,
    pub solution: Option<Arc<Solution>>,
    /// For deviating probes: how many scripted moves to make first.
    pub deviate_after: usize,
}

impl StrategyContext {
    fn game(&self, name: &str) -> Result<Arc<BuiltGame>, StrategyError> {
        self.game.clone().ok_or_else(|| StrategyError::MissingContext {
            name: name.to_string(),
            what: "a reduction instance",
        })
    }

    fn solution(&self, name: &str) -> Result<Arc<Solution>, StrategyError> {
        self.solution.clone().ok_or_else(|| StrategyError::MissingContext {
            name: name.to_string(),
            what: "a solved game",
        })
    }
}

pub type StrategyFactory = fn(&StrategyContext) -> Result<Box<dyn Strategy>, StrategyError>;

#[derive(Clone)]
pub struct StrategyEntry {
    pub name: &'static str,
    /// `None` when the policy can play either side.
    pub plays: Option<Player>,
    pub description: &'static str,
    pub factory: StrategyFactory,
}

#[derive(Clone, Default)]
pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, StrategyEntry>,
}

impl StrategyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every policy shipped with the crate.
    pub fn builtin() -> Self {
        let mut reg = StrategyRegistry::new();
        reg.register(StrategyEntry {
            name: "optimal",
            plays: None,
            description: "solver-optimal play",
            factory: |ctx| Ok(Box::new(OptimalStrategy::new(ctx.solution("optimal")?))),
        });
        reg.register(StrategyEntry {
            name: "mirror-cat",
            plays: Some(Player::Cat),
            description: "capture when adjacent, threaten true AND branches, otherwise mirror Mouse",
            factory: |ctx| Ok(Box::new(MirrorCat::new(ctx.game("mirror-cat")?))),
        });
        reg.register(StrategyEntry {
            name: "true-path-mouse",
            plays: Some(Player::Mouse),
            description: "follow true gates to the Hole, escaping when Cat stops mirroring",
            factory: |ctx| Ok(Box::new(TruePathMouse::new(ctx.game("true-path-mouse")?))),
        });
        reg.register(StrategyEntry {
            name: "backtrack-mouse",
            plays: Some(Player::Mouse),
            description: "true-path Mouse that steps backwards in its subgraph once",
            factory: |ctx| {
                Ok(Box::new(BacktrackMouse::new(
                    ctx.game("backtrack-mouse")?,
                    ctx.deviate_after,
                )))
            },
        });
        reg.register(StrategyEntry {
            name: "threat-cross-mouse",
            plays: Some(Player::Mouse),
            description: "true-path Mouse that crosses a threat edge into the Cat subgraph",
            factory: |ctx| {
                Ok(Box::new(ThreatCrossMouse::new(
                    ctx.game("threat-cross-mouse")?,
                    ctx.deviate_after,
                )))
            },
        });
        reg.register(StrategyEntry {
            name: "guard-cross-mouse",
            plays: Some(Player::Mouse),
            description: "true-path Mouse that crosses a guard edge into the Cat subgraph",
            factory: |ctx| {
                Ok(Box::new(GuardCrossMouse::new(
                    ctx.game("guard-cross-mouse")?,
                    ctx.deviate_after,
                )))
            },
        });
        reg.register(StrategyEntry {
            name: "backtrack-cat",
            plays: Some(Player::Cat),
            description: "mirroring Cat that backtracks once, then plays optimally",
            factory: |ctx| {
                Ok(Box::new(BacktrackCat::new(
                    ctx.game("backtrack-cat")?,
                    ctx.solution("backtrack-cat")?,
                    ctx.deviate_after,
                )))
            },
        });
        reg.register(StrategyEntry {
            name: "shuttle-mouse",
            plays: Some(Player::Mouse),
            description: "Mouse that steps back and forth between two nodes",
            factory: |_| Ok(Box::new(ShuttleMouse::default())),
        });
        reg
    }

    pub fn register(&mut self, entry: StrategyEntry) {
        self.entries.insert(entry.name, entry);
    }

    pub fn get(&self, name: &str) -> Option<&StrategyEntry> {
        self.entries.get(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = &StrategyEntry> {
        self.entries.values()
    }

    /// Instantiates `name` to play `player`.
    pub fn build(
        &self,
        name: &str,
        player: Player,
        ctx: &StrategyContext,
    ) -> Result<Box<dyn Strategy>, StrategyError> {
        let entry = self
            .get(name)
            .ok_or_else(|| StrategyError::Unknown(name.to_string()))?;
        if entry.plays.is_some_and(|p| p != player) {
            return Err(StrategyError::WrongSide {
                name: name.to_string(),
                player,
            });
        }
        (entry.factory)(ctx)
    }
}
