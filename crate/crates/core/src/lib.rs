//! Reduction from the synchronous monotone circuit value problem to
//! cat-and-mouse games on directed and undirected graphs, an exact solver
//! for those games, and a harness that checks the reduction end to end.

pub mod circuit;
pub mod harness;
pub mod reduction;
pub mod solver;
pub mod strategy;
