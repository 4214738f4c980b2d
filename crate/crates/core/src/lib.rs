pub mod error;
pub mod game;
pub mod lp;
pub mod polyhedra;
pub mod poss;
pub mod strategy;
pub mod equilibria;
pub mod report;
