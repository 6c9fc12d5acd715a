//! Exact arithmetic, linear programming and polytope duality.

pub mod dd;
pub mod linalg;
pub mod lp;
pub mod polyball;
pub mod rational;

pub use lp::{Lp, LpError, LpSolution};
pub use polyball::PolyBall;
pub use rational::{Vector, Q};
