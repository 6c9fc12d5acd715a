//! Exact computations with finite-dimensional polyhedral normed spaces.

pub mod amalgam;
pub mod census;
pub mod cli;
pub mod error;
pub mod fenchel;
pub mod forge;
pub mod kernel;
pub mod space;
pub mod typespace;

pub use error::{Error, Result};
pub use kernel::{PolyBall, Q};
pub use space::{LinMap, Space};
