//! Speed limits on entanglement generation and degradation for small
//! bipartite quantum systems.

pub mod bounds;
pub mod choi;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod scenarios;
pub mod states;

pub use error::{Error, Result};
