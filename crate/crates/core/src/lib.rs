//! Percolation-based resource preparation for measurement-based quantum
//! computing and entanglement percolation in quantum networks.

pub mod entanglement;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod oracle;
pub mod percolation;
pub mod renorm;
pub mod stats;

pub use error::{Error, Result};
