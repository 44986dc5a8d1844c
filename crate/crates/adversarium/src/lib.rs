//! Quantum query complexity toolkit: adversary bounds, dual adversary
//! solutions, span programs, learning graphs and their simulation.

pub mod adversary;
pub mod dual_adversary;
pub mod electric_walks;
pub mod functions;
pub mod graphs;
pub mod learning_graphs;
pub mod numerics;
pub mod quantum_sim;
pub mod span_programs;

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
