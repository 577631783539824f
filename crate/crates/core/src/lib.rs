//! Balanced graph bipartitioning as a QUBO, solved by variational quantum
//! imaginary-time evolution on an exact statevector simulator, with
//! Fiduccia-Mattheyses refinement and nested-dissection fill-reducing
//! orderings scored by symbolic factorization.
//!
//! Module map:
//!
//! - [`graph`]: weighted graphs, file formats, ego rankings, multilevel
//!   coarsening and edge-cut to vertex-separator conversion.
//! - [`qubo`]: the penalty QUBO, its Pauli-Z Hamiltonian and an exhaustive
//!   oracle.
//! - [`circuit`]: the heavy-neighbors ansatz and the statevector simulator.
//! - [`varqite`]: the imaginary-time evolution engine.
//! - [`refine`]: the balance-aware FM refinement.
//! - [`dissect`]: nested dissection, permutations and merit factors.

pub mod circuit;
pub mod dissect;
pub mod error;
pub mod graph;
pub mod qubo;
pub mod refine;
pub mod rng;
pub mod varqite;

pub use error::{Error, Result};
pub use graph::WeightedGraph;
pub use qubo::{Bitstring, Partition, QuboProblem, ZHamiltonian};
