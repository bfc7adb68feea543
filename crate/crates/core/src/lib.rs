//! Discrete-time coined quantum walks on complete bipartite graphs, with
//! closed-form fidelities, invariant-subspace models and state-transfer
//! protocols (two marked vertices, or a single switched mark on a
//! lackadaisical walk).

pub mod analytic_fidelity;
pub mod error;
pub mod graph_space;
pub mod reduced_models;
pub mod transfer_protocols;
pub mod walk_operators;

pub use error::{Error, Result};
