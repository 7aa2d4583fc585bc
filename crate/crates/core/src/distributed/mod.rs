//! Round-by-round simulators of the federated (star network with a central
//! node) and decentralized (token walking a graph) variants.
//!
//! Both reproduce the centralized iteration exactly when fed the same index
//! stream; they differ only in where state lives and what is communicated.

mod decentralized;
mod federated;
mod graph;
mod ledger;

pub use decentralized::{
    run_decentralized, run_decentralized_observed, token_schedule, DecentralizedConfig, DecentralizedRun,
};
pub use federated::{run_federated, run_federated_observed};
pub use graph::{build_metropolis_transitions, Graph, GraphFile};
pub use ledger::{CommLedger, Party, RoundComm};

use crate::linalg::Vector;

/// What a node keeps about its own component.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LocalState {
    pub anchor: Vector,
    pub grad: Vector,
    /// `f_i(anchor)`; only read by the simulation's global probe.
    pub value: f64,
}
