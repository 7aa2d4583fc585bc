//! Comparison methods: SAGA (centralized), consensus ADMM (federated) and
//! token-walk SGD (decentralized). All report through the same
//! [`Observation`](crate::trace::Observation) stream as StochaLM.

mod admm;
mod saga;
mod token_sgd;

pub use admm::{run_admm, run_admm_observed, AdmmState, RHO_GRID};
pub use saga::{run_saga, run_saga_observed, saga_lipschitz, SagaState, SagaStep};
pub use token_sgd::{run_token_sgd, run_token_sgd_observed, token_sgd_lipschitz, StepRule, TokenSgdState};
