//! Pricing of multi-asset knock-out and basket derivatives with a simulated
//! variational quantum pipeline.
//!
//! The Black-Scholes PDE is discretized on a tensor grid ([`fdm`]), the
//! resulting generator is written as a weighted sum of unitaries ([`lcu`]),
//! and the price field is evolved on a simulated statevector ([`quantum`])
//! with McLachlan variational quantum simulation ([`vqs`]). The present value
//! is read out from the overlap with the discretized risk-neutral density at
//! an intermediate horizon ([`pipeline`]).
//!
//! Classical oracles (explicit-Euler FDM, a closed-form double-barrier series
//! and a Monte Carlo engine) live alongside so every stage can be cross-checked.

pub mod error;
pub mod fdm;
pub mod lcu;
pub mod market;
pub mod pipeline;
pub mod prep;
pub mod quantum;
pub mod rng;
pub mod vqs;

pub use error::{PricingError, Result};
