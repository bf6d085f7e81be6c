//! Evolutionary search over disturbed initial states that yields a small,
//! diverse population of demonstration trajectories for a fixed policy.
//!
//! The pipeline: a [`BitGenome`](encoding::BitGenome) decodes into an initial
//! state, the policy is rolled out from it ([`rollout`]), the trajectory is
//! scored against the current demonstration set ([`fitness`]), and the
//! population is evolved with crossover, bit-flip mutation and truncation
//! selection ([`evolution`]). [`report`] turns finished runs into CSV/JSON
//! artifacts and [`experiment`] wires everything to run configurations.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encoding;
pub mod env;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod fitness;
pub mod policy;
pub mod report;
pub mod rollout;

pub use error::{Error, Result};
