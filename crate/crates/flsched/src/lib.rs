//! Federated learning over interference-limited wireless networks.
//!
//! The crate models a cellular uplink where access points and user equipment
//! form Poisson point processes, derives closed-form success probabilities for
//! several multiuser scheduling policies (random, round robin, proportional
//! fair, no scheduling, and batched variants), validates them against a Monte
//! Carlo physical-layer sampler, and trains regularized linear models with a
//! dual-decomposition algorithm whose uplink reports are lost according to the
//! same channel model.

pub mod config;
pub mod data;
pub mod error;
pub mod geometry;
pub mod net;
pub mod opt;
pub mod persist;
pub mod plot;
pub mod quad;
pub mod rates;
pub mod rng;
pub mod sched;

pub use error::Error;
