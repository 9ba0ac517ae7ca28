//! Transient (finite-horizon) throughput-capacity analysis for multi-hop
//! wireless networks.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! * [`minplus`]: exact (min,+) algebra over cumulative processes and
//!   bivariate impulse responses;
//! * [`contention`]: line and random topologies, contention graphs,
//!   independent sets and minimum-hop routing;
//! * [`mmtp`]: Markov modulated transmission processes for centralized
//!   scheduling, slotted Aloha and idealized CSMA/CA;
//! * [`analysis`]: Laplace/MGF rate functions, the eigen machinery for
//!   CSMA, the θ-optimized lower and upper capacity bounds and the
//!   single-hop vs. multi-hop threshold finder;
//! * [`sim`]: a deterministic discrete-event simulator measuring
//!   delivered throughput and the non-empty-buffer fraction.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod contention;
mod error;
pub mod linalg;
pub mod minplus;
pub mod mmtp;
pub mod schedule;
pub mod sim;

pub use error::{Error, Result};
