//! Particle swarm optimization guided by a Gaussian-process surrogate.
//!
//! The crate provides the surrogate ([`gp`]), the informative-point memory
//! ([`memory`]), the swarm variants and run loop ([`optimizer`]), a suite
//! of shifted and rotated benchmark functions ([`bench`]), and the
//! experiment harness with statistics and CSV output ([`harness`]).

pub mod bench;
pub mod domain;
pub mod gp;
pub mod harness;
pub mod memory;
pub mod objective;
pub mod optimizer;
pub mod rng;
pub mod simplex;

pub use domain::Domain;
pub use objective::Objective;
pub use optimizer::{run_variant, PsoParams, RunConfig, RunRecord, Variant};
pub use rng::Rng;
