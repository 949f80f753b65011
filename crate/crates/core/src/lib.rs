//! Task offloading for a drone swarm acting as a fog.
//!
//! - [`model`]: latency, reliability and energy of a task split.
//! - [`solver`]: penalty-based real-coded GA minimising energy under latency
//!   and reliability bounds.
//! - [`baselines`]: random, weighted round robin, Max-Min and Min-Min splits.
//! - [`harness`]: scenario sampling and Monte-Carlo experiment drivers.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    Allocation, ChannelModel, CloudSpec, DroneNode, Metrics, Position, PowerModel, Scenario, TaskSpec,
};
pub use solver::{GaConfig, Solution};
