//! Task placement across edge, fog and cloud tiers of an energy network.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! * [`model`]: nodes, links, task streams, topologies and assignments.
//! * [`cost`]: per (stream, node) latency, energy and composite cost.
//! * [`solvers`]: greedy placement, a Lagrangian dual sub-gradient solver with
//!   repair, and an exhaustive oracle for small instances.
//! * [`metrics`]: energy savings, bandwidth, curtailment, packet loss,
//!   availability, detection rate and utilization.
//! * [`risk`]: expected operational cost of reactive / predictive fault
//!   handling and its reliability composition.
//! * [`sim`]: the seeded scenario generator, strategy runner and trial sweeps.
//!
//! File formats and the command-line front end live in the `tierplace` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cost;
pub mod error;
pub mod metrics;
pub mod model;
pub mod risk;
pub mod rng;
pub mod sim;
pub mod solvers;
mod stats;

pub use cost::{CostBreakdown, CostModel, CostScales, UrllcProfile};
pub use error::{Error, Result};
pub use model::{
    Assignment, CostWeights, EnergyMode, FeasibilityClass, LinkSpec, NodeSpec, TaskStream, TierKind,
    Topology, ValidationReport,
};
pub use solvers::{SolverResult, StreamOrder};
