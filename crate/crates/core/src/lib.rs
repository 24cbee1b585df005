//! Exact solvers for placing target skill levels.
//!
//! Agents sit at skill positions and move up to the closest target level
//! within their improvement capacity. This crate finds target sets that
//! maximize total improvement, the Pareto frontier of per-group
//! improvement, max-min fair and simultaneously approximately optimal
//! placements, and provides brute-force oracles and sample-size tooling.
//!
//! All arithmetic is exact ([`Rational`]).

pub mod approx;
pub mod error;
pub mod fptas;
mod grid;
pub mod learning;
pub mod model;
pub mod oracle;
pub mod pareto;
pub mod rational;
pub mod welfare;

pub use error::{Error, Result};
pub use model::{
    eligible_target, improvement_report, potential_targets, validate_instance, Agent,
    AgentOutcome, CapacityModel, ImprovementReport, Instance, TargetSet,
};
pub use rational::Rational;
