//! Online multi-agent planning for simultaneously tracking discovered mobile
//! objects and searching for undiscovered ones.
//!
//! The crate is organised around a closed sense-plan-act loop:
//!
//! * [`model`] — shared domain types: object/agent states, Bernoulli tracks,
//!   measurements, discrete actions and scenario ground truth.
//! * [`sensing`] — constant-velocity motion, range-limited detection, the
//!   range-bearing and vision measurement models, clutter, and ideal
//!   (noise-free) measurement prediction for planning rollouts.
//! * [`filter`] — a bank of per-identity Bernoulli particle filters with
//!   birth/survival dynamics, multi-sensor sequential updates, spawning and
//!   pruning.
//! * [`grid`] — a birth-aware occupancy grid over undiscovered objects and its
//!   Shannon entropy.
//! * [`rewards`] — mutual-information value functions for tracking and
//!   discovery, and their min-max normalised multi-objective combination.
//! * [`planner`] — receding-horizon action selection: exhaustive search,
//!   greedy sequential assignment with its optimality-ratio certificate, and
//!   the closed-loop world step.
//! * [`metrics`] — the OSPA multi-object distance with its localisation /
//!   cardinality decomposition, per-run records and aggregation.
//! * [`rng`] — reproducible stream derivation on top of a counter-based
//!   generator so runs are deterministic regardless of worker count.
//!
//! The `parallel` feature (on by default) evaluates planner candidates and
//! filter-bank updates on a rayon pool; disabling it yields a fully
//! sequential build with identical numeric results.

pub mod filter;
pub mod grid;
pub mod metrics;
pub mod model;
pub mod par;
pub mod planner;
pub mod rewards;
pub mod rng;
pub mod sensing;

mod error;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
