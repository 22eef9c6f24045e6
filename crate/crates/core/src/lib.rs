//! Deterministic simulator for broadcasting in the SINR model.
//!
//! The crate bundles the physical model, an event-driven round engine,
//! schedule machinery, the local-knowledge and ad-hoc broadcast
//! algorithms, adversarial lower-bound families and an experiment harness.
//!
//! Runnable examples live in `examples/`:
//!
//! - `reception`: the reception rule on hand-placed stations
//! - `schedules`: selective families, dilution and model constants
//! - `gran_ubr`: granularity-aware broadcast with invariant checks
//! - `diam_ubr`: granularity-free broadcast on an extreme cluster
//! - `nogran`: square partition and colouring of one dense box
//! - `size_ubr`: ad-hoc broadcast and its progress function
//! - `leader_election`: per-box leaders without local knowledge
//! - `general_broadcast`: degree-dependent broadcast on gated clusters
//! - `lower_bounds`: chain gadget and fan family adversary
//! - `verify_trace`: replaying and checking a recorded trace
//! - `bench_suite`: a small benchmark grid written as CSV

pub mod adhoc;
pub mod adversary;
pub mod engine;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod harness;
pub mod local;
pub mod schedules;
pub mod sinr;

pub use engine::{run, RunConfig, SnapshotMode, StopRule, Trace};
pub use error::{Error, Result};
pub use geometry::{ModelParams, Network, NetworkStats, Point, Station};
