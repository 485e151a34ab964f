//! Exact event-driven simulation of the joint activity and queue process,
//! the doubling estimation protocol and identity checks.

mod checks;
mod engine;
mod estimate;
mod strategy;

pub use checks::{fuhrmann_cooper_check, little_check, DecompositionReport, LittleReport};
pub use engine::{
    simulate, Accumulators, RunStatus, SimConfig, SimState, Simulator, Trajectory, WindowStats,
    DEFAULT_QUEUE_CAP, TAG_CAP,
};
pub use estimate::{
    estimate_mean_queue, estimate_mean_queue_with, replicate, EstimateOptions, ReplicationSummary,
    SimEstimate,
};
pub use strategy::{NodeRule, QueueFn, Strategy};
