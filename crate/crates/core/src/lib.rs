//! Analysis and simulation of CSMA-style random-access networks.
//!
//! Nodes of an interference graph switch between back-off and transmission;
//! interfering nodes are never active together, so the feasible activity
//! states are the independent sets of the graph. The crate provides
//!
//! * [`topology`]: graph families, state-space enumeration, cliques and
//!   partite structure (`H(u)`, `ζ`, `Ω*`);
//! * [`stationary`]: the product-form law of the fixed-rate activity process,
//!   subset flows and bottleneck ratios, exact mixing times, stability checks;
//! * [`bounds`]: lower bounds on queue lengths, delays and mixing times;
//! * [`sim`]: an exact event-driven simulator of the joint activity/queue
//!   process with the doubling estimation protocol;
//! * [`io`]: CSV writers for the above.

pub mod bounds;
pub mod error;
pub mod io;
pub mod sim;
pub mod stationary;
pub mod topology;

pub use error::{Error, Result};
