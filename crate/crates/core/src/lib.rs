//! Planning-benchmark environments and graders.
//!
//! This crate is `no_std` (it needs `alloc`) and contains everything that is a
//! pure function of its inputs:
//!
//! * [`fitness`]: the interactive fitness-planning environment with a hidden
//!   user utility, dynamic constraints and the solver metrics.
//! * [`course`]: classroom assignment instances, an exact branch-and-bound
//!   solver, a brute-force oracle and the plan distance heuristic.
//! * [`eval`]: the comparative heuristic, oracle ranking and graded metrics
//!   (hit@k, pairwise agreement, pass rate).
//! * [`agents`]: agent interfaces plus scripted offline baselines.
//!
//! IO, prompt handling and the command line live in the `planeval` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod course;
mod error;
pub mod eval;
pub mod fitness;
pub mod rng;

pub use error::{Error, Result};
