//! Monte Carlo fault injection for erasure-coded SSD arrays.
//!
//! Drives are drawn from a pool calibrated against field failure statistics,
//! faults (bad chips, bad blocks, bad symbols) are injected by a discrete-event
//! engine, and every affected stripe is judged against the array's erasure
//! code to produce array-, block- and stripe-level data-loss records.

pub mod erasure;
pub mod error;
pub mod experiment;
pub mod failure_model;
pub mod report;
pub mod sim;
pub mod workload;

pub use error::{Error, Result};
