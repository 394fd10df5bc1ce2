//! Experiment harness for the sparse phase-retrieval pipeline.
//!
//! The library half of the `spr` binary: experiment configuration,
//! deterministic result emission (CSV + manifest), seeded instance
//! generators, and the five Monte-Carlo experiment drivers. Everything is
//! deterministic given an [`config::ExperimentSpec`]: per-trial randomness is
//! derived by hashing (master seed, cell, trial, stream), so runs are
//! reproducible regardless of execution order.

pub mod config;
pub mod experiments;
pub mod instances;
pub mod report;
