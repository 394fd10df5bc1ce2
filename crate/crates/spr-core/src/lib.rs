//! Sparse phase retrieval from low-pass autocorrelation measurements.
//!
//! A signal made of K point sources can be recovered — up to translation and
//! reflection — from the low-frequency samples of its autocorrelation alone.
//! This crate implements the full pipeline:
//!
//! 1. [`model`] — point-source signals, their autocorrelation atom sets, and
//!    noisy measurement synthesis;
//! 2. [`fri`] — super-resolution of the autocorrelation's atom locations and
//!    weights from Fourier samples (annihilating-filter method);
//! 3. [`turnpike`] — greedy recovery of the source locations from the set of
//!    pairwise differences, with pruning / symmetric-cost / caching /
//!    denoising refinements;
//! 4. [`amplitude`] — recovery of the source amplitudes from the
//!    autocorrelation weights in the log domain;
//! 5. [`flip`] — a charge-flipping baseline operating on a dense grid;
//! 6. [`theory`] — closed-form performance models (expected MSE, success
//!    probability) for the greedy recovery;
//! 7. [`metrics`] — alignment-aware error metrics used by every experiment.

pub mod amplitude;
pub mod error;
pub mod flip;
pub mod fri;
pub mod metrics;
pub mod model;
pub mod seeding;
pub mod theory;
pub mod turnpike;

mod assign;
mod special;

pub use error::{Error, Result};
