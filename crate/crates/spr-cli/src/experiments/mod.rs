//! Monte-Carlo experiment drivers.
//!
//! Each driver consumes an [`ExperimentSpec`](crate::config::ExperimentSpec)
//! and produces a [`Table`](crate::report::Table) plus driver-specific
//! manifest extras. Drivers are sequential; determinism comes from deriving
//! every random stream as hash(master seed, cell, trial, stream), so the
//! iteration order never matters and reruns are byte-identical (timing
//! columns excepted).

use anyhow::{bail, Result};

use crate::config::{ExperimentId, ExperimentSpec};
use crate::report::Table;

pub mod ablation;
pub mod caching;
pub mod cfcmp;
pub mod phase;
pub mod star;

/// A completed experiment: the result table and manifest extras.
pub struct ExperimentRun {
    pub table: Table,
    pub extra: serde_json::Value,
}

/// Validates the spec and dispatches to its driver.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentRun> {
    spec.validate()?;
    match spec.id()? {
        ExperimentId::PhaseTransition => phase::run(spec),
        ExperimentId::Ablation => ablation::run(spec),
        ExperimentId::Star => star::run(spec),
        ExperimentId::Caching => caching::run(spec),
        ExperimentId::CfComparison => cfcmp::run(spec),
    }
}

/// Error charged to a trial whose recovery fails outright (degenerate pool,
/// labeling failure, …): the squared-error scale of a maximally wrong
/// unit-box support, far beyond any success threshold but bounded so means
/// stay meaningful. Failures also count as index error 1.
pub fn failure_l2(k: usize, dim: usize) -> f64 {
    (k * dim) as f64
}

pub(crate) fn ensure_dimension(spec: &ExperimentSpec, allowed: &[usize]) -> Result<()> {
    if !allowed.contains(&spec.dimension) {
        bail!(
            "experiment '{}' supports dimensions {:?}, got {}",
            spec.experiment,
            allowed,
            spec.dimension
        );
    }
    Ok(())
}
