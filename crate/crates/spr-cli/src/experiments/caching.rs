//! Runtime scaling of the greedy recovery with and without the label cache.
//!
//! For each K: seeded noiseless 1D instances, wall-clock medians over
//! `timing_reps` repetitions of the same recovery run uncached and cached,
//! plus a log-log least-squares exponent fit of the medians. The outputs of
//! the two variants are compared on every repetition — caching must change
//! runtime only, never the result — and the run aborts if they ever differ.
//!
//! This is the one experiment whose CSV is not byte-reproducible: the
//! timing columns are wall-clock measurements. Everything else (instances,
//! outputs, row order) is still fully determined by the spec.

use std::time::Instant;

use anyhow::{bail, Result};
use serde_json::json;
use spr_core::model::{synthesize_support, DifferenceSet};
use spr_core::seeding::derive_seed;
use spr_core::turnpike::{recover_support, RecoveryConfig};

use crate::config::ExperimentSpec;
use crate::experiments::{ensure_dimension, ExperimentRun};
use crate::report::{fmt_f64, Table};

pub fn run(spec: &ExperimentSpec) -> Result<ExperimentRun> {
    ensure_dimension(spec, &[1])?;
    // Denoising is orthogonal to what's being measured and is incompatible
    // with the cache; force it off so both variants run the same algorithm.
    let uncached_cfg =
        RecoveryConfig { use_caching: false, denoise_partials: false, ..spec.recovery };
    let cached_cfg = RecoveryConfig { use_caching: true, ..uncached_cfg };
    let bounds = [(0.0, 1.0)];

    let mut table = Table::new(&["k", "median_seconds_uncached", "median_seconds_cached"]);
    let mut medians_uncached = Vec::new();
    let mut medians_cached = Vec::new();

    for (ki, &k) in spec.k_grid.iter().enumerate() {
        let mut times_uncached = Vec::with_capacity(spec.timing_reps);
        let mut times_cached = Vec::with_capacity(spec.timing_reps);
        for rep in 0..spec.timing_reps as u64 {
            let seed = derive_seed(spec.master_seed, &[ki as u64, rep, 0]);
            let support = synthesize_support(k, 1, &bounds, seed)?;
            let diffs = DifferenceSet::from_support(&support)?;

            let t0 = Instant::now();
            let plain = recover_support(&diffs, k, uncached_cfg, 1)?;
            times_uncached.push(t0.elapsed().as_secs_f64());

            let t1 = Instant::now();
            let cached = recover_support(&diffs, k, cached_cfg, 1)?;
            times_cached.push(t1.elapsed().as_secs_f64());

            if plain != cached {
                bail!("cached recovery diverged from uncached at K = {k}, rep {rep}");
            }
        }
        let mu = median(&mut times_uncached);
        let mc = median(&mut times_cached);
        table.push(vec![k.to_string(), fmt_f64(mu), fmt_f64(mc)]);
        medians_uncached.push(mu);
        medians_cached.push(mc);
    }

    let extra = json!({
        "uncached_exponent": fit_loglog_exponent(&spec.k_grid, &medians_uncached),
        "cached_exponent": fit_loglog_exponent(&spec.k_grid, &medians_cached),
        "outputs_identical": true,
        "repetitions": spec.timing_reps,
    });
    Ok(ExperimentRun { table, extra })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Least-squares slope of ln(seconds) against ln(K): the α of a C·K^α fit.
pub fn fit_loglog_exponent(ks: &[usize], seconds: &[f64]) -> f64 {
    assert_eq!(ks.len(), seconds.len());
    assert!(ks.len() >= 2, "an exponent fit needs at least two K values");
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = seconds.iter().map(|&s| s.max(1e-12).ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    sxy / sxx
}
