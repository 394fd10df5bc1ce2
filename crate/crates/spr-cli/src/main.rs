//! `spr` — sparse phase retrieval from autocorrelation measurements.
//!
//! Single-shot pipeline commands (JSON to stdout or `--out`) plus the
//! experiment drivers (`spr experiment <id>`), which write a CSV result
//! table and a JSON manifest.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use spr_cli::config::{ExperimentId, ExperimentSpec};
use spr_cli::experiments;
use spr_cli::instances::{
    acf_samples_from_spectrum, amplitude_l2_error, grid_support_to_window, magnitude_bins,
    signal_spectrum, spectral_instance, support_rmse,
};
use spr_cli::report;
use spr_core::amplitude::{assemble_weight_matrix, recover_amplitudes};
use spr_core::flip::{charge_flip, extract_support_from_grid, FlipConfig};
use spr_core::fri::superresolve_acf;
use spr_core::metrics::{index_based_error, l2_error_aligned};
use spr_core::model::{
    add_difference_noise, add_fourier_noise, synthesize_support, Amplitudes, DifferenceSet,
};
use spr_core::seeding::derive_seed;
use spr_core::theory;
use spr_core::turnpike::{recover_support, RecoveryConfig};

#[derive(Parser)]
#[command(
    name = "spr",
    version,
    about = "Sparse phase retrieval: super-resolution pipeline and experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a seeded random support (unit amplitudes) as JSON.
    Synth {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Super-resolve autocorrelation atoms from (optionally noisy) Fourier
    /// magnitudes of a seeded K-spike instance.
    Superresolve {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Measurement SNR in dB; omit for the noiseless spectrum.
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a support from noisy pairwise differences of a seeded
    /// instance.
    Recover {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1e-3)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        denoise: bool,
        #[arg(long)]
        caching: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full noiseless pipeline on a seeded spectral instance: super-resolve
    /// the autocorrelation, solve the turnpike problem, recover amplitudes.
    Amplitudes {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the theoretical success model at (K, σ).
    Theory {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        sigma: f64,
        /// Problem dimension the predictions are evaluated for.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run charge flipping on (optionally noisy) Fourier magnitudes of a
    /// seeded K-spike instance.
    Cf {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Measurement SNR in dB; omit for noiseless magnitudes.
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment driver; writes a CSV table and a JSON manifest.
    Experiment {
        /// One of: phase-transition, ablation, star, caching, cf-comparison.
        id: String,
        /// TOML overrides on top of the experiment's defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master-seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { k, dim, seed, out } => {
            let bounds = vec![(0.0, 1.0); dim];
            let support = synthesize_support(k, dim, &bounds, seed)?;
            let diffs = DifferenceSet::from_support(&support)?;
            emit(
                json!({
                    "support": support,
                    "amplitudes": Amplitudes::unit(k),
                    "difference_count": diffs.len(),
                }),
                out,
            )
        }
        Command::Superresolve { k, seed, snr_db, out } => {
            let inst = spectral_instance(k, seed, None)?;
            let measured = measure(&inst, snr_db, seed)?;
            let atoms = superresolve_acf(&acf_samples_from_spectrum(&measured), k)?;
            emit(json!({ "truth": inst.support, "atoms": atoms }), out)
        }
        Command::Recover { k, dim, sigma, seed, prune, symmetric, denoise, caching, out } => {
            let bounds = vec![(0.0, 1.0); dim];
            let support = synthesize_support(k, dim, &bounds, derive_seed(seed, &[0]))?;
            let clean = DifferenceSet::from_support(&support)?;
            let noisy = add_difference_noise(&clean, sigma, derive_seed(seed, &[1]))?;
            let config = RecoveryConfig {
                prune_differences: prune,
                symmetric_cost: symmetric,
                denoise_partials: denoise,
                use_caching: caching,
            };
            config.validate()?;
            let estimate = recover_support(&noisy, k, config, dim)?;
            emit(
                json!({
                    "truth": support,
                    "estimate": estimate,
                    "sigma": sigma,
                    "l2_error": l2_error_aligned(&support, &estimate)?,
                    "index_error": index_based_error(&estimate, &support, sigma)?,
                }),
                out,
            )
        }
        Command::Amplitudes { k, seed, out } => {
            let inst = spectral_instance(k, seed, Some((0.5, 2.0)))?;
            let samples = acf_samples_from_spectrum(&signal_spectrum(&inst));
            let atoms = superresolve_acf(&samples, k)?;
            let diffs = DifferenceSet::from_atoms(&atoms)?;
            let config = RecoveryConfig {
                prune_differences: true,
                symmetric_cost: true,
                denoise_partials: true,
                ..RecoveryConfig::default()
            };
            let est_support = recover_support(&diffs, k, config, 1)?;
            let weights = assemble_weight_matrix(&atoms, &est_support, None)?;
            let est_amplitudes = recover_amplitudes(&weights)?;
            emit(
                json!({
                    "truth": { "support": inst.support, "amplitudes": inst.amplitudes },
                    "estimate": { "support": est_support, "amplitudes": est_amplitudes },
                    "support_rmse": support_rmse(&inst.support, &est_support)?,
                    "amplitude_l2_error": amplitude_l2_error(
                        &inst.support, &inst.amplitudes, &est_support, &est_amplitudes,
                    ),
                }),
                out,
            )
        }
        Command::Theory { k, sigma, dim, out } => emit(
            json!({
                "k": k,
                "sigma": sigma,
                "dim": dim,
                "success_probability": theory::success_probability_dim(k, sigma, dim)?,
                "expected_mse": theory::expected_mse(k, sigma)?,
                "crossing_sigma_at_half": theory::crossing_sigma_dim(k, 0.5, dim)?,
            }),
            out,
        ),
        Command::Cf { k, seed, snr_db, restarts, out } => {
            let inst = spectral_instance(k, seed, None)?;
            let measured = measure(&inst, snr_db, seed)?;
            let config = FlipConfig {
                restarts,
                seed: derive_seed(seed, &[2]),
                ..FlipConfig::default()
            };
            let grid_signal = charge_flip(&magnitude_bins(&measured), &config)?;
            let estimate = grid_support_to_window(&extract_support_from_grid(&grid_signal, k)?)?;
            emit(
                json!({
                    "truth": inst.support,
                    "estimate": estimate,
                    "support_rmse": support_rmse(&inst.support, &estimate)?,
                }),
                out,
            )
        }
        Command::Experiment { id, config, seed, out } => {
            let id: ExperimentId = id.parse()?;
            let mut spec = match config {
                Some(path) => ExperimentSpec::load_for(id, &path)?,
                None => ExperimentSpec::default_for(id),
            };
            if let Some(seed) = seed {
                spec.master_seed = seed;
            }
            if let Some(out) = out {
                spec.out = Some(out);
            }
            let run = experiments::run(&spec)?;
            let csv_path = spec.out_path();
            let manifest = report::write_outputs(&csv_path, &run.table, &spec, run.extra)?;
            println!(
                "wrote {} ({} rows) and {}",
                csv_path.display(),
                run.table.len(),
                manifest.display()
            );
            Ok(())
        }
    }
}

/// Noiseless or SNR-degraded spectrum of a spectral instance.
fn measure(
    inst: &spr_cli::instances::SpectralInstance,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<spr_core::model::FourierSamples> {
    let spectrum = signal_spectrum(inst);
    match snr_db {
        Some(db) => Ok(add_fourier_noise(&spectrum, db, derive_seed(seed, &[1]))?),
        None => Ok(spectrum),
    }
}

/// Pretty JSON to stdout, or to `--out` when given.
fn emit(value: serde_json::Value, out: Option<PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    match out {
        Some(path) => {
            std::fs::write(&path, text)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
