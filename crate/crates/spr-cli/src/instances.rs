//! Seeded problem-instance generators shared by the experiment drivers.
//!
//! Two families:
//!
//! * **difference-domain instances** — a random support on the unit box whose
//!   noisy pairwise differences feed the greedy recovery directly (phase map,
//!   ablation, star, caching);
//! * **spectral instances** — the K = 5 magnitude-measurement geometry of the
//!   charge-flip comparison: the signal lives on [0, 1), is measured through
//!   200 Fourier coefficients of the 2×-padded window [0, 2), and both the
//!   FRI pipeline and charge flipping see the same noisy spectrum.
//!
//! The spectral generator normalizes each draw to a 0.9 extent and then
//! jitters every point by U[0, 0.01) so no location sits exactly on a grid
//! cell boundary of the comparison baseline; draws whose support gap falls
//! under 0.015 or whose autocorrelation atoms come closer than 0.01 (the
//! Rayleigh limit of 199 coefficients is ≈ 0.01 location units) are redrawn —
//! both methods get instances that are resolvable in principle.

use anyhow::{anyhow, Result};
use num_complex::Complex64;
use rand::Rng;
use spr_core::metrics::l2_error_aligned;
use spr_core::model::{
    acf_fourier_samples, build_acf_atoms, Amplitudes, FourierSamples, KernelDescriptor, Support,
};
use spr_core::seeding::rng_for;

/// Sparsity of the spectral-measurement geometry.
pub const SPECTRAL_K: usize = 5;
/// Fourier sampling step of the padded window (period 2 ⇒ Ω = π).
pub const OMEGA: f64 = std::f64::consts::PI;
/// Measured coefficients m = −99…99; the grid's Nyquist bin is not measured.
pub const HALF_SPECTRUM: usize = 99;
/// Real-space grid of the charge-flipping baseline.
pub const GRID_SIZE: usize = 200;
/// Padded window length: twice the unit support window.
pub const PERIOD: f64 = 2.0;
/// Span of the normalized support inside the unit window.
pub const SUPPORT_EXTENT: f64 = 0.9;
/// Sub-cell jitter applied after normalization.
pub const JITTER: f64 = 0.01;
/// Minimum support separation accepted by the spectral generator.
pub const MIN_SUPPORT_GAP: f64 = 0.015;
/// Minimum autocorrelation-atom separation accepted.
pub const MIN_ACF_GAP: f64 = 0.01;

const MAX_DRAW_ATTEMPTS: u32 = 10_000;

/// A sparse signal for the magnitude-measurement experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInstance {
    pub support: Support,
    pub amplitudes: Amplitudes,
}

/// Draws a K-point spectral instance: points uniform on [0, 1), normalized to
/// [`SUPPORT_EXTENT`], jittered by U[0, [`JITTER`]), re-drawn until both gap
/// floors hold. Amplitudes are unit, or uniform on `amp_range` when given.
pub fn spectral_instance(
    k: usize,
    seed: u64,
    amp_range: Option<(f64, f64)>,
) -> Result<SpectralInstance> {
    if k < 2 {
        return Err(anyhow!("need K ≥ 2, got {k}"));
    }
    let mut rng = rng_for(seed, &[]);
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let mut pts: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = pts[0];
        let span = pts[k - 1] - pts[0];
        if span < 1e-6 {
            continue;
        }
        let mut pts: Vec<f64> = pts
            .iter()
            .map(|p| (p - lo) / span * SUPPORT_EXTENT + rng.random_range(0.0..JITTER))
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sup_gap = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if sup_gap < MIN_SUPPORT_GAP {
            continue;
        }
        let mut atoms = vec![0.0];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    atoms.push(pts[i] - pts[j]);
                }
            }
        }
        atoms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let acf_gap = atoms.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if acf_gap < MIN_ACF_GAP {
            continue;
        }
        let amplitudes = match amp_range {
            Some((lo, hi)) => {
                Amplitudes::new((0..k).map(|_| rng.random_range(lo..hi)).collect())?
            }
            None => Amplitudes::unit(k),
        };
        let support = Support::new(1, pts.into_iter().map(|p| vec![p]).collect())?;
        return Ok(SpectralInstance { support, amplitudes });
    }
    Err(anyhow!("no admissible K = {k} instance in {MAX_DRAW_ATTEMPTS} draws"))
}

/// The signal's Fourier coefficients F(mΩ) = Σ cₖ e^{−jΩm xₖ} for
/// m = −M…M on the padded window.
pub fn signal_spectrum(inst: &SpectralInstance) -> FourierSamples {
    let mm = HALF_SPECTRUM as i64;
    let values = (-mm..=mm)
        .map(|m| {
            inst.support
                .points
                .iter()
                .zip(&inst.amplitudes.values)
                .map(|(p, c)| Complex64::from_polar(*c, -OMEGA * m as f64 * p[0]))
                .sum()
        })
        .collect();
    FourierSamples {
        values,
        sampling_step: OMEGA,
        kernel: KernelDescriptor::covering(OMEGA, HALF_SPECTRUM),
    }
}

/// DFT-magnitude bins for the grid baseline: bin m = |F̃(mΩ)| for m ≤ M,
/// the unmeasured Nyquist bin 0, and the mirrored negative frequencies.
pub fn magnitude_bins(spectrum: &FourierSamples) -> Vec<f64> {
    let mut mags = vec![0.0; GRID_SIZE];
    for m in 0..=HALF_SPECTRUM {
        mags[m] = spectrum.value(m as i64).norm();
        if m > 0 {
            mags[GRID_SIZE - m] = spectrum.value(-(m as i64)).norm();
        }
    }
    mags
}

/// Autocorrelation samples A(mΩ) = |F̃(mΩ)|² — the measurement the FRI
/// pipeline starts from. Phases of the spectrum are discarded here; this is
/// the step that makes the problem phase retrieval.
pub fn acf_samples_from_spectrum(spectrum: &FourierSamples) -> FourierSamples {
    FourierSamples {
        values: spectrum
            .values
            .iter()
            .map(|z| Complex64::new(z.norm_sqr(), 0.0))
            .collect(),
        sampling_step: spectrum.sampling_step,
        kernel: spectrum.kernel.clone(),
    }
}

/// Noiseless autocorrelation Fourier samples of an instance, built from the
/// exact atom decomposition (used by the noiseless end-to-end checks; equal
/// to squaring the spectrum up to rounding).
pub fn acf_samples_exact(inst: &SpectralInstance) -> Result<FourierSamples> {
    let atoms = build_acf_atoms(&inst.support, &inst.amplitudes)?;
    let kernel = KernelDescriptor::covering(OMEGA, HALF_SPECTRUM);
    Ok(acf_fourier_samples(&atoms, &kernel, OMEGA, HALF_SPECTRUM)?)
}

/// Unrolls grid positions that may wrap around the periodic window: sorts,
/// finds the largest circular gap, and starts the sequence after it. The
/// supports we compare against span at most half the padded period, so the
/// true configuration always contains a gap large enough to cut at.
pub fn unwrap_circular(mut pos: Vec<f64>, period: f64) -> Vec<f64> {
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = pos.len();
    let mut max_gap = pos[0] + period - pos[k - 1];
    let mut cut = 0;
    for i in 1..k {
        let g = pos[i] - pos[i - 1];
        if g > max_gap {
            max_gap = g;
            cut = i;
        }
    }
    (0..k)
        .map(|i| {
            let idx = (cut + i) % k;
            if idx < cut {
                pos[idx] + period
            } else {
                pos[idx]
            }
        })
        .collect()
}

/// Converts a grid-extracted support (cells as fractions of the grid) to
/// window coordinates and unwraps the circular ambiguity.
pub fn grid_support_to_window(est: &Support) -> Result<Support> {
    let pos: Vec<f64> = est.points.iter().map(|p| p[0] * PERIOD).collect();
    let unwrapped = unwrap_circular(pos, PERIOD);
    Ok(Support::new(1, unwrapped.into_iter().map(|p| vec![p]).collect())?)
}

/// Support error as a length: √(aligned total squared error).
pub fn support_rmse(truth: &Support, estimate: &Support) -> Result<f64> {
    Ok(l2_error_aligned(truth, estimate)?.sqrt())
}

/// ℓ² amplitude error after sorting both solutions by location, minimized
/// over the reflection ambiguity (the translation doesn't permute points).
pub fn amplitude_l2_error(
    truth_sup: &Support,
    truth_amp: &Amplitudes,
    est_sup: &Support,
    est_amp: &Amplitudes,
) -> f64 {
    let mut t: Vec<(f64, f64)> = truth_sup
        .points
        .iter()
        .zip(&truth_amp.values)
        .map(|(p, a)| (p[0], *a))
        .collect();
    t.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let mut e: Vec<(f64, f64)> = est_sup
            .points
            .iter()
            .zip(&est_amp.values)
            .map(|(p, a)| (if reflect { -p[0] } else { p[0] }, *a))
            .collect();
        e.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let err: f64 = t
            .iter()
            .zip(&e)
            .map(|((_, ta), (_, ea))| (ta - ea) * (ta - ea))
            .sum::<f64>()
            .sqrt();
        best = best.min(err);
    }
    best
}
