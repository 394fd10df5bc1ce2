//! Charge flipping: the discrete dual-space baseline.
//!
//! Given the magnitudes |F_m| of a signal's DFT (phases lost), charge
//! flipping alternates two projections from a random-phase start:
//!
//!  * **real space** — every cell whose value lies below a threshold δ has
//!    its sign flipped, concentrating charge into few positive peaks;
//!  * **reciprocal space** — the DFT magnitudes are reset to the measured
//!    ones, keeping the current phases.
//!
//! The threshold follows δ = b·θ, with θ the standard deviation of the
//! current iterate (recomputed once per epoch) and b ≈ 1.1, decayed
//! geometrically per epoch like a simulated-annealing temperature. A run
//! stops once the flipped-charge fraction drops below 1% of the total
//! charge, or at the iteration cap. Because convergence depends strongly on
//! the random initialization, several restarts are run and the one whose
//! post-flip iterate best explains the measured magnitudes (smallest ℓ²
//! magnitude residual) wins.
//!
//! The output lives on a grid: cell i of G represents position i/G of one
//! signal period, and the result is determined only up to the circular shift
//! and reflection inherited from the magnitude measurement.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::Support;
use crate::seeding::rng_for;
use rand::Rng;

/// Iterations between threshold recomputations.
const EPOCH: usize = 50;
/// A run is converged when the flipped charge falls below this fraction of
/// the total charge.
const CONVERGED_FLIP_FRACTION: f64 = 0.01;

/// Parameters of a charge-flipping run. `grid_size` must be at least twice
/// the expected sparsity so distinct peaks can be represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlipConfig {
    pub grid_size: usize,
    /// Threshold multiplier δ = b·θ, sensible range ≈ 1–1.2.
    pub b: f64,
    /// Geometric decay of δ per epoch; 1 disables the annealing.
    pub delta_decay: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FlipConfig {
    fn default() -> Self {
        Self { grid_size: 200, b: 1.1, delta_decay: 0.99, max_iters: 5000, restarts: 10, seed: 0 }
    }
}

impl FlipConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid size must be ≥ 2, got {}",
                self.grid_size
            )));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "threshold multiplier must be positive, got {}",
                self.b
            )));
        }
        if !(self.delta_decay > 0.0 && self.delta_decay <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay must lie in (0, 1], got {}",
                self.delta_decay
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("need at least one iteration".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("need at least one restart".into()));
        }
        Ok(())
    }
}

struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transforms {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    fn spectrum(&self, signal: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> =
            signal.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn real_inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        buf.iter().map(|z| z.re * scale).collect()
    }

    /// Reciprocal-space projection: keep the phases of `signal`'s spectrum,
    /// impose the measured magnitudes. Zero-magnitude spectrum bins take
    /// phase 0.
    fn project(&self, signal: &[f64], magnitudes: &[f64]) -> Vec<f64> {
        let mut spec = self.spectrum(signal);
        for (z, mag) in spec.iter_mut().zip(magnitudes) {
            let norm = z.norm();
            *z = if norm > 0.0 { *z * (mag / norm) } else { Complex64::new(*mag, 0.0) };
        }
        self.real_inverse(&spec)
    }

    fn magnitude_residual(&self, signal: &[f64], magnitudes: &[f64]) -> f64 {
        self.spectrum(signal)
            .iter()
            .zip(magnitudes)
            .map(|(z, mag)| (z.norm() - mag).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// One reciprocal-space projection: the output keeps the input's spectral
/// phases but carries exactly the given magnitudes. Exposed because the
/// projection is the load-bearing half of the iteration and its exactness
/// and idempotence are contractual.
pub fn project_magnitudes(signal: &[f64], magnitudes: &[f64]) -> Vec<f64> {
    assert_eq!(signal.len(), magnitudes.len(), "grid/spectrum size mismatch");
    Transforms::new(signal.len()).project(signal, magnitudes)
}

/// Recovers a discrete sparse signal from its DFT magnitudes. Returns the
/// best restart's magnitude-consistent iterate; deterministic for a fixed
/// config (restart r is seeded from `seed` and r).
pub fn charge_flip(magnitudes: &[f64], config: &FlipConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if magnitudes.len() != config.grid_size {
        return Err(Error::InvalidArgument(format!(
            "{} magnitudes do not fill a {}-cell grid",
            magnitudes.len(),
            config.grid_size
        )));
    }
    if magnitudes.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::InvalidArgument("magnitudes must be finite and ≥ 0".into()));
    }
    if magnitudes.iter().all(|m| *m == 0.0) {
        return Err(Error::InvalidArgument("all-zero magnitudes carry no signal".into()));
    }

    let g = config.grid_size;
    let transforms = Transforms::new(g);
    let mut best: Option<(f64, Vec<f64>)> = None;

    for restart in 0..config.restarts {
        let mut rng = rng_for(config.seed, &[restart as u64]);
        // Random phases on the measured magnitudes, conjugate-symmetrized so
        // the starting iterate is real.
        let mut spec = vec![Complex64::new(0.0, 0.0); g];
        spec[0] = Complex64::new(magnitudes[0], 0.0);
        for m in 1..=(g - 1) / 2 {
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            spec[m] = Complex64::from_polar(magnitudes[m], phase);
            spec[g - m] = spec[m].conj();
        }
        if g % 2 == 0 {
            spec[g / 2] = Complex64::new(magnitudes[g / 2], 0.0);
        }
        let mut x = transforms.real_inverse(&spec);

        let mut delta = 0.0;
        for iter in 0..config.max_iters {
            if iter % EPOCH == 0 {
                let epoch = (iter / EPOCH) as i32;
                delta = config.b * std_dev(&x) * config.delta_decay.powi(epoch);
            }
            let mut flipped_charge = 0.0;
            let mut total_charge = 0.0;
            for v in &mut x {
                total_charge += v.abs();
                if *v < delta {
                    flipped_charge += v.abs();
                    *v = -*v;
                }
            }
            if flipped_charge < CONVERGED_FLIP_FRACTION * total_charge {
                break;
            }
            x = transforms.project(&x, magnitudes);
        }

        // `x` is the post-flip iterate here (the loop breaks after flipping,
        // and a capped run ends on the flip of its final iteration's
        // projection — scored the same way).
        let residual = transforms.magnitude_residual(&x, magnitudes);
        if best.as_ref().map_or(true, |(r, _)| residual < *r) {
            best = Some((residual, transforms.project(&x, magnitudes)));
        }
    }

    Ok(best.expect("at least one restart").1)
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Picks the K largest-magnitude grid cells as the recovered support, cell i
/// of G mapping to position i/G ∈ [0, 1). Adjacent cells count separately —
/// no peak merging.
pub fn extract_support_from_grid(signal: &[f64], k: usize) -> Result<Support> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("support needs K ≥ 2 points, got {k}")));
    }
    if signal.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{}-cell grid cannot hold {k} peaks",
            signal.len()
        )));
    }
    let mut order: Vec<usize> = (0..signal.len()).collect();
    // Descending by magnitude, ascending index on exact ties.
    order.sort_by(|a, b| {
        signal[*b]
            .abs()
            .partial_cmp(&signal[*a].abs())
            .unwrap()
            .then(a.cmp(b))
    });
    let top = &order[..k];
    if top.iter().any(|i| signal[*i] == 0.0) {
        return Err(Error::DegenerateOutput(format!(
            "fewer than {k} nonzero grid cells"
        )));
    }
    let g = signal.len() as f64;
    let mut cells: Vec<usize> = top.to_vec();
    cells.sort_unstable();
    Support::new(1, cells.iter().map(|i| vec![*i as f64 / g]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spike_signal(grid: usize, spikes: &[(usize, f64)]) -> Vec<f64> {
        let mut x = vec![0.0; grid];
        for (i, a) in spikes {
            x[*i] = *a;
        }
        x
    }

    fn magnitudes_of(signal: &[f64]) -> Vec<f64> {
        Transforms::new(signal.len())
            .spectrum(signal)
            .iter()
            .map(|z| z.norm())
            .collect()
    }

    #[test]
    fn projection_imposes_magnitudes_exactly() {
        let mags = magnitudes_of(&spike_signal(64, &[(5, 1.0), (20, 0.7)]));
        let start = spike_signal(64, &[(3, 0.2), (40, -0.9), (50, 0.4)]);
        let projected = project_magnitudes(&start, &mags);
        let t = Transforms::new(64);
        let err = t.magnitude_residual(&projected, &mags);
        let scale = mags.iter().map(|m| m * m).sum::<f64>().sqrt();
        assert!(err < 1e-10 * scale, "residual {err}");
    }

    #[test]
    fn projection_is_idempotent() {
        let mags = magnitudes_of(&spike_signal(64, &[(5, 1.0), (20, 0.7)]));
        let start = spike_signal(64, &[(3, 0.2), (40, -0.9)]);
        let once = project_magnitudes(&start, &mags);
        let twice = project_magnitudes(&once, &mags);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn recovers_on_grid_pair_in_most_restarts() {
        // Noiseless two-spike signal on a 64-cell grid: the circular gap
        // between the two recovered peaks must match the true gap (16 cells)
        // within one cell, modulo the shift/reflection ambiguity, in at
        // least 8 of 10 independently seeded runs.
        let grid = 64;
        let truth_gap = 16i64;
        let mags = magnitudes_of(&spike_signal(grid, &[(8, 1.3), (24, 1.0)]));
        let mut hits = 0;
        for r in 0..10u64 {
            let config = FlipConfig {
                grid_size: grid,
                restarts: 1,
                seed: 5000 + r,
                ..FlipConfig::default()
            };
            let rec = charge_flip(&mags, &config).unwrap();
            let sup = extract_support_from_grid(&rec, 2).unwrap();
            let cells: Vec<i64> =
                sup.points.iter().map(|p| (p[0] * grid as f64).round() as i64).collect();
            let gap = (cells[1] - cells[0]).rem_euclid(grid as i64);
            let circular = gap.min(grid as i64 - gap);
            if (circular - truth_gap).abs() <= 1 {
                hits += 1;
            }
        }
        assert!(hits >= 8, "only {hits}/10 runs recovered the pair");
    }

    #[test]
    fn output_is_magnitude_consistent() {
        let mags = magnitudes_of(&spike_signal(64, &[(8, 1.3), (24, 1.0)]));
        let config = FlipConfig { grid_size: 64, restarts: 2, seed: 7, ..FlipConfig::default() };
        let rec = charge_flip(&mags, &config).unwrap();
        let t = Transforms::new(64);
        let scale = mags.iter().map(|m| m * m).sum::<f64>().sqrt();
        assert!(t.magnitude_residual(&rec, &mags) < 1e-8 * scale);
    }

    #[test]
    fn runs_are_deterministic_for_a_seed() {
        let mags = magnitudes_of(&spike_signal(64, &[(8, 1.3), (24, 1.0)]));
        let config =
            FlipConfig { grid_size: 64, restarts: 3, seed: 42, ..FlipConfig::default() };
        let a = charge_flip(&mags, &config).unwrap();
        let b = charge_flip(&mags, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let config = FlipConfig { grid_size: 8, ..FlipConfig::default() };
        assert!(charge_flip(&vec![0.0; 8], &config).is_err());
        assert!(charge_flip(&vec![1.0; 7], &config).is_err());
        assert!(charge_flip(&[1.0, -0.1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], &config).is_err());
        let bad_decay =
            FlipConfig { grid_size: 8, delta_decay: 0.0, ..FlipConfig::default() };
        assert!(charge_flip(&vec![1.0; 8], &bad_decay).is_err());
        let no_restarts = FlipConfig { grid_size: 8, restarts: 0, ..FlipConfig::default() };
        assert!(charge_flip(&vec![1.0; 8], &no_restarts).is_err());
    }

    #[test]
    fn extracts_impulse_train_cells_exactly() {
        let x = spike_signal(100, &[(10, 1.0), (30, 0.8), (50, 0.9)]);
        let sup = extract_support_from_grid(&x, 3).unwrap();
        assert_eq!(sup.points, vec![vec![0.1], vec![0.3], vec![0.5]]);
    }

    #[test]
    fn adjacent_cells_are_separate_peaks() {
        let x = spike_signal(100, &[(10, 1.0), (11, 0.9)]);
        let sup = extract_support_from_grid(&x, 2).unwrap();
        assert_eq!(sup.points, vec![vec![0.10], vec![0.11]]);
    }

    #[test]
    fn extraction_error_cases() {
        let x = spike_signal(100, &[(10, 1.0)]);
        assert!(matches!(
            extract_support_from_grid(&x, 2),
            Err(Error::DegenerateOutput(_))
        ));
        assert!(matches!(
            extract_support_from_grid(&x, 1),
            Err(Error::InvalidArgument(_))
        ));
    }
}
