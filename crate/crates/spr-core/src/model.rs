//! Point-source signal model and measurement synthesis.
//!
//! A sparse signal f(x) = Σₖ cₖ φ(x − xₖ) with K spikes has an
//! autocorrelation that is itself a sparse sum of N = K²−K+1 spikes: one at
//! every pairwise difference xₖ − xₗ (weight cₖ·cₗ) plus one at the origin
//! (weight Σ cₖ²). Phase retrieval observes only this autocorrelation — via
//! low-pass Fourier samples, or (in the idealized difference-domain setting)
//! via the difference set itself corrupted by Gaussian noise. This module
//! holds the data types and the synthesis half of that pipeline.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Two difference vectors closer than this are treated as one (a collision).
/// For supports drawn from a continuous distribution collisions have
/// probability zero, so the generator simply rejects and resamples.
pub const COLLISION_TOL: f64 = 1e-9;

// ───────────────────────── domain types ─────────────────────────

/// Ordered list of K point locations in D dimensions (D ∈ {1, 2}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub dim: usize,
    /// Each inner vector has length `dim`.
    pub points: Vec<Vec<f64>>,
}

impl Support {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "support needs at least 2 points, got {}",
                points.len()
            )));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coordinate".into()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidArgument(format!(
                        "points {i} and {j} are identical"
                    )));
                }
            }
        }
        Ok(Self { dim, points })
    }

    /// Like [`Support::new`] but tolerant of coincident points. Recovery on a
    /// degenerate difference multiset (one whose source support had colliding
    /// differences) can legitimately place two estimates at the same location,
    /// and the error metrics still have to be computable on such outputs.
    /// Also the right constructor for truth supports that deliberately collide
    /// (e.g. collision-locus sweeps).
    pub fn from_recovered(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "support needs at least 2 points, got {}",
                points.len()
            )));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coordinate".into()));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Strictly positive spike amplitudes, aligned index-for-index with a
/// [`Support`]. Positivity is a contract: the log-domain recovery cannot
/// represent signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub values: Vec<f64>,
}

impl Amplitudes {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidArgument(
                "amplitudes must be finite and strictly positive".into(),
            ));
        }
        Ok(Self { values })
    }

    /// All-ones amplitudes, the default of the Monte-Carlo experiments.
    pub fn unit(k: usize) -> Self {
        Self { values: vec![1.0; k] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One spike of a sparse autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfAtom {
    pub location: Vec<f64>,
    pub weight: f64,
}

/// Sparse autocorrelation: centrally symmetric atom list, sorted ascending
/// by location norm (ties broken lexicographically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfAtoms {
    pub dim: usize,
    pub atoms: Vec<AcfAtom>,
}

impl AcfAtoms {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Weight of the atom nearest the origin (Σ cₖ² for an exact ACF).
    pub fn origin_weight(&self) -> Option<f64> {
        self.atoms
            .iter()
            .min_by(|a, b| total_cmp_f64(norm2(&a.location), norm2(&b.location)))
            .map(|a| a.weight)
    }
}

/// The N = K²−K+1 pairwise differences of a K-point support, sorted
/// ascending by Euclidean norm: ‖d̃₁‖ ≤ … ≤ ‖d̃_N‖.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSet {
    pub dim: usize,
    pub diffs: Vec<Vec<f64>>,
    /// Noise scale that produced this set, for bookkeeping only; algorithms
    /// never read it.
    pub sigma_hint: Option<f64>,
}

impl DifferenceSet {
    pub fn new(dim: usize, mut diffs: Vec<Vec<f64>>, sigma_hint: Option<f64>) -> Result<Self> {
        implied_point_count(diffs.len())?;
        for d in &diffs {
            if d.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "difference has {} coordinates, expected {dim}",
                    d.len()
                )));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite difference".into()));
            }
        }
        diffs.sort_by(|a, b| norm_lex_cmp(a, b));
        Ok(Self { dim, diffs, sigma_hint })
    }

    /// All pairwise differences of a support (including the origin), i.e.
    /// the noiseless difference-domain measurement.
    pub fn from_support(support: &Support) -> Result<Self> {
        let mut diffs = vec![vec![0.0; support.dim]];
        for (k, xk) in support.points.iter().enumerate() {
            for (l, xl) in support.points.iter().enumerate() {
                if k != l {
                    diffs.push(sub(xk, xl));
                }
            }
        }
        Self::new(support.dim, diffs, Some(0.0))
    }

    /// Difference set underlying a sparse autocorrelation (atom locations,
    /// weights dropped).
    pub fn from_atoms(atoms: &AcfAtoms) -> Result<Self> {
        let sigma = None;
        Self::new(
            atoms.dim,
            atoms.atoms.iter().map(|a| a.location.clone()).collect(),
            sigma,
        )
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// The K with K²−K+1 = len().
    pub fn implied_k(&self) -> usize {
        implied_point_count(self.diffs.len()).expect("validated at construction")
    }
}

/// Ideal low-pass kernel: |Φ(ω)|² = 1 for |ω| < bandwidth, 0 outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDescriptor {
    /// rad / unit distance.
    pub bandwidth: f64,
}

impl KernelDescriptor {
    /// Kernel wide enough to pass samples m = −M…M at step Ω.
    pub fn covering(omega: f64, m_max: usize) -> Self {
        Self { bandwidth: omega * (m_max as f64 + 0.5) }
    }

    pub fn passes(&self, omega: f64) -> bool {
        omega.abs() < self.bandwidth
    }
}

/// Uniform Fourier samples A_m of a sparse autocorrelation, m = −M…M (1D).
/// `values[i]` holds A_{i−M}; conjugate symmetry A_{−m} = conj(A_m) holds for
/// every measurement this crate produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSamples {
    #[serde(with = "complex_pairs")]
    pub values: Vec<Complex64>,
    /// Sampling step Ω > 0.
    pub sampling_step: f64,
    pub kernel: KernelDescriptor,
}

impl FourierSamples {
    /// M such that samples cover m = −M…M.
    pub fn half_width(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    /// A_m by signed index.
    pub fn value(&self, m: i64) -> Complex64 {
        let idx = m + self.half_width() as i64;
        self.values[idx as usize]
    }
}

/// Complex numbers serialize as [re, im] pairs.
mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

// ───────────────────────── small vector helpers ─────────────────────────

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist2_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn total_cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Ascending by Euclidean norm, ties broken lexicographically — the total
/// order every sorted difference list in this crate uses.
pub(crate) fn norm_lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    total_cmp_f64(norm2(a), norm2(b)).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            match total_cmp_f64(*x, *y) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    })
}

/// Solves N = K²−K+1 for K ≥ 2, erroring when N is not of that form.
pub(crate) fn implied_point_count(n: usize) -> Result<usize> {
    let disc = (4 * n) as f64 - 3.0;
    let k = ((1.0 + disc.sqrt()) / 2.0).round() as usize;
    if k >= 2 && k * k - k + 1 == n {
        Ok(k)
    } else {
        Err(Error::InvalidArgument(format!(
            "{n} differences do not correspond to any K ≥ 2 (need K²−K+1)"
        )))
    }
}

fn any_collision(vectors: &[Vec<f64>], tol: f64) -> bool {
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            if dist2_sq(&vectors[i], &vectors[j]).sqrt() < tol {
                return true;
            }
        }
    }
    false
}

// ───────────────────────── operations ─────────────────────────

/// Draws K points i.i.d. uniform over the per-axis `bounds`, rejecting and
/// resampling any draw whose pairwise-difference set has a collision within
/// [`COLLISION_TOL`] (probability zero in theory, guarded anyway).
pub fn synthesize_support(
    k: usize,
    dim: usize,
    bounds: &[(f64, f64)],
    seed: u64,
) -> Result<Support> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be ≥ 2, got {k}")));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
    }
    if bounds.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "got {} bound intervals for dimension {dim}",
            bounds.len()
        )));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("empty bound interval [{lo}, {hi})")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MAX_ATTEMPTS: usize = 10_000;
    for _ in 0..MAX_ATTEMPTS {
        let points: Vec<Vec<f64>> = (0..k)
            .map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect())
            .collect();

        // Collision check on the full difference set (origin included, so
        // coincident points collide with the zero difference too).
        let mut diffs = vec![vec![0.0; dim]];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    diffs.push(sub(&points[i], &points[j]));
                }
            }
        }
        if !any_collision(&diffs, COLLISION_TOL) {
            return Support::new(dim, points);
        }
    }
    Err(Error::DegenerateInput(format!(
        "no collision-free support found in {MAX_ATTEMPTS} attempts (bounds too tight?)"
    )))
}

/// Expands a support + amplitudes into its sparse autocorrelation:
/// K²−K atoms at xₖ − xₗ with weights cₖ·cₗ, plus the origin atom Σ cₖ².
pub fn build_acf_atoms(support: &Support, amps: &Amplitudes) -> Result<AcfAtoms> {
    if support.len() != amps.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points vs {} amplitudes",
            support.len(),
            amps.len()
        )));
    }
    let k = support.len();
    let c = &amps.values;

    let mut atoms = Vec::with_capacity(k * k - k + 1);
    atoms.push(AcfAtom {
        location: vec![0.0; support.dim],
        weight: c.iter().map(|v| v * v).sum(),
    });
    for i in 0..k {
        for j in 0..k {
            if i != j {
                atoms.push(AcfAtom {
                    location: sub(&support.points[i], &support.points[j]),
                    weight: c[i] * c[j],
                });
            }
        }
    }

    let locations: Vec<Vec<f64>> = atoms.iter().map(|a| a.location.clone()).collect();
    if any_collision(&locations, COLLISION_TOL) {
        return Err(Error::Collision(
            "two distinct point pairs share a difference; support violates the separation assumption"
                .into(),
        ));
    }

    atoms.sort_by(|a, b| norm_lex_cmp(&a.location, &b.location));
    Ok(AcfAtoms { dim: support.dim, atoms })
}

/// Samples the Fourier transform of a sparse 1D autocorrelation through an
/// ideal low-pass kernel: A_m = Σₙ wₙ·exp(−j·mΩ·dₙ)·|Φ(mΩ)|², m = −M…M.
pub fn acf_fourier_samples(
    atoms: &AcfAtoms,
    kernel: &KernelDescriptor,
    omega: f64,
    m_max: usize,
) -> Result<FourierSamples> {
    if atoms.dim != 1 {
        return Err(Error::InvalidArgument(
            "Fourier sampling is implemented for 1D autocorrelations only".into(),
        ));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("sampling step must be positive, got {omega}")));
    }
    if m_max < atoms.len() {
        return Err(Error::InvalidArgument(format!(
            "need M ≥ atom count for downstream annihilation ({} < {})",
            m_max,
            atoms.len()
        )));
    }

    let mm = m_max as i64;
    let values = (-mm..=mm)
        .map(|m| {
            let w = m as f64 * omega;
            if !kernel.passes(w) {
                return Complex64::new(0.0, 0.0);
            }
            atoms
                .atoms
                .iter()
                .map(|a| a.weight * Complex64::new(0.0, -w * a.location[0]).exp())
                .sum()
        })
        .collect();

    Ok(FourierSamples { values, sampling_step: omega, kernel: kernel.clone() })
}

/// Adds i.i.d. 𝒩(0, σ²) noise to every coordinate of every difference
/// (the zero difference included — the recovery discards it as d̃₁ anyway)
/// and re-sorts by norm. σ = 0 returns the input unchanged.
pub fn add_difference_noise(clean: &DifferenceSet, sigma: f64, seed: u64) -> Result<DifferenceSet> {
    add_difference_noise_traced(clean, sigma, seed).map(|(noisy, _)| noisy)
}

/// [`add_difference_noise`] with provenance: the second return value maps
/// each noisy element back to its source, `trace[n]` being the index in
/// `clean.diffs` that noisy element n was built from. Lets a caller that
/// knows which point pair produced each clean difference carry those labels
/// through the noising and re-sorting.
pub fn add_difference_noise_traced(
    clean: &DifferenceSet,
    sigma: f64,
    seed: u64,
) -> Result<(DifferenceSet, Vec<usize>)> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise scale must be ≥ 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok((clean.clone(), (0..clean.len()).collect()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let mut tagged: Vec<(Vec<f64>, usize)> = clean
        .diffs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.iter().map(|v| v + normal.sample(&mut rng)).collect(), i))
        .collect();
    // Sort with the constructor's comparator so the trace stays aligned with
    // the final element order (the constructor's own stable sort is then a
    // no-op).
    tagged.sort_by(|a, b| norm_lex_cmp(&a.0, &b.0));
    let trace = tagged.iter().map(|(_, i)| *i).collect();
    let noisy = tagged.into_iter().map(|(d, _)| d).collect();
    Ok((DifferenceSet::new(clean.dim, noisy, Some(sigma))?, trace))
}

/// Adds white Gaussian noise to the Fourier samples at the requested SNR
/// (dB, signal power over noise power), mirrored so conjugate symmetry —
/// i.e. a real underlying autocorrelation — is preserved.
/// An infinite `snr_db` returns the input unchanged.
pub fn add_fourier_noise(samples: &FourierSamples, snr_db: f64, seed: u64) -> Result<FourierSamples> {
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("SNR must not be NaN".into()));
    }
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok(samples.clone());
    }
    let n = samples.values.len();
    let m_max = samples.half_width();
    let signal_power: f64 = samples.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let noise_power = signal_power / 10f64.powf(snr_db / 10.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut values = samples.values.clone();
    // Draw noise for m = 0…M and mirror conjugates onto −m.
    for m in 0..=m_max {
        let w = if m == 0 {
            Complex64::new(noise_power.sqrt() * normal.sample(&mut rng), 0.0)
        } else {
            Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                * (noise_power / 2.0).sqrt()
        };
        values[m_max + m] += w;
        if m > 0 {
            values[m_max - m] += w.conj();
        }
    }
    Ok(FourierSamples {
        values,
        sampling_step: samples.sampling_step,
        kernel: samples.kernel.clone(),
    })
}
