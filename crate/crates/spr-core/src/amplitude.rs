//! Amplitude recovery from labeled autocorrelation weights.
//!
//! Once the support X̂ = {x̂₁, …, x̂_K} is known, each off-origin ACF atom
//! weight is a product of two signal amplitudes: the atom at x̂ᵢ − x̂ⱼ weighs
//! cᵢcⱼ. Collecting them into the K×K matrix C (diagonal unknown — those
//! products collide at the origin atom, which instead carries Σ cᵢ²) turns
//! amplitude recovery into completing the rank-one matrix ccᵀ from its
//! off-diagonal part. In the log domain this is linear: with ℓᵢ = log cᵢ,
//!
//! ```text
//! Lᵢ,ⱼ = log Cᵢ,ⱼ = ℓᵢ + ℓⱼ   (i ≠ j),
//! ```
//!
//! every row sum satisfies Σ_{j≠i} Lᵢ,ⱼ = (K−2)ℓᵢ + Σⱼ ℓⱼ, and the total
//! s = Σ_{i≠j} Lᵢ,ⱼ fixes Σⱼ ℓⱼ = s / (2(K−1)), giving the closed form
//!
//! ```text
//! ℓᵢ = ( Σ_{j≠i} Lᵢ,ⱼ − s/(2(K−1)) ) / (K−2),      cᵢ = e^{ℓᵢ}.
//! ```
//!
//! K = 2 has no off-diagonal redundancy; there the origin weight joins in:
//! c₁c₂ = C₁,₂ and c₁² + c₂² = a₀ solve to a two-point quadratic.
//!
//! The log method requires strictly positive amplitudes — products must be
//! positive for the logarithm to exist. Nonpositive inputs are a domain
//! error, never silently regularized.

use crate::error::{Error, Result};
use crate::model::{dist2_sq, sub, AcfAtoms, Amplitudes, Support};

/// Off-diagonal products Cᵢ,ⱼ = cᵢcⱼ labeled from ACF atoms, plus the origin
/// weight a₀ = Σ cᵢ² when available (required for K = 2).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    /// K×K; diagonal is unknown and stored as 0.
    pub entries: Vec<Vec<f64>>,
    pub acf_zero: Option<f64>,
}

impl WeightMatrix {
    /// (C + Cᵀ)/2 — idempotent; the labeling of (i, j) and (j, i) can pick
    /// mirror atoms with unequal noisy weights, and the mean is the natural
    /// consistent estimate.
    pub fn symmetrized(&self) -> WeightMatrix {
        let k = self.entries.len();
        let entries = (0..k)
            .map(|i| (0..k).map(|j| 0.5 * (self.entries[i][j] + self.entries[j][i])).collect())
            .collect();
        WeightMatrix { entries, acf_zero: self.acf_zero }
    }
}

/// Labels every ordered support pair (i ≠ j) with the weight of the ACF atom
/// nearest to x̂ᵢ − x̂ⱼ and the origin with the atom nearest 0, then
/// symmetrizes. A nearest-atom distance beyond the matching tolerance —
/// 10·σ_hint, or 1e−6 when no noise scale is known — fails the labeling:
/// the support estimate does not explain the measured atom set.
pub fn assemble_weight_matrix(
    atoms: &AcfAtoms,
    support: &Support,
    sigma_hint: Option<f64>,
) -> Result<WeightMatrix> {
    let k = support.len();
    if atoms.dim != support.dim {
        return Err(Error::InvalidArgument(format!(
            "atoms are {}-dimensional, support is {}-dimensional",
            atoms.dim, support.dim
        )));
    }
    let expected = k * k - k + 1;
    if atoms.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{} atoms cannot label a {k}-point support (need {expected})",
            atoms.len()
        )));
    }
    let tol = match sigma_hint {
        Some(s) if s > 0.0 => 10.0 * s,
        _ => 1e-6,
    };
    let tol_sq = tol * tol;

    let weight_near = |target: &[f64]| -> Result<f64> {
        let mut best = (f64::INFINITY, 0.0);
        for atom in &atoms.atoms {
            let d2 = dist2_sq(target, &atom.location);
            if d2 < best.0 {
                best = (d2, atom.weight);
            }
        }
        if best.0 > tol_sq {
            return Err(Error::LabelingFailure(format!(
                "no atom within {tol:.3e} of a support difference (nearest at {:.3e})",
                best.0.sqrt()
            )));
        }
        Ok(best.1)
    };

    let mut entries = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                entries[i][j] = weight_near(&sub(&support.points[i], &support.points[j]))?;
            }
        }
    }
    let acf_zero = weight_near(&vec![0.0; support.dim])?;
    Ok(WeightMatrix { entries, acf_zero: Some(acf_zero) }.symmetrized())
}

/// Recovers the signal amplitudes from labeled products: the log-domain
/// closed form for K > 2, the quadratic system c₁c₂ = C₁,₂,
/// c₁² + c₂² = a₀ (returned with c₁ ≥ c₂) for K = 2.
pub fn recover_amplitudes(w: &WeightMatrix) -> Result<Amplitudes> {
    let k = w.entries.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need K ≥ 2 amplitudes, got {k}")));
    }
    if w.entries.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidArgument("weight matrix must be square".into()));
    }

    if k == 2 {
        let c12 = w.entries[0][1];
        if !(c12 > 0.0) {
            return Err(Error::Domain(format!(
                "off-diagonal product must be positive, got {c12}"
            )));
        }
        let a0 = w.acf_zero.ok_or_else(|| {
            Error::InvalidArgument("K = 2 recovery needs the origin weight Σ cᵢ²".into())
        })?;
        if a0 < 2.0 * c12 {
            return Err(Error::InconsistentMeasurement(format!(
                "origin weight {a0} is below 2·C₁,₂ = {} — no real amplitudes exist",
                2.0 * c12
            )));
        }
        // (c₁ + c₂)² = a₀ + 2C₁,₂ and (c₁ − c₂)² = a₀ − 2C₁,₂.
        let sum = (a0 + 2.0 * c12).sqrt();
        let diff = (a0 - 2.0 * c12).sqrt();
        return Amplitudes::new(vec![0.5 * (sum + diff), 0.5 * (sum - diff)]);
    }

    let mut log_rows = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let c = w.entries[i][j];
            if !(c > 0.0) {
                return Err(Error::Domain(format!(
                    "off-diagonal product C[{i}][{j}] = {c} is not positive; the log-domain \
                     method needs strictly positive amplitudes"
                )));
            }
            let l = c.ln();
            log_rows[i] += l;
            total += l;
        }
    }
    let mean_l = total / (2.0 * (k as f64 - 1.0));
    let values = log_rows
        .iter()
        .map(|row| ((row - mean_l) / (k as f64 - 2.0)).exp())
        .collect();
    Amplitudes::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_acf_atoms;
    use crate::seeding::rng_for;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn sup1(values: &[f64]) -> Support {
        Support::new(1, values.iter().map(|v| vec![*v]).collect()).unwrap()
    }

    fn exact_matrix(c: &[f64]) -> WeightMatrix {
        let k = c.len();
        let entries = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 0.0 } else { c[i] * c[j] }).collect())
            .collect();
        WeightMatrix { entries, acf_zero: Some(c.iter().map(|v| v * v).sum()) }
    }

    #[test]
    fn assembled_products_match_hand_case() {
        let support = sup1(&[0.0, 0.27, 0.9]);
        let c = Amplitudes::new(vec![1.0, 2.0, 3.0]).unwrap();
        let atoms = build_acf_atoms(&support, &c).unwrap();
        let w = assemble_weight_matrix(&atoms, &support, None).unwrap();
        let mut off: Vec<f64> = vec![w.entries[0][1], w.entries[0][2], w.entries[1][2]];
        off.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(off, vec![2.0, 3.0, 6.0]);
        assert_eq!(w.acf_zero, Some(14.0));
        for i in 0..3 {
            assert_eq!(w.entries[i][i], 0.0);
            for j in 0..3 {
                if i != j {
                    assert_relative_eq!(w.entries[i][j], c.values[i] * c.values[j]);
                }
            }
        }
    }

    #[test]
    fn assembly_fails_when_support_misses_the_atoms() {
        let support = sup1(&[0.0, 0.27, 0.9]);
        let atoms = build_acf_atoms(&support, &Amplitudes::unit(3)).unwrap();
        let shifted = sup1(&[0.0, 0.27 + 1e-3, 0.9]);
        assert!(matches!(
            assemble_weight_matrix(&atoms, &shifted, None),
            Err(Error::LabelingFailure(_))
        ));
        // The same misfit is inside tolerance once a matching noise scale is
        // declared.
        assert!(assemble_weight_matrix(&atoms, &shifted, Some(2e-4)).is_ok());
    }

    #[test]
    fn assembly_validates_cardinalities() {
        let support = sup1(&[0.0, 0.27, 0.9]);
        let atoms = build_acf_atoms(&support, &Amplitudes::unit(3)).unwrap();
        let four = sup1(&[0.0, 0.2, 0.5, 0.8]);
        assert!(matches!(
            assemble_weight_matrix(&atoms, &four, None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn recovers_hand_case_one_two_four() {
        // ℓ = [0, ln2, 2ln2]: s = 12·ln2, s/(2(K−1)) = 3·ln2, and the row
        // sums (K−2)ℓᵢ + Σℓ give back each ℓᵢ exactly.
        let w = exact_matrix(&[1.0, 2.0, 4.0]);
        let c = recover_amplitudes(&w).unwrap();
        assert_relative_eq!(c.values[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.values[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.values[2], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn recovers_equal_amplitudes() {
        let w = exact_matrix(&[0.7; 5]);
        let c = recover_amplitudes(&w).unwrap();
        for v in &c.values {
            assert_relative_eq!(*v, 0.7, max_relative = 1e-12);
        }
    }

    #[test]
    fn two_point_system_solves_by_hand() {
        let w = WeightMatrix {
            entries: vec![vec![0.0, 6.0], vec![6.0, 0.0]],
            acf_zero: Some(13.0),
        };
        let c = recover_amplitudes(&w).unwrap();
        assert_relative_eq!(c.values[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(c.values[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn two_point_boundary_gives_equal_amplitudes() {
        let w = WeightMatrix {
            entries: vec![vec![0.0, 4.0], vec![4.0, 0.0]],
            acf_zero: Some(8.0),
        };
        let c = recover_amplitudes(&w).unwrap();
        assert_relative_eq!(c.values[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.values[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn exact_recovery_across_cardinalities() {
        for k in 3..=12usize {
            let mut rng = rng_for(0xa2b1, &[k as u64]);
            let c: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..4.0)).collect();
            let rec = recover_amplitudes(&exact_matrix(&c)).unwrap();
            for (est, tru) in rec.values.iter().zip(&c) {
                assert!(
                    ((est - tru) / tru).abs() < 1e-10,
                    "K={k}: {est} vs {tru}"
                );
            }
        }
    }

    #[test]
    fn small_multiplicative_noise_stays_first_order() {
        let k = 6;
        let mut rng = rng_for(0xa2b2, &[]);
        let c: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
        let mut w = exact_matrix(&c);
        let eps = 1e-3;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    w.entries[i][j] *= 1.0 + rng.random_range(-eps..eps);
                }
            }
        }
        let rec = recover_amplitudes(&w.symmetrized()).unwrap();
        for (est, tru) in rec.values.iter().zip(&c) {
            assert!(
                ((est - tru) / tru).abs() <= 10.0 * eps,
                "{est} vs {tru} drifted more than 10×ε"
            );
        }
    }

    #[test]
    fn symmetrization_is_idempotent() {
        let mut w = exact_matrix(&[1.0, 2.0, 3.0, 4.0]);
        w.entries[0][1] *= 1.01;
        w.entries[2][3] *= 0.99;
        let once = w.symmetrized();
        let twice = once.symmetrized();
        assert_eq!(once, twice);
        assert_eq!(
            recover_amplitudes(&once).unwrap().values,
            recover_amplitudes(&twice).unwrap().values
        );
    }

    #[test]
    fn rejects_nonpositive_products() {
        let mut w = exact_matrix(&[1.0, 2.0, 3.0]);
        w.entries[0][1] = 0.0;
        w.entries[1][0] = 0.0;
        assert!(matches!(recover_amplitudes(&w), Err(Error::Domain(_))));
        let mut neg = exact_matrix(&[1.0, 2.0]);
        neg.entries[0][1] = -1.0;
        neg.entries[1][0] = -1.0;
        assert!(matches!(recover_amplitudes(&neg), Err(Error::Domain(_))));
    }

    #[test]
    fn two_point_error_cases() {
        let no_zero = WeightMatrix {
            entries: vec![vec![0.0, 6.0], vec![6.0, 0.0]],
            acf_zero: None,
        };
        assert!(matches!(recover_amplitudes(&no_zero), Err(Error::InvalidArgument(_))));
        let impossible = WeightMatrix {
            entries: vec![vec![0.0, 6.0], vec![6.0, 0.0]],
            acf_zero: Some(11.0),
        };
        assert!(matches!(
            recover_amplitudes(&impossible),
            Err(Error::InconsistentMeasurement(_))
        ));
        assert!(matches!(
            recover_amplitudes(&WeightMatrix { entries: vec![vec![0.0]], acf_zero: None }),
            Err(Error::InvalidArgument(_))
        ));
    }
}
