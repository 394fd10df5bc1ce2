//! Scratch probe for the K=5 / 200-coefficient geometry.

use num_complex::Complex64;
use rand::Rng;
use spr_core::amplitude::{assemble_weight_matrix, recover_amplitudes};
use spr_core::flip::{charge_flip, extract_support_from_grid, FlipConfig};
use spr_core::fri::superresolve_acf;
use spr_core::metrics::l2_error_aligned;
use spr_core::model::{
    acf_fourier_samples, build_acf_atoms, Amplitudes, DifferenceSet, KernelDescriptor, Support,
};
use spr_core::seeding::rng_for;
use spr_core::turnpike::{recover_support, RecoveryConfig};

const K: usize = 5;
const OMEGA: f64 = std::f64::consts::PI;
const M_MAX: usize = 99;
const EXTENT: f64 = 0.9;

fn draw_instance(seed: u64, gmin_acf: f64, gmin_sup: f64) -> (Support, Amplitudes, u32) {
    let mut rng = rng_for(seed, &[]);
    let mut attempts = 0u32;
    loop {
        attempts += 1;
        let mut pts: Vec<f64> = (0..K).map(|_| rng.random_range(0.0..1.0)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = pts[0];
        let span = pts[K - 1] - pts[0];
        if span < 1e-6 {
            continue;
        }
        let mut pts: Vec<f64> = pts
            .iter()
            .map(|p| (p - lo) / span * EXTENT + rng.random_range(0.0..0.01))
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sup_gap = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if sup_gap < gmin_sup {
            continue;
        }
        // ACF atom separation
        let mut atoms = vec![0.0];
        for i in 0..K {
            for j in 0..K {
                if i != j {
                    atoms.push(pts[i] - pts[j]);
                }
            }
        }
        atoms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let acf_gap = atoms.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if acf_gap < gmin_acf {
            continue;
        }
        let amps: Vec<f64> = (0..K).map(|_| rng.random_range(0.5..2.0)).collect();
        let support = Support::new(1, pts.iter().map(|p| vec![*p]).collect()).unwrap();
        return (support, Amplitudes::new(amps).unwrap(), attempts);
    }
}

fn amp_error(truth_sup: &Support, truth_amp: &Amplitudes, est_sup: &Support, est_amp: &Amplitudes) -> f64 {
    // sort both by location; try both orientations for the estimate
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

fn field_coefficient(support: &Support, amps: &Amplitudes, m: f64) -> Complex64 {
    support
        .points
        .iter()
        .zip(&amps.values)
        .map(|(p, c)| Complex64::from_polar(*c, -OMEGA * m * p[0]))
        .sum()
}

fn unwrap_circular(mut pos: Vec<f64>, period: f64) -> Vec<f64> {
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = pos.len();
    let mut max_gap = pos[0] + period - pos[k - 1];
    let mut cut = 0; // sequence starts at index `cut`
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
            if idx < cut { pos[idx] + period } else { pos[idx] }
        })
        .collect()
}

fn cf_trial(seed: u64, b: f64, decay: f64, max_iters: usize) -> f64 {
    let grid = 200usize;
    let period = 2.0f64;
    let (sup, _, _) = draw_instance(seed, 0.008, 0.015);
    let amp = Amplitudes::unit(K);
    let mut mags = vec![0.0f64; grid];
    for m in 0..=(grid / 2 - 1) {
        let v = field_coefficient(&sup, &amp, m as f64).norm();
        mags[m] = v;
        if m > 0 {
            mags[grid - m] = v;
        }
    }
    let cfg = FlipConfig {
        grid_size: grid,
        b,
        delta_decay: decay,
        max_iters,
        restarts: 10,
        seed: 7_000 + seed,
    };
    let rec = charge_flip(&mags, &cfg).unwrap();
    let est = extract_support_from_grid(&rec, K).unwrap();
    let pos: Vec<f64> = est.points.iter().map(|p| p[0] * period).collect();
    let unwrapped = unwrap_circular(pos, period);
    let est_sup = Support::new(1, unwrapped.into_iter().map(|p| vec![p]).collect()).unwrap();
    l2_error_aligned(&sup, &est_sup).unwrap().sqrt()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("fri");

    if mode == "ls" {
        let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(64);
        let (sup, amp, _) = draw_instance(seed, 0.010, 0.015);
        let atoms = build_acf_atoms(&sup, &amp).unwrap();
        let kernel = KernelDescriptor::covering(OMEGA, M_MAX);
        let samples = acf_fourier_samples(&atoms, &kernel, OMEGA, M_MAX).unwrap();
        let true_locs: Vec<f64> = atoms.atoms.iter().map(|a| a.location[0]).collect();
        let true_w: Vec<f64> = atoms.atoms.iter().map(|a| a.weight).collect();
        let est_w = spr_core::fri::estimate_atom_weights(&true_locs, &samples).unwrap();
        let max_rel = true_w
            .iter()
            .zip(&est_w)
            .map(|(t, e)| ((t - e) / t).abs())
            .fold(0.0f64, f64::max);
        println!("estimate_atom_weights on TRUE locations: max rel weight err {max_rel:.3e}");

        // conditioning + residuals by hand
        use nalgebra::{DMatrix, DVector};
        let m_in = 99i64;
        let rows = (2 * m_in + 1) as usize;
        let v = DMatrix::<Complex64>::from_fn(rows, true_locs.len(), |r, c| {
            let m = r as i64 - m_in;
            Complex64::new(0.0, -(m as f64) * OMEGA * true_locs[c]).exp()
        });
        let b = DVector::<Complex64>::from_fn(rows, |r, _| samples.value(r as i64 - m_in));
        let wt = DVector::<Complex64>::from_iterator(
            true_w.len(),
            true_w.iter().map(|w| Complex64::new(*w, 0.0)),
        );
        let we = DVector::<Complex64>::from_iterator(
            est_w.len(),
            est_w.iter().map(|w| Complex64::new(*w, 0.0)),
        );
        let r_true = (&v * &wt - &b).norm() / b.norm();
        let r_est = (&v * &we - &b).norm() / b.norm();
        let svd = v.clone().svd(false, false);
        let (mut smin, mut smax) = (f64::INFINITY, 0.0f64);
        for s in svd.singular_values.iter() {
            smin = smin.min(*s);
            smax = smax.max(*s);
        }
        println!("cond(V) = {:.3e}   r_true {r_true:.3e}   r_est {r_est:.3e}", smax / smin);

        // same system, columns in ascending-location order
        let mut asc = true_locs.clone();
        asc.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let va = DMatrix::<Complex64>::from_fn(rows, asc.len(), |r, c| {
            let m = r as i64 - m_in;
            Complex64::new(0.0, -(m as f64) * OMEGA * asc[c]).exp()
        });
        let mut tw_asc: Vec<(f64, f64)> =
            atoms.atoms.iter().map(|a| (a.location[0], a.weight)).collect();
        tw_asc.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

        let svd_a = va.clone().svd(true, true);
        let x_svd = svd_a.solve(&b, 0.0).unwrap();
        let r_svd = (&va * &x_svd - &b).norm() / b.norm();
        let err_svd = tw_asc
            .iter()
            .zip(x_svd.iter())
            .map(|((_, t), e)| ((t - e.re) / t).abs())
            .fold(0.0f64, f64::max);

        let qr = va.clone().qr();
        // least squares via QR: R x = Q^H b
        let qtb = qr.q().adjoint() * &b;
        let x_qr = qr.r().solve_upper_triangular(&qtb).unwrap();
        let r_qr = (&va * &x_qr - &b).norm() / b.norm();
        let err_qr = tw_asc
            .iter()
            .zip(x_qr.iter())
            .map(|((_, t), e)| ((t - e.re) / t).abs())
            .fold(0.0f64, f64::max);

        println!("ascending-order SVD solve: max rel err {err_svd:.3e}  residual {r_svd:.3e}");
        println!("ascending-order QR  solve: max rel err {err_qr:.3e}  residual {r_qr:.3e}");
        return;
    }

    if mode == "steps" {
        let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(64);
        let (sup, amp, _) = draw_instance(seed, 0.010, 0.015);
        let atoms = build_acf_atoms(&sup, &amp).unwrap();
        let kernel = KernelDescriptor::covering(OMEGA, M_MAX);
        let samples = acf_fourier_samples(&atoms, &kernel, OMEGA, M_MAX).unwrap();
        let filter = spr_core::fri::fit_annihilating_filter(&samples, K * K - K + 1).unwrap();
        println!("annihilation residual: {:.3e}", spr_core::fri::annihilation_residual(&samples, &filter));
        let roots = spr_core::fri::filter_roots(&filter).unwrap();
        let locs = spr_core::fri::roots_to_locations(&roots, OMEGA).unwrap();
        let mut true_locs: Vec<f64> = atoms.atoms.iter().map(|a| a.location[0]).collect();
        true_locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_dloc = locs
            .iter()
            .zip(&true_locs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!("max |root loc − true loc| = {max_dloc:.3e}");
        let w_pre = spr_core::fri::estimate_atom_weights(&locs, &samples).unwrap();
        // true weights in ascending-location order
        let mut tw: Vec<(f64, f64)> =
            atoms.atoms.iter().map(|a| (a.location[0], a.weight)).collect();
        tw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let max_rel_pre = tw
            .iter()
            .zip(&w_pre)
            .map(|((_, t), e)| ((t - e) / t).abs())
            .fold(0.0f64, f64::max);
        println!("pre-averaging max rel weight err: {max_rel_pre:.3e}");
        return;
    }

    if mode == "atoms" {
        let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(64);
        let (sup, amp, _) = draw_instance(seed, 0.010, 0.015);
        let atoms = build_acf_atoms(&sup, &amp).unwrap();
        let kernel = KernelDescriptor::covering(OMEGA, M_MAX);
        let samples = acf_fourier_samples(&atoms, &kernel, OMEGA, M_MAX).unwrap();
        let est_atoms = superresolve_acf(&samples, K).unwrap();
        // both sorted by norm-lex already; pair index-wise
        println!("idx   true_loc       est_loc        dloc        true_w     est_w      rel_dw");
        for (i, (t, e)) in atoms.atoms.iter().zip(est_atoms.atoms.iter()).enumerate() {
            let dloc = (t.location[0] - e.location[0]).abs();
            let dw = ((t.weight - e.weight) / t.weight).abs();
            println!(
                "{i:3}  {:+.9}  {:+.9}  {dloc:.3e}  {:.6}  {:.6}  {dw:.3e}",
                t.location[0], e.location[0], t.weight, e.weight
            );
        }
        return;
    }

    if mode == "cftune" {
        for (b, decay, iters) in [
            (1.1, 0.99, 5000usize),
            (1.0, 0.99, 5000),
            (1.1, 0.995, 10000),
            (1.1, 1.0, 5000),
            (1.2, 0.985, 5000),
        ] {
            let errs: Vec<f64> = (0..48u64).map(|s| cf_trial(s, b, decay, iters)).collect();
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            let max = errs.iter().cloned().fold(0.0f64, f64::max);
            let bad: Vec<usize> =
                (0..48).filter(|i| errs[*i] > 0.02).collect();
            for s in &bad {
                let (sup, _, _) = draw_instance(*s as u64, 0.008, 0.015);
                let gaps: Vec<f64> =
                    sup.points.windows(2).map(|w| w[1][0] - w[0][0]).collect();
                let ming = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
                println!("  bad seed {s}: err {:.4} min_sup_gap {ming:.4}", errs[*s]);
            }
            println!("b {b} decay {decay} iters {iters}: mean {mean:.5} max {max:.5} bad {}", bad.len());
        }
        return;
    }

    if mode == "fridiag" {
        let gmin = 0.010;
        let mut rows: Vec<(f64, u64, f64, f64)> = Vec::new();
        for seed in 0..200u64 {
            let (sup, amp, _) = draw_instance(seed, gmin, 0.015);
            let atoms = build_acf_atoms(&sup, &amp).unwrap();
            let kernel = KernelDescriptor::covering(OMEGA, M_MAX);
            let samples = acf_fourier_samples(&atoms, &kernel, OMEGA, M_MAX).unwrap();
            let est_atoms = superresolve_acf(&samples, K).unwrap();
            let diffs = DifferenceSet::from_atoms(&est_atoms).unwrap();
            let cfg = RecoveryConfig {
                prune_differences: true,
                symmetric_cost: true,
                denoise_partials: true,
                ..RecoveryConfig::default()
            };
            let est_sup = recover_support(&diffs, K, cfg, 1).unwrap();
            let w = assemble_weight_matrix(&est_atoms, &est_sup, None).unwrap();
            let est_amp = recover_amplitudes(&w).unwrap();
            let a_err = amp_error(&sup, &amp, &est_sup, &est_amp);
            let s_err = l2_error_aligned(&sup, &est_sup).unwrap().sqrt();
            let min_amp = amp.values.iter().cloned().fold(f64::INFINITY, f64::min);
            rows.push((a_err, seed, s_err, min_amp));
        }
        rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for (a_err, seed, s_err, min_amp) in rows.iter().take(6) {
            let (sup, _, _) = draw_instance(*seed, gmin, 0.015);
            let pts: Vec<f64> = sup.points.iter().map(|p| p[0]).collect();
            let mut acf: Vec<f64> = Vec::new();
            for i in 0..K {
                for j in 0..K {
                    if i != j {
                        acf.push(pts[i] - pts[j]);
                    }
                }
            }
            acf.push(0.0);
            acf.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let acf_gap =
                acf.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            println!(
                "seed {seed}: amp_err {a_err:.2e} sup_err {s_err:.2e} min_amp {min_amp:.2} acf_gap {acf_gap:.4}"
            );
        }
        return;
    }

    if mode == "fri" {
        for gmin in [0.004f64, 0.006, 0.008, 0.010] {
            let mut worst_sup = 0.0f64;
            let mut worst_amp = 0.0f64;
            let mut fails = 0;
            let mut total_attempts = 0u32;
            let n = 200u64;
            for seed in 0..n {
                let (sup, amp, att) = draw_instance(seed, gmin, 0.015);
                total_attempts += att;
                let atoms = build_acf_atoms(&sup, &amp).unwrap();
                let kernel = KernelDescriptor::covering(OMEGA, M_MAX);
                let samples = acf_fourier_samples(&atoms, &kernel, OMEGA, M_MAX).unwrap();
                let est_atoms = match superresolve_acf(&samples, K) {
                    Ok(a) => a,
                    Err(e) => {
                        fails += 1;
                        eprintln!("seed {seed}: superresolve {e}");
                        continue;
                    }
                };
                let diffs = DifferenceSet::from_atoms(&est_atoms).unwrap();
                let cfg = RecoveryConfig {
                    prune_differences: true,
                    symmetric_cost: true,
                    denoise_partials: true,
                    ..RecoveryConfig::default()
                };
                let est_sup = match recover_support(&diffs, K, cfg, 1) {
                    Ok(s) => s,
                    Err(e) => {
                        fails += 1;
                        eprintln!("seed {seed}: recover {e}");
                        continue;
                    }
                };
                let sup_err = l2_error_aligned(&sup, &est_sup).unwrap().sqrt();
                let w = match assemble_weight_matrix(&est_atoms, &est_sup, None) {
                    Ok(w) => w,
                    Err(e) => {
                        fails += 1;
                        eprintln!("seed {seed}: assemble {e} (sup_err {sup_err:.2e})");
                        continue;
                    }
                };
                let est_amp = match recover_amplitudes(&w) {
                    Ok(a) => a,
                    Err(e) => {
                        fails += 1;
                        eprintln!("seed {seed}: amplitudes {e}");
                        continue;
                    }
                };
                let a_err = amp_error(&sup, &amp, &est_sup, &est_amp);
                worst_sup = worst_sup.max(sup_err);
                worst_amp = worst_amp.max(a_err);
            }
            println!(
                "gmin_acf {gmin:.3}: worst_sup {worst_sup:.3e} worst_amp {worst_amp:.3e} fails {fails}/{n} avg_attempts {:.2}",
                total_attempts as f64 / n as f64
            );
        }
    }

    if mode == "cf" {
        let grid = 200usize;
        let period = 2.0f64;
        let mut errs = Vec::new();
        for seed in 0..48u64 {
            let (sup, _, _) = draw_instance(seed, 0.008, 0.015);
            let amp = Amplitudes::unit(K);
            let mut mags = vec![0.0f64; grid];
            for m in 0..=(grid / 2 - 1) {
                let v = field_coefficient(&sup, &amp, m as f64).norm();
                mags[m] = v;
                if m > 0 {
                    mags[grid - m] = v;
                }
            }
            let cfg = FlipConfig {
                grid_size: grid,
                restarts: 10,
                seed: 7_000 + seed,
                ..FlipConfig::default()
            };
            let rec = charge_flip(&mags, &cfg).unwrap();
            let est = extract_support_from_grid(&rec, K).unwrap();
            let pos: Vec<f64> = est.points.iter().map(|p| p[0] * period).collect();
            let unwrapped = unwrap_circular(pos, period);
            let est_sup = Support::new(1, unwrapped.into_iter().map(|p| vec![p]).collect()).unwrap();
            let err = l2_error_aligned(&sup, &est_sup).unwrap().sqrt();
            errs.push(err);
        }
        for (seed, err) in errs.iter().enumerate() {
            if *err > 0.02 {
                let (sup, _, _) = draw_instance(seed as u64, 0.008, 0.015);
                let truth_cells: Vec<f64> =
                    sup.points.iter().map(|p| p[0] * 100.0).collect();
                let mut mags = vec![0.0f64; grid];
                let amp = Amplitudes::unit(K);
                for m in 0..=(grid / 2 - 1) {
                    let v = field_coefficient(&sup, &amp, m as f64).norm();
                    mags[m] = v;
                    if m > 0 {
                        mags[grid - m] = v;
                    }
                }
                let cfg = FlipConfig {
                    grid_size: grid,
                    restarts: 10,
                    seed: 7_000 + seed as u64,
                    ..FlipConfig::default()
                };
                let rec = charge_flip(&mags, &cfg).unwrap();
                let mut order: Vec<usize> = (0..grid).collect();
                order.sort_by(|a, b| rec[*b].abs().partial_cmp(&rec[*a].abs()).unwrap());
                let top: Vec<(usize, f64)> =
                    order[..8].iter().map(|i| (*i, rec[*i])).collect();
                println!("seed {seed} err {err:.4}: truth cells {truth_cells:.1?} top {top:.3?}");
            }
        }
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let mut sorted = errs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "CF noiseless: mean {mean:.5} median {:.5} p90 {:.5} max {:.5}",
            sorted[sorted.len() / 2],
            sorted[sorted.len() * 9 / 10],
            sorted[sorted.len() - 1]
        );
    }
}
