//! Scratch rehearsal of the ablation acceptance setup (pilot + paired run).

use std::time::Instant;

use spr_cli::config::{ExperimentId, ExperimentSpec};
use spr_cli::experiments::{self, ablation};

fn main() -> anyhow::Result<()> {
    let t0 = Instant::now();
    let sigma = ablation::pilot_sigma_for_half_success(6, 200, 602)?;
    println!("pilot sigma* = {sigma:.6e}  ({:.1?})", t0.elapsed());

    for (trials, factor) in [(3000usize, 1.0f64), (3000, 0.74), (3000, 1.35)] {
        let s = sigma * factor;
        let t1 = Instant::now();
        let spec = ExperimentSpec {
            sigma_grid: vec![s],
            trials,
            ..ExperimentSpec::default_for(ExperimentId::Ablation)
        };
        let run = experiments::run(&spec)?;
        println!("\nsigma {s:.4e} trials {trials}  ({:.1?})", t1.elapsed());

        let mean = |row: usize| run.table.cell_f64(row, "mean_l2_error");
        let idx = |row: usize| run.table.cell_f64(row, "mean_index_error");
        for row in 0..8 {
            println!(
                "  {:>24}  mean_l2 {:.6e}  idx {:.4}",
                run.table.cell(row, "config"),
                mean(row),
                idx(row)
            );
        }
        let (base, prune, ps, all3) = (mean(0), mean(1), mean(3), mean(7));
        println!(
            "  orderings: {} {} {}   reduction {:.3}",
            prune < base,
            ps < prune,
            all3 <= ps,
            (base - all3) / base
        );
    }
    Ok(())
}
