//! The full tuning protocol in miniature: grid over (N, nu, alpha), three
//! tuning seeds scored by their *worst* final gap, 17 more seeds of the
//! winner, quantile aggregation of all 20 traces.

use zograd::harness::{aggregate, final_runs, tune, TuningSpec};
use zograd::problems::make_stochastic_quadratic;
use zograd::Method;

fn main() {
    let problem = make_stochastic_quadratic(6, 0.2);
    let method = Method::Crc;
    let spec = TuningSpec {
        num_dirs: vec![2, 6],
        nus: vec![1e-2],
        alphas: vec![1.0, 0.3, 1e-3],
        theta: 0.9,
        s0: 2,
        budget: 6_000,
        sample_cap: 1_000_000,
        master_seed: 11,
    };

    let outcome = tune(&problem, method, &spec).expect("valid grid");
    println!("grid scores (worst final gap over 3 seeds):");
    for (point, score) in &outcome.scores {
        println!(
            "  N={} nu={:.0e} alpha={:<5.0e} -> {score:.4e}",
            point.num_dirs, point.nu, point.alpha
        );
    }
    println!(
        "best: N={} nu={:.0e} alpha={:.0e}\n",
        outcome.best.num_dirs, outcome.best.nu, outcome.best.alpha
    );

    let traces = final_runs(&problem, method, &outcome, &spec).expect("runs");
    let summary = aggregate(&traces).expect("uniform configs");
    println!("quantile summary over {} runs (every 40th checkpoint):", summary.n_runs);
    println!(
        "{:>9}  {:>12} {:>12} {:>12}  {:>9}",
        "evals", "gap q35", "gap median", "gap q65", "batch med"
    );
    for row in summary.rows.iter().step_by(40) {
        println!(
            "{:>9}  {:>12.4e} {:>12.4e} {:>12.4e}  {:>9.1}",
            row.cum_evals, row.gap_q35, row.gap_med, row.gap_q65, row.batch_med
        );
    }
}
