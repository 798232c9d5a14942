//! Regularized logistic regression from a LIBSVM-format file, optimized with
//! Gaussian directions and index-sampling realizations. The data here is a
//! small synthetic two-class problem written to a temp file; point `path` at
//! a real download (a1a, mushroom, ...) for the real thing.

use std::fmt::Write as _;

use zograd::problems::{make_logreg, LogRegOptions, StochasticProblem};
use zograd::rng::{stream_rng, STREAM_GENERAL};
use zograd::{run, Method, RunConfig};

use rand::Rng;
use rand_distr::StandardNormal;

fn main() {
    // two Gaussian blobs in 8 features, sparsified: label +1 centered at +mu,
    // label -1 at -mu, ~60% of the coordinates stored per record
    let (n_data, d) = (120usize, 8);
    let mut rng = stream_rng(5, STREAM_GENERAL);
    let mut text = String::new();
    for i in 0..n_data {
        let z: f64 = if i % 2 == 0 { 1.0 } else { -1.0 };
        write!(text, "{}", z as i64).unwrap();
        for j in 0..d {
            if rng.random::<f64>() < 0.6 {
                let v = 0.4 * z + 0.8 * rng.sample::<f64, _>(StandardNormal);
                write!(text, " {}:{v:.4}", j + 1).unwrap();
            }
        }
        text.push('\n');
    }
    let path = std::env::temp_dir().join("zograd_logreg_example.libsvm");
    std::fs::write(&path, text).expect("writable temp dir");

    let problem = make_logreg(&path, LogRegOptions::default()).expect("parse + reference solve");
    let info = problem.info();
    println!(
        "{} records, d = {}, lambda = 1/{n_data}, F* = {:.8}",
        n_data,
        info.dim,
        problem.f_star()
    );
    println!("F(0) = {:.8} (= ln 2)\n", problem.f_exact(&problem.x0()));

    let config = RunConfig {
        method: Method::Cgs,
        num_dirs: 4,
        nu: 1e-3,
        alpha: 0.5,
        theta: 0.9,
        s0: n_data.div_ceil(10),
        budget: 300_000,
        seed: 1,
        sample_cap: n_data,
        x0: None,
        max_iters: None,
    };
    let trace = run(&problem, &config).expect("valid config");
    println!("{:>5}  {:>9}  {:>12}  {:>6}", "iter", "evals", "gap", "batch");
    for r in trace.records.iter().step_by(trace.records.len().div_ceil(12)) {
        println!("{:>5}  {:>9}  {:>12.5e}  {:>6}", r.iter, r.cum_evals, r.gap, r.batch_size);
    }
    println!("\nfinal gap {:.4e}", trace.final_gap());
}
