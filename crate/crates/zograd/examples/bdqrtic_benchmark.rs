//! One benchmark-style run: the banded quartic chain (d = 50) under absolute
//! noise, full central differences, a step size small enough for its ~1e4
//! curvature. Writes the trace CSV that `aggregate` and external plotting
//! consume.

use zograd::problems::{make_nlls, NoiseModel};
use zograd::{run, Method, RunConfig};

fn main() {
    let problem = make_nlls("bdqrtic", NoiseModel::Abs, 1e-3).expect("registered problem");
    let mut config = RunConfig::new(Method::Cfd, 50, 1e-3, 1e-4, 200_000);
    config.seed = 3;
    let trace = run(problem.as_ref(), &config).expect("valid config");

    let first = trace.records.first().unwrap();
    let last = trace.records.last().unwrap();
    println!("bdqrtic, absolute noise sigma = 1e-3, cfd, alpha = {}", config.alpha);
    println!("iterations      {}", trace.records.len());
    println!("evaluations     {}", last.cum_evals);
    println!("initial gap     {:.6e}", first.gap);
    println!("final gap       {:.6e}", last.gap);
    println!("gap reduction   {:.1}x", first.gap / last.gap);

    let out = "bdqrtic_trace.csv";
    trace.write_csv(out).expect("writable working directory");
    println!("trace written to {out}");
}
