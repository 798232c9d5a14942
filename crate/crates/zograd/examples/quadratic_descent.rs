//! A full adaptive run on the stochastic quadratic, stepped with the
//! reference step size from the convergence analysis. Prints a thinned trace:
//! gap falling geometrically until the batch cap turns growth off, then
//! hovering at the noise floor of that cap.

use zograd::problems::make_stochastic_quadratic;
use zograd::{reference_step_size, run, Method, RunConfig};

fn main() {
    let d = 10;
    let problem = make_stochastic_quadratic(d, 0.1);
    let theta = 0.9;
    let config = RunConfig {
        method: Method::Cfd,
        num_dirs: d,
        nu: 1e-3,
        alpha: reference_step_size(Method::Cfd, d, d, theta, 1.0),
        theta,
        s0: 2,
        budget: u64::MAX / 4,
        seed: 12,
        sample_cap: 2_000,
        x0: None,
        max_iters: Some(120),
    };
    println!("alpha = {:.5} (reference step size at theta = {theta}, L = 1)\n", config.alpha);

    let trace = run(&problem, &config).expect("valid config");
    println!("{:>5}  {:>10}  {:>12}  {:>7}  {:>12}", "iter", "evals", "gap", "batch", "||g||");
    for r in trace.records.iter().step_by(10) {
        println!(
            "{:>5}  {:>10}  {:>12.4e}  {:>7}  {:>12.4e}",
            r.iter, r.cum_evals, r.gap, r.batch_size, r.grad_norm
        );
    }
    let last = trace.records.last().unwrap();
    println!("\nfinal gap {:.3e} after {} evaluations", last.gap, last.cum_evals);
}
