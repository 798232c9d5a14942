//! The norm test and one-shot growth on a noisy quadratic: as the iterate
//! approaches the optimum the signal shrinks while the noise does not, so the
//! required batch size climbs.

use zograd::problems::make_stochastic_quadratic;
use zograd::rng::{stream_rng, STREAM_DIRECTIONS, STREAM_REALIZATIONS};
use zograd::{estimate_gradient, grow_samples, norm_test, sample_directions, Method, StochasticProblem};

fn main() {
    let d = 10;
    let problem = make_stochastic_quadratic(d, 0.1);
    let dirs = sample_directions(Method::Cfd, d, d, &mut stream_rng(0, STREAM_DIRECTIONS))
        .expect("canonical directions");
    let mut rng = stream_rng(1, STREAM_REALIZATIONS);
    let theta = 0.9;

    println!(
        "{:>8}  {:>10}  {:>10}  {:>6}  {:>8}  {:>8}",
        "||x||", "var/|S|", "thr", "pass", "required", "grown to"
    );
    for scale in [1.0, 0.3, 0.1, 0.03, 0.01] {
        let x = vec![scale; d];
        let zetas: Vec<_> = (0..2).map(|_| problem.draw_zeta(&mut rng)).collect();
        let est = estimate_gradient(&problem, &x, &dirs, &zetas, 1e-2).expect("oracle");
        let test = norm_test(&est, theta).expect("two samples");
        let grown = grow_samples(est, &test, &problem, &x, &dirs, 1e-2, &mut rng, 10_000)
            .expect("growth");
        println!(
            "{:>8.3}  {:>10.3e}  {:>10.3e}  {:>6}  {:>8}  {:>8}",
            (scale * scale * d as f64).sqrt(),
            test.lhs,
            test.rhs,
            test.passed,
            test.required_size,
            grown.estimate.num_samples(),
        );
    }
    println!("\nstarting from |S| = 2 each time; in the optimizer the grown size carries over");
}
