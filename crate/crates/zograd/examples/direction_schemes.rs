//! Samples each direction scheme once and prints what the estimator will
//! actually see: the vectors, their scaling coefficient gamma, and how much
//! of the space N = 3 directions cover in dimension 8.

use zograd::rng::{stream_rng, STREAM_DIRECTIONS};
use zograd::{sample_directions, Method};

fn main() {
    let (d, n) = (8, 3);
    let mut rng = stream_rng(7, STREAM_DIRECTIONS);
    for method in Method::ALL {
        let dirs = sample_directions(method, d, n, &mut rng).expect("valid geometry");
        println!(
            "{method}: {} directions, gamma = {:.4}",
            dirs.num_dirs(),
            dirs.gamma
        );
        for v in dirs.vectors.iter().take(3) {
            let row: Vec<String> = v.iter().map(|c| format!("{c:+.3}")).collect();
            println!("    [{}]", row.join(", "));
        }
        if dirs.num_dirs() > 3 {
            println!("    ... {} more", dirs.num_dirs() - 3);
        }
        // mutual angles: canonical and subset schemes are exactly orthonormal,
        // Gaussian/sphere directions are only orthogonal in expectation
        let mut worst = 0.0f64;
        for i in 0..dirs.num_dirs() {
            for j in 0..i {
                let dot: f64 = dirs.vectors[i]
                    .iter()
                    .zip(&dirs.vectors[j])
                    .map(|(a, b)| a * b)
                    .sum();
                worst = worst.max(dot.abs());
            }
        }
        println!("    worst |<u_i, u_j>| = {worst:.3e}\n");
    }
}
