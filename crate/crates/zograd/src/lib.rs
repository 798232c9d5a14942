//! zograd: derivative-free stochastic optimization via central finite
//! differences with adaptive sampling.

pub mod adaptive;
pub mod cli;
pub mod directions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod problems;
pub mod rng;
pub mod trace;
pub mod validate;

pub use adaptive::{grow_samples, norm_test, NormTestResult};
pub use directions::{sample_directions, DirectionSet, Method};
pub use error::{Error, Result};
pub use estimators::{bias_bound, estimate_gradient, extend_estimate, GradientEstimate};
pub use optimizer::{reference_step_size, run, RunConfig};
pub use problems::{NoiseModel, StochasticProblem, Zeta};
pub use trace::{IterRecord, RunStatus, RunTrace, TraceHeader};
