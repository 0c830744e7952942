//! Independent reference computations.
//!
//! Each oracle recomputes a quantity from its mathematical definition with
//! its own code path: dense matrices instead of the two-loop recursion,
//! naive loops instead of pairwise reductions, straight-line residual
//! transcriptions instead of the library's problem definitions. Only
//! primitive arithmetic is shared with `zoqn`.

pub mod dense;
pub mod montecarlo;
pub mod stats;
pub mod transcriptions;

pub use dense::{dense_h, dense_h_from_memory};
pub use montecarlo::{monte_carlo_mean, MeanEstimate};
pub use stats::{
    brute_force_ipqn_variance, brute_force_norm_variance, brute_force_test, central_difference_gradient,
    forward_difference_gradient, naive_mean,
};
