//! Scalar kernels shared by the rest of the crate.

mod brent;
mod lambert;
mod normal;
mod sampling;

pub use brent::{brent_root, Bracket, DEFAULT_TOL};
pub use lambert::{lambert_w, WBranch};
pub use normal::normal_cdf;
pub use sampling::gaussian_samples;
