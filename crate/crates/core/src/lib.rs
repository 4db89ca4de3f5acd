//! Accelerated iterative regularization for linear ill-posed problems.
//!
//! - [`linop`]: operators between weighted inner-product spaces.
//! - [`noise`]: the multiplicative uniform noise model.
//! - [`solvers`]: Störmer-Verlet, Landweber, ν-method and Nesterov iterations
//!   with discrepancy or a priori stopping.
//! - [`spectral`]: the continuous flow via Bessel functions.

pub mod error;
pub mod linop;
pub mod noise;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
