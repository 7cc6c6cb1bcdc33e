//! Spectral analysis of the Hodge Laplacian on warped-product balls
//! `dt² + g(t) dθ²` (in a general radial coordinate, `f(t) dt² + g(t) dθ²`).
//!
//! Separation over sphere eigenforms reduces the problem to scalar and 2×2
//! Sturm–Liouville operators on the half-line; this crate builds them,
//! checks the reduction, predicts their essential spectra from the warp
//! exponents, and measures them numerically.

pub mod arclength;
pub mod cli;
pub mod eigensolver;
pub mod error;
pub mod metric;
pub mod predictor;
pub mod quadrature;
pub mod reduction;
pub mod sphere_modes;
pub mod verifier;

pub use arclength::{arclength, ArclengthMap, RadialWarp};
pub use error::{Error, Result};
pub use metric::{build_profile, MetricProfile, WarpParams};
