//! Curvature of coordinate-chart metrics computed with second-order jets, and
//! pointwise verification of Einstein warped products `B ×_f F`.
//!
//! Layering, bottom up:
//!
//! - [`jets`]: value/gradient/Hessian arithmetic.
//! - [`geometry`]: Christoffel symbols, Ricci tensor, Hessian, gradient norm
//!   and Laplacian for a single chart metric.
//! - [`warped`]: product-metric assembly and the block (O'Neill) Ricci formulas.
//! - [`models`]: hyperbolic space, space forms and the explicit warping family
//!   on the upper half-space.
//! - [`verify`]: Einstein residuals and the warped-product condition checks.
//! - [`scenario`], [`expr`], [`report`]: the scenario-file driven front end
//!   behind the `warpcheck` binary.

pub mod error;
pub mod expr;
pub mod geometry;
pub mod jets;
pub mod models;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod verify;
pub mod warped;

pub use error::{Error, Result};
pub use geometry::{CurvatureAtPoint, MetricField, ScalarField};
pub use jets::Jet2;
