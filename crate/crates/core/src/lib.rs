//! Curvature of convex combinations of Riemannian metrics.
//!
//! Everything here works on a single coordinate chart. Metrics are smooth
//! matrix-valued closures, derivatives are taken with central finite
//! differences, and every closed-form curvature identity has a brute-force
//! route next to it so the two can be compared numerically.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the expression
//! language and the command line live in `blendcurv-cli`.
//!
//! Module map:
//!
//! - [`chart`], [`stencil`], [`metric`], [`calculus`]: coordinates, finite
//!   differences, Christoffel symbols, Riemann tensor, sectional curvature.
//! - [`blend`]: the tensor `P`, the connection difference, the closed-form
//!   curvature of `(1-t) g0 + t g1` and its Taylor coefficients in `t`.
//! - [`graph`]: the diagonal immersion into the product manifold and its
//!   second fundamental form.
//! - [`foliation`]: vertical/horizontal splitting, O'Neill tensor, leaf shape
//!   operator.
//! - [`deformations`]: conformal change, canonical variation, vertical
//!   warping and Cheeger deformation.
//! - [`torus`]: flat tori, periodic quadrature and the variation verdicts.
//! - [`catalog`]: built-in geometries.
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blend;
pub mod calculus;
pub mod catalog;
pub mod chart;
pub mod deformations;
pub mod error;
pub mod foliation;
pub mod graph;
pub mod linalg;
pub mod metric;
pub mod stencil;
pub mod torus;

mod math;

pub use blend::{BlendPath, ConnectionDiff, PTensor};
pub use chart::{Chart, Point, TangentVector};
pub use error::{GeomError, Result};
pub use linalg::Matrix;
pub use metric::{MetricField, ScalarField, VectorField};
pub use stencil::DerivativeStencil;
