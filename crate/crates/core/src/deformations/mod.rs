//! Metric deformations and their connection and variation formulas.
//!
//! - [`conformal`]: `g1 = e^{2h} g0`.
//! - [`vertical`]: rescaling the vertical block of a foliation, by a
//!   constant (canonical variation) or by a basic function (warping).
//! - [`cheeger`]: Cheeger deformations along an isometric group action.

pub mod cheeger;
pub mod conformal;
pub mod vertical;

pub use cheeger::{
    cheeger_koszul_convergence, cheeger_limit_condition, cheeger_limit_extrapolated, cheeger_metric, orbit_tensor,
    GroupAction, OrbitTensor,
};
pub use conformal::{conformal_metric, conformal_variation_integrand, ConformalIntegrand};
pub use vertical::{
    canonical_connection_check, canonical_variation_metric, warped_metric, warping_connection_check,
    warping_variation_integrand, WarpingIntegrand,
};
