//! Conformal change `g1 = e^{2h} g0`.
//!
//! `D(X, Y) = dh(X) Y + dh(Y) X − g0(X, Y) ∇⁰h`. For a `g0`-orthonormal
//! pair spanning a plane `T`,
//! `g0(D_XX, D_YY) − |D_XY|² = −2 |(∇⁰h)^T|² + |(∇⁰h)^⊥|²`.

use alloc::vec::Vec;

use crate::calculus::Christoffel;
use crate::chart::{Point, TangentVector};
use crate::error::{contract, Result};
use crate::linalg::Matrix;
use crate::metric::{MetricField, ScalarField};
use crate::stencil::DerivativeStencil;

/// `e^{2h} g0`.
pub fn conformal_metric(g0: &MetricField, h: ScalarField) -> MetricField {
    g0.conformal(h).with_label(alloc::format!("conformal({})", g0.label()))
}

/// `dh` at `x` in coordinates.
pub fn differential(h: &ScalarField, x: &[f64], stencil: &DerivativeStencil) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            stencil.scalar(|e| {
                let mut y = x.to_vec();
                y[i] += e;
                h.eval(&y)
            })
        })
        .collect()
}

/// Closed-form connection difference of `g0 → e^{2h} g0` at `x`.
pub fn conformal_connection_diff(g0: &MetricField, h: &ScalarField, x: &[f64], stencil: &DerivativeStencil) -> Result<Christoffel> {
    let n = g0.dim();
    let g = g0.matrix(x);
    let dh = differential(h, x, stencil);
    let grad = g.solve(&dh)?;
    let mut data = alloc::vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = -g[(i, j)] * grad[k];
                if k == j {
                    v += dh[i];
                }
                if k == i {
                    v += dh[j];
                }
                data[(k * n + i) * n + j] = v;
            }
        }
    }
    Ok(Christoffel::from_vec(n, data))
}

/// Both evaluations of the conformal variation integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalIntegrand {
    /// `g0(D_XX, D_YY) − |D_XY|²` with the closed-form `D`.
    pub from_connection: f64,
    /// `−2 |(∇⁰h)^T|² + |(∇⁰h)^⊥|²`.
    pub from_gradient: f64,
}

/// Requires `X`, `Y` to be `g0`-orthonormal (to `1e-8`).
pub fn conformal_variation_integrand(
    g0: &MetricField,
    h: &ScalarField,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<ConformalIntegrand> {
    let g = g0.metric_at(p)?;
    g0.chart().check_len(x.components.len())?;
    g0.chart().check_len(y.components.len())?;
    let (xv, yv) = (x.components(), y.components());
    check_orthonormal(&g, xv, yv)?;
    let xc = p.coords();
    let d = conformal_connection_diff(g0, h, xc, stencil)?;
    let (dxx, dyy, dxy) = (d.contract(xv, xv), d.contract(yv, yv), d.contract(xv, yv));
    let from_connection = g.bilinear(&dxx, &dyy) - g.bilinear(&dxy, &dxy);

    let grad = g.solve(&differential(h, xc, stencil))?;
    let (gx, gy) = (g.bilinear(&grad, xv), g.bilinear(&grad, yv));
    let tangential = gx * gx + gy * gy;
    let normal = g.bilinear(&grad, &grad) - tangential;
    Ok(ConformalIntegrand { from_connection, from_gradient: -2.0 * tangential + normal })
}

fn check_orthonormal(g: &Matrix, x: &[f64], y: &[f64]) -> Result<()> {
    let err = (g.bilinear(x, x) - 1.0).abs().max((g.bilinear(y, y) - 1.0).abs()).max(g.bilinear(x, y).abs());
    if err > 1e-8 {
        return Err(contract(alloc::format!("X, Y are not orthonormal (defect {err:.3e})")));
    }
    Ok(())
}
