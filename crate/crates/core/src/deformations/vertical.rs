//! Rescaling the vertical block of a foliation:
//! `g_λ = g0|_H + λ g0|_V` with `λ = e^{2s}` (canonical variation, constant
//! `s`) or `λ = e^{2f}` (warping by a basic function `f`).
//!
//! Connection difference `D = ∇^λ − ∇⁰` on a metric foliation:
//!
//! ```text
//! D(X, Y) = 0
//! D(X, V) = D(V, X) = (1 − λ) A*_X V + df(X) V
//! D(U, V) = (λ − 1) σ(U, V) − λ g0(U, V) ∇⁰f
//! ```
//!
//! for horizontal `X`, `Y` and vertical `U`, `V`; `df = 0` when `λ` is
//! constant.

use alloc::vec::Vec;

use crate::blend::{self, BlendPath, BlendTerms};
use crate::chart::{Point, TangentVector};
use crate::deformations::conformal::differential;
use crate::error::{contract, Result};
use crate::foliation::FoliationStructure;
use crate::linalg::{self, Matrix};
use crate::math::{exp, powi};
use crate::metric::{MetricField, ScalarField};
use crate::stencil::DerivativeStencil;

/// `g0(X^V, Y^V)` as a matrix at `x`.
fn vertical_form(f: &FoliationStructure, x: &[f64]) -> Matrix {
    let g = f.metric().matrix(x);
    let v = f.frame_matrix(x);
    let gv = g.mul(&v);
    let gram = v.transpose().mul(&gv);
    match gram.inverse() {
        Ok(inv) => gv.mul(&inv).mul(&gv.transpose()),
        Err(_) => Matrix::from_fn(g.rows(), g.cols(), |_, _| f64::NAN),
    }
}

fn rescaled(f: &FoliationStructure, lambda: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, label: alloc::string::String) -> MetricField {
    let fol = f.clone();
    MetricField::new(f.metric().chart().clone(), label, move |x| {
        let g = fol.metric().matrix(x);
        g.add(&vertical_form(&fol, x).scale(lambda(x) - 1.0))
    })
}

/// `g0|_H + e^{2s} g0|_V`, with `g0` the foliation's metric.
pub fn canonical_variation_metric(f: &FoliationStructure, s: f64) -> MetricField {
    if s == 0.0 {
        return f.metric().clone();
    }
    let lambda = exp(2.0 * s);
    rescaled(f, move |_| lambda, alloc::format!("canonical(s={s})"))
}

/// `g0|_H + e^{2φ} g0|_V` for a basic function `φ`.
pub fn warped_metric(f: &FoliationStructure, phi: &ScalarField, stencil: &DerivativeStencil) -> Result<MetricField> {
    if !f.is_basic(phi, stencil) {
        return Err(contract("warping function is not basic"));
    }
    let phi = phi.clone();
    Ok(rescaled(f, move |x| exp(2.0 * phi.eval(x)), "warped".into()))
}

/// Largest deviation between the brute-force `D` of `g0 → g_λ` and the
/// block formulas, over orthonormal horizontal and vertical bases at `x`.
fn connection_residual(
    f: &FoliationStructure,
    g1: &MetricField,
    lambda: f64,
    dphi: Option<&[f64]>,
    x: &[f64],
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let path = BlendPath::new(f.metric().clone(), g1.clone())?;
    let d = blend::connection_diff_raw(&path, x, stencil)?;
    let hb = f.horizontal_basis(x)?;
    let vb = f.vertical_basis(x)?;
    let g = f.metric().matrix(x);
    let n = x.len();
    let zero = alloc::vec![0.0; n];
    let (dphi, grad) = match dphi {
        Some(dp) => (dp.to_vec(), g.solve(dp)?),
        None => (zero.clone(), zero.clone()),
    };
    let mut worst: f64 = 0.0;
    let mut check = |got: Vec<f64>, want: Vec<f64>| {
        worst = worst.max(linalg::norm_inf(&linalg::sub(&got, &want)));
    };
    for a in &hb {
        for b in &hb {
            check(d.contract(a, b), zero.clone());
        }
        for v in &vb {
            let dual = f.oneill_a_dual_at(x, a, v, stencil)?;
            let want = linalg::axpy(&linalg::scale(&dual, 1.0 - lambda), linalg::dot(&dphi, a), v);
            check(d.contract(a, v), want.clone());
            check(d.contract(v, a), want);
        }
    }
    for u in &vb {
        for v in &vb {
            let sigma = f.leaf_shape_at(x, u, v, stencil)?;
            let want = linalg::axpy(&linalg::scale(&sigma, lambda - 1.0), -lambda * g.bilinear(u, v), &grad);
            check(d.contract(u, v), want);
        }
    }
    Ok(worst)
}

/// Max residual of the canonical-variation connection identities at `p`.
pub fn canonical_connection_check(f: &FoliationStructure, s: f64, p: &Point, stencil: &DerivativeStencil) -> Result<f64> {
    f.metric().metric_at(p)?;
    let g1 = canonical_variation_metric(f, s);
    connection_residual(f, &g1, exp(2.0 * s), None, p.coords(), stencil)
}

/// Max residual of the warping connection identities at `p`.
pub fn warping_connection_check(f: &FoliationStructure, phi: &ScalarField, p: &Point, stencil: &DerivativeStencil) -> Result<f64> {
    f.metric().metric_at(p)?;
    let g1 = warped_metric(f, phi, stencil)?;
    let x = p.coords();
    let dphi = differential(phi, x, stencil);
    connection_residual(f, &g1, exp(2.0 * phi.eval(x)), Some(&dphi), x, stencil)
}

/// The warping integrand two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpingIntegrand {
    /// `e^{4f} (1 − e^{2f})^{r−2} df(X)²`.
    pub closed_form: f64,
    /// `−S_r(X, Y)` on the path `g0 → g_f`.
    pub from_s_p_r: f64,
}

/// Requires `X` horizontal, `Y` vertical, both `g0`-unit, `r ≥ 2`.
pub fn warping_variation_integrand(
    f: &FoliationStructure,
    phi: &ScalarField,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    r: u32,
    stencil: &DerivativeStencil,
) -> Result<WarpingIntegrand> {
    if r < 2 {
        return Err(contract(alloc::format!("order r = {r} must be at least 2")));
    }
    let g0 = f.metric();
    let gm = g0.metric_at(p)?;
    let xc = p.coords();
    let (xv, yv) = (x.components(), y.components());
    let unit = (gm.bilinear(xv, xv) - 1.0).abs().max((gm.bilinear(yv, yv) - 1.0).abs());
    if unit > 1e-8 {
        return Err(contract("X and Y must be g0-unit"));
    }
    if linalg::norm_inf(&f.vertical_at(xc, xv)?) > 1e-8 {
        return Err(contract("X must be horizontal"));
    }
    if linalg::norm_inf(&f.horizontal_at(xc, yv)?) > 1e-8 {
        return Err(contract("Y must be vertical"));
    }
    let fx = phi.eval(xc);
    let dfx = linalg::dot(&differential(phi, xc, stencil), xv);
    let e2 = exp(2.0 * fx);
    let closed_form = e2 * e2 * powi(1.0 - e2, r as i32 - 2) * dfx * dfx;
    let path = BlendPath::new(g0.clone(), warped_metric(f, phi, stencil)?)?;
    let s = BlendTerms::compute(&path, xc, xv, yv, stencil)?.s_r(r)?;
    Ok(WarpingIntegrand { closed_form, from_s_p_r: -s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::math::{cos, sin};
    use crate::metric::VectorField;
    use core::f64::consts::FRAC_PI_4;

    fn flat_fol() -> FoliationStructure {
        let g0 = MetricField::flat(Chart::torus(3).unwrap());
        FoliationStructure::new(g0, alloc::vec![VectorField::constant(alloc::vec![0.0, 0.0, 1.0])], &DerivativeStencil::default())
            .unwrap()
    }

    fn tv(p: &Point, c: &[f64]) -> TangentVector {
        TangentVector::new(p.clone(), c.to_vec()).unwrap()
    }

    #[test]
    fn canonical_variation_scales_vertical_block() {
        let f = flat_fol();
        let p = f.metric().chart().point(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(canonical_variation_metric(&f, 0.0).metric_at(&p).unwrap(), Matrix::identity(3));
        let m = canonical_variation_metric(&f, 0.5).metric_at(&p).unwrap();
        assert!(m.sub(&Matrix::diag(&[1.0, 1.0, core::f64::consts::E])).max_abs() < 1e-15);
        let st = DerivativeStencil::default();
        assert!(canonical_connection_check(&f, 0.5, &p, &st).unwrap() < 1e-9);
    }

    #[test]
    fn warped_metric_assembly() {
        let f = flat_fol();
        let st = DerivativeStencil::default();
        let phi = ScalarField::new(|x| 0.2 * sin(x[0]));
        let g = warped_metric(&f, &phi, &st).unwrap();
        let p = f.metric().chart().point(&[0.7, 2.0, 3.0]).unwrap();
        let want = Matrix::diag(&[1.0, 1.0, exp(0.4 * sin(0.7))]);
        assert!(g.metric_at(&p).unwrap().sub(&want).max_abs() < 1e-14);
        assert!(warped_metric(&f, &ScalarField::new(|x| x[2]), &st).is_err());
        let c = warped_metric(&f, &ScalarField::constant(0.3), &st).unwrap();
        let cv = canonical_variation_metric(&f, 0.3);
        assert!(c.metric_at(&p).unwrap().sub(&cv.metric_at(&p).unwrap()).max_abs() < 1e-15);
        assert!(warping_connection_check(&f, &phi, &p, &st).unwrap() < 1e-7);
    }

    #[test]
    fn warping_integrand_examples() {
        let f = flat_fol();
        let st = DerivativeStencil::default();
        let phi = ScalarField::new(|x| 0.2 * sin(x[0]));
        for &(x1, r) in &[(0.0, 3), (FRAC_PI_4, 3), (FRAC_PI_4, 2), (1.0, 4)] {
            let p = f.metric().chart().point(&[x1, 0.0, 0.0]).unwrap();
            let w = warping_variation_integrand(&f, &phi, &p, &tv(&p, &[1.0, 0.0, 0.0]), &tv(&p, &[0.0, 0.0, 1.0]), r, &st)
                .unwrap();
            let e2 = exp(0.4 * sin(x1));
            let df = 0.2 * cos(x1);
            let want = e2 * e2 * powi(1.0 - e2, r as i32 - 2) * df * df;
            assert!((w.closed_form - want).abs() < 1e-12);
            assert!((w.from_s_p_r - want).abs() <= 1e-5 * want.abs().max(1e-3), "{w:?} vs {want}");
        }
        let p = f.metric().chart().point(&[0.0, 0.0, 0.0]).unwrap();
        let zero = warping_variation_integrand(&f, &ScalarField::constant(0.0), &p, &tv(&p, &[1.0, 0.0, 0.0]), &tv(&p, &[0.0, 0.0, 1.0]), 3, &st)
            .unwrap();
        assert_eq!(zero.closed_form, 0.0);
    }
}
