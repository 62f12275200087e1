//! Metric foliations given by an explicit vertical frame.
//!
//! `V` is spanned by the frame fields, `H` is its `g`-orthogonal complement.
//! `A_X Y = ½ [X, Y]^V` for horizontal `X`, `Y`; the dual `A*_X V` is the
//! horizontal vector with `g(A*_X V, Y) = g(A_X Y, V)`; the leaf shape
//! operator is `σ(U, V) = (∇_U V)^H`.

use alloc::vec::Vec;

use crate::calculus;
use crate::chart::{Point, TangentVector};
use crate::error::{contract, GeomError, Result};
use crate::linalg::{self, Matrix};
use crate::metric::{MetricField, ScalarField, VectorField};
use crate::stencil::DerivativeStencil;

/// Points used to validate frames and basic functions.
const SAMPLE_COUNT: usize = 24;

/// Tolerance on `|X^V| / |X|` for an input declared horizontal (or the
/// reverse for vertical inputs).
const SPLIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FoliationStructure {
    metric: MetricField,
    frame: Vec<VectorField>,
}

/// `[A, B]` at `x`: `A(B) − B(A)` by finite differences.
pub fn bracket(a: &VectorField, b: &VectorField, x: &[f64], stencil: &DerivativeStencil) -> Vec<f64> {
    let n = x.len();
    let av = a.eval(x);
    let bv = b.eval(x);
    let dab = directional(b, x, &av, stencil, n);
    let dba = directional(a, x, &bv, stencil, n);
    linalg::sub(&dab, &dba)
}

/// Derivative of `f` along `v` at `x`.
fn directional(f: &VectorField, x: &[f64], v: &[f64], stencil: &DerivativeStencil, n: usize) -> Vec<f64> {
    let s = linalg::norm_inf(v);
    if s == 0.0 {
        return alloc::vec![0.0; n];
    }
    let dir = linalg::scale(v, 1.0 / s);
    linalg::scale(&stencil.first(|e| f.eval(&linalg::axpy(x, e, &dir)), n), s)
}

impl FoliationStructure {
    /// Validates frame independence and integrability at sample points.
    pub fn new(metric: MetricField, frame: Vec<VectorField>, stencil: &DerivativeStencil) -> Result<Self> {
        let n = metric.dim();
        if frame.is_empty() || frame.len() > n {
            return Err(contract(alloc::format!("vertical rank {} must lie in 1..={n}", frame.len())));
        }
        let f = FoliationStructure { metric, frame };
        for p in f.metric.chart().sample_points(SAMPLE_COUNT) {
            let x = p.coords();
            f.vertical_gram(x)?;
            for a in 0..f.frame.len() {
                for b in 0..a {
                    let br = bracket(&f.frame[a], &f.frame[b], x, stencil);
                    let h = f.horizontal_at(x, &br)?;
                    let residual = f.norm(x, &h);
                    if residual > 1e-6 {
                        return Err(GeomError::NotIntegrable { residual });
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn frame(&self) -> &[VectorField] {
        &self.frame
    }

    pub fn vertical_rank(&self) -> usize {
        self.frame.len()
    }

    /// Same frame, different metric (the frame must stay independent).
    pub fn with_metric(&self, metric: MetricField) -> FoliationStructure {
        FoliationStructure { metric, frame: self.frame.clone() }
    }

    fn norm(&self, x: &[f64], v: &[f64]) -> f64 {
        crate::math::sqrt(self.metric.matrix(x).bilinear(v, v).max(0.0))
    }

    /// Frame matrix (columns are frame vectors) at `x`.
    pub fn frame_matrix(&self, x: &[f64]) -> Matrix {
        let cols: Vec<Vec<f64>> = self.frame.iter().map(|f| f.eval(x)).collect();
        Matrix::from_columns(&cols)
    }

    fn vertical_gram(&self, x: &[f64]) -> Result<(Matrix, Matrix)> {
        let v = self.frame_matrix(x);
        let g = self.metric.matrix(x);
        let gram = v.transpose().mul(&g).mul(&v);
        let ev = gram.symmetric_eigenvalues();
        if !(ev[0] > 1e-12 * ev[ev.len() - 1]) {
            return Err(GeomError::Degenerate("vertical frame is not independent"));
        }
        Ok((v, gram))
    }

    /// `X^V` at raw coordinates.
    pub fn vertical_at(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.metric.chart().check_len(v.len())?;
        let (fm, gram) = self.vertical_gram(x)?;
        let g = self.metric.matrix(x);
        let rhs = fm.transpose().mul_vec(&g.mul_vec(v));
        let coef = gram.solve(&rhs)?;
        Ok(fm.mul_vec(&coef))
    }

    /// `X^H` at raw coordinates.
    pub fn horizontal_at(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        Ok(linalg::sub(v, &self.vertical_at(x, v)?))
    }

    pub fn vertical_part(&self, v: &TangentVector) -> Result<TangentVector> {
        self.metric.metric_at(&v.base)?;
        TangentVector::new(v.base.clone(), self.vertical_at(v.base.coords(), &v.components)?)
    }

    pub fn horizontal_part(&self, v: &TangentVector) -> Result<TangentVector> {
        self.metric.metric_at(&v.base)?;
        TangentVector::new(v.base.clone(), self.horizontal_at(v.base.coords(), &v.components)?)
    }

    /// A `g`-orthonormal basis of `H` at `x`.
    pub fn horizontal_basis(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.metric.dim();
        let k = self.frame.len();
        let g = self.metric.matrix(x);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            if basis.len() == n - k {
                break;
            }
            let mut e = alloc::vec![0.0; n];
            e[i] = 1.0;
            let mut h = self.horizontal_at(x, &e)?;
            for b in &basis {
                h = linalg::axpy(&h, -g.bilinear(&h, b), b);
            }
            let norm = crate::math::sqrt(g.bilinear(&h, &h).max(0.0));
            if norm > 1e-6 {
                basis.push(linalg::scale(&h, 1.0 / norm));
            }
        }
        if basis.len() != n - k {
            return Err(GeomError::Degenerate("horizontal space has the wrong rank"));
        }
        Ok(basis)
    }

    /// The vertical frame orthonormalised at `x`.
    pub fn vertical_basis(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let g = self.metric.matrix(x);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for f in &self.frame {
            let mut v = f.eval(x);
            for b in &basis {
                v = linalg::axpy(&v, -g.bilinear(&v, b), b);
            }
            let norm = crate::math::sqrt(g.bilinear(&v, &v).max(0.0));
            if !(norm > 1e-9) {
                return Err(GeomError::Degenerate("vertical frame is not independent"));
            }
            basis.push(linalg::scale(&v, 1.0 / norm));
        }
        Ok(basis)
    }

    fn relative_split(&self, x: &[f64], v: &[f64], want_horizontal: bool) -> Result<()> {
        let off = if want_horizontal { self.vertical_at(x, v)? } else { self.horizontal_at(x, v)? };
        let scale = self.norm(x, v).max(1e-300);
        if self.norm(x, &off) > SPLIT_TOL * scale.max(1.0) {
            let what = if want_horizontal { "horizontal" } else { "vertical" };
            return Err(contract(alloc::format!("input vector is not {what}")));
        }
        Ok(())
    }

    /// Field `y ↦ (v)^H` at `y` (horizontalised coordinate extension).
    fn horizontal_extension(&self, v: &[f64]) -> VectorField {
        let f = self.clone();
        let v = v.to_vec();
        VectorField::new(move |y| f.horizontal_at(y, &v).unwrap_or_else(|_| alloc::vec![f64::NAN; v.len()]))
    }

    fn vertical_extension(&self, v: &[f64]) -> VectorField {
        let f = self.clone();
        let v = v.to_vec();
        VectorField::new(move |y| f.vertical_at(y, &v).unwrap_or_else(|_| alloc::vec![f64::NAN; v.len()]))
    }

    /// `A_X Y` at raw coordinates; `X`, `Y` must be horizontal.
    pub fn oneill_a_at(&self, x: &[f64], xv: &[f64], yv: &[f64], stencil: &DerivativeStencil) -> Result<Vec<f64>> {
        self.relative_split(x, xv, true)?;
        self.relative_split(x, yv, true)?;
        let br = bracket(&self.horizontal_extension(xv), &self.horizontal_extension(yv), x, stencil);
        if !br.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite("bracket of horizontal extensions"));
        }
        Ok(linalg::scale(&self.vertical_at(x, &br)?, 0.5))
    }

    /// `A*_X V` at raw coordinates; `X` horizontal, `V` vertical.
    pub fn oneill_a_dual_at(&self, x: &[f64], xv: &[f64], vv: &[f64], stencil: &DerivativeStencil) -> Result<Vec<f64>> {
        self.relative_split(x, vv, false)?;
        let g = self.metric.matrix(x);
        let mut out = alloc::vec![0.0; x.len()];
        for h in self.horizontal_basis(x)? {
            let a = self.oneill_a_at(x, xv, &h, stencil)?;
            out = linalg::axpy(&out, g.bilinear(&a, vv), &h);
        }
        Ok(out)
    }

    /// `σ(U, V)` at raw coordinates, symmetrised; `U`, `V` vertical.
    pub fn leaf_shape_at(&self, x: &[f64], uv: &[f64], vv: &[f64], stencil: &DerivativeStencil) -> Result<Vec<f64>> {
        self.relative_split(x, uv, false)?;
        self.relative_split(x, vv, false)?;
        let ue = self.vertical_extension(uv);
        let ve = self.vertical_extension(vv);
        let a = calculus::covariant_derivative_raw(&self.metric, &ue, &ve, x, stencil)?;
        let b = calculus::covariant_derivative_raw(&self.metric, &ve, &ue, x, stencil)?;
        self.horizontal_at(x, &linalg::scale(&linalg::add(&a, &b), 0.5))
    }

    pub fn oneill_a(&self, xv: &TangentVector, yv: &TangentVector, stencil: &DerivativeStencil) -> Result<TangentVector> {
        let p = self.base(xv, yv)?;
        TangentVector::new(p.clone(), self.oneill_a_at(p.coords(), &xv.components, &yv.components, stencil)?)
    }

    pub fn oneill_a_dual(&self, xv: &TangentVector, vv: &TangentVector, stencil: &DerivativeStencil) -> Result<TangentVector> {
        let p = self.base(xv, vv)?;
        TangentVector::new(p.clone(), self.oneill_a_dual_at(p.coords(), &xv.components, &vv.components, stencil)?)
    }

    pub fn leaf_shape(&self, uv: &TangentVector, vv: &TangentVector, stencil: &DerivativeStencil) -> Result<TangentVector> {
        let p = self.base(uv, vv)?;
        TangentVector::new(p.clone(), self.leaf_shape_at(p.coords(), &uv.components, &vv.components, stencil)?)
    }

    fn base<'a>(&self, a: &'a TangentVector, b: &TangentVector) -> Result<&'a Point> {
        self.metric.metric_at(&a.base)?;
        if self.metric.chart().coord_distance(a.base.coords(), b.base.coords()) > 1e-12 {
            return Err(contract("tangent vectors based at different points"));
        }
        Ok(&a.base)
    }

    /// `dh(V) = 0` (to `1e-8`) for every frame field at sample points.
    pub fn is_basic(&self, h: &ScalarField, stencil: &DerivativeStencil) -> bool {
        self.metric.chart().sample_points(SAMPLE_COUNT).iter().all(|p| {
            let x = p.coords();
            self.frame.iter().all(|f| {
                let v = f.eval(x);
                let s = linalg::norm_inf(&v);
                if s == 0.0 {
                    return true;
                }
                let dir = linalg::scale(&v, 1.0 / s);
                let d = s * stencil.scalar(|e| h.eval(&linalg::axpy(x, e, &dir)));
                d.abs() <= 1e-8
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::math::{cos, exp, sin};

    fn warped_torus() -> FoliationStructure {
        let chart = Chart::torus(3).unwrap();
        let g = MetricField::new(chart, "warp", |x| Matrix::diag(&[1.0, 1.0, exp(0.4 * sin(x[0]))]));
        FoliationStructure::new(g, alloc::vec![VectorField::constant(alloc::vec![0.0, 0.0, 1.0])], &DerivativeStencil::default())
            .unwrap()
    }

    fn tv(p: &Point, c: &[f64]) -> TangentVector {
        TangentVector::new(p.clone(), c.to_vec()).unwrap()
    }

    #[test]
    fn projections_split_vectors() {
        let f = warped_torus();
        let p = f.metric().chart().point(&[0.4, 1.0, 2.0]).unwrap();
        let v = tv(&p, &[0.0, 0.0, 2.0]);
        let h = tv(&p, &[1.0, -1.0, 0.0]);
        assert_eq!(f.vertical_part(&v).unwrap(), v);
        assert!(linalg::norm_inf(&f.vertical_part(&h).unwrap().components) < 1e-15);
        let x = tv(&p, &[0.3, 0.7, -1.1]);
        let s = linalg::add(&f.vertical_part(&x).unwrap().components, &f.horizontal_part(&x).unwrap().components);
        assert!(linalg::norm_inf(&linalg::sub(&s, &x.components)) < 1e-12);
    }

    #[test]
    fn warped_leaves_bend() {
        let f = warped_torus();
        let st = DerivativeStencil::default();
        let x1 = 0.8;
        let p = f.metric().chart().point(&[x1, 0.3, 0.1]).unwrap();
        let v = tv(&p, &[0.0, 0.0, 1.0]);
        let s = f.leaf_shape(&v, &v, &st).unwrap();
        // f = 0.2 sin x1, σ(∂3, ∂3) = −e^{2f} f' ∂1
        let want = -exp(0.4 * sin(x1)) * 0.2 * cos(x1);
        assert!((s.components[0] - want).abs() < 1e-6);
        assert!(s.components[1].abs() < 1e-9 && s.components[2].abs() < 1e-9);
        let a = f.oneill_a(&tv(&p, &[1.0, 0.0, 0.0]), &tv(&p, &[0.0, 1.0, 0.0]), &st).unwrap();
        assert!(linalg::norm_inf(&a.components) < 1e-9);
    }

    #[test]
    fn rejects_wrong_inputs() {
        let f = warped_torus();
        let st = DerivativeStencil::default();
        let p = f.metric().chart().point(&[0.8, 0.3, 0.1]).unwrap();
        let v = tv(&p, &[0.0, 0.0, 1.0]);
        assert!(f.oneill_a(&v, &v, &st).is_err());
        assert!(f.leaf_shape(&tv(&p, &[1.0, 0.0, 0.0]), &v, &st).is_err());
        let chart = Chart::torus(3).unwrap();
        let twisted = alloc::vec![
            VectorField::constant(alloc::vec![1.0, 0.0, 0.0]),
            VectorField::new(|x| alloc::vec![0.0, 1.0, x[0]]),
        ];
        assert!(matches!(
            FoliationStructure::new(MetricField::flat(chart), twisted, &st),
            Err(GeomError::NotIntegrable { .. })
        ));
    }

    #[test]
    fn basic_functions() {
        let f = warped_torus();
        let st = DerivativeStencil::default();
        assert!(f.is_basic(&ScalarField::new(|x| sin(x[0])), &st));
        assert!(f.is_basic(&ScalarField::constant(2.0), &st));
        assert!(!f.is_basic(&ScalarField::new(|x| x[2]), &st));
    }
}
