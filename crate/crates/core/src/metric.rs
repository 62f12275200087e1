//! Smooth fields on a chart: scalars, vectors and metrics.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::{Chart, Point};
use crate::error::{GeomError, Result};
use crate::linalg::Matrix;
use crate::math::exp;

type MatrixFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;
type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A smooth function on chart coordinates.
#[derive(Clone)]
pub struct ScalarField(Arc<ScalarFn>);

impl ScalarField {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField")
    }
}

/// A smooth vector field, returned in coordinate components.
#[derive(Clone)]
pub struct VectorField(Arc<VectorFn>);

impl VectorField {
    pub fn new(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        VectorField(Arc::new(f))
    }

    /// Field with the same components everywhere.
    pub fn constant(components: Vec<f64>) -> Self {
        VectorField::new(move |_| components.clone())
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.0)(x)
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField")
    }
}

/// A Riemannian metric on a chart.
#[derive(Clone)]
pub struct MetricField {
    chart: Chart,
    eval: Arc<MatrixFn>,
    label: String,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField").field("label", &self.label).field("dim", &self.chart.dim()).finish()
    }
}

impl MetricField {
    pub fn new(
        chart: Chart,
        label: impl Into<String>,
        eval: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        MetricField { chart, eval: Arc::new(eval), label: label.into() }
    }

    /// The Euclidean metric on `chart`.
    pub fn flat(chart: Chart) -> Self {
        let n = chart.dim();
        MetricField::new(chart, "flat", move |_| Matrix::identity(n))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Symmetrised metric matrix at raw coordinates, no domain check.
    ///
    /// Finite-difference stencils step slightly off the sampled point, so
    /// the inner machinery uses this entry point.
    #[inline]
    pub fn matrix(&self, x: &[f64]) -> Matrix {
        (self.eval)(x).symmetrize()
    }

    /// Metric matrix at a validated point.
    pub fn metric_at(&self, p: &Point) -> Result<Matrix> {
        let p = self.chart.point(p.coords())?;
        let m = (self.eval)(p.coords());
        let n = self.dim();
        if m.rows() != n || m.cols() != n {
            return Err(GeomError::DimensionMismatch { expected: n, found: m.rows() });
        }
        if !m.is_finite() {
            return Err(GeomError::NonFinite("metric evaluation"));
        }
        Ok(m.symmetrize())
    }

    pub fn inner(&self, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        self.matrix(x).bilinear(a, b)
    }

    /// Checks positive-definiteness at each of the given points.
    pub fn check_positive_definite(&self, points: &[Point]) -> Result<()> {
        for p in points {
            let m = self.metric_at(p)?;
            let ev = m.symmetric_eigenvalues();
            if !(ev[0] > 0.0) {
                return Err(GeomError::NotPositiveDefinite { min_eigenvalue: ev[0] });
            }
        }
        Ok(())
    }

    /// `c * g` for a constant `c > 0`.
    pub fn scaled(&self, c: f64) -> MetricField {
        let inner = self.eval.clone();
        MetricField::new(self.chart.clone(), self.label.clone(), move |x| inner(x).scale(c))
    }

    /// `e^{2h} g`.
    pub fn conformal(&self, h: ScalarField) -> MetricField {
        let inner = self.eval.clone();
        MetricField::new(self.chart.clone(), self.label.clone(), move |x| inner(x).scale(exp(2.0 * h.eval(x))))
    }

    /// `a * self + b * other` with constant weights; charts must agree.
    pub fn combine(&self, a: f64, other: &MetricField, b: f64) -> MetricField {
        let f0 = self.eval.clone();
        let f1 = other.eval.clone();
        MetricField::new(self.chart.clone(), self.label.clone(), move |x| f0(x).scale(a).add(&f1(x).scale(b)))
    }

    /// Block-diagonal metric `a g_self(x) + b g_other(y)` on the product chart.
    pub fn product(&self, a: f64, other: &MetricField, b: f64) -> Result<MetricField> {
        let chart = self.chart.product(&other.chart)?;
        let n = self.dim();
        let f0 = self.eval.clone();
        let f1 = other.eval.clone();
        Ok(MetricField::new(chart, "product", move |x| {
            Matrix::block_diag(&f0(&x[..n]).scale(a), &f1(&x[n..]).scale(b))
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sin;
    use core::f64::consts::{FRAC_PI_2, PI, TAU};

    fn round_sphere() -> MetricField {
        let chart = Chart::new(alloc::vec![(0.01, PI - 0.01), (0.0, TAU)], alloc::vec![false, true]).unwrap();
        MetricField::new(chart, "S2", |x| Matrix::diag(&[1.0, sin(x[0]) * sin(x[0])]))
    }

    #[test]
    fn flat_metric_is_identity() {
        let g = MetricField::flat(Chart::torus(3).unwrap());
        let p = g.chart().point(&[0.3, 1.0, 5.0]).unwrap();
        assert_eq!(g.metric_at(&p).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn sphere_on_equator_is_identity() {
        let g = round_sphere();
        let p = g.chart().point(&[FRAC_PI_2, 2.0]).unwrap();
        let m = g.metric_at(&p).unwrap();
        assert!(m.sub(&Matrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_and_non_finite() {
        let g = round_sphere();
        let bad = Point::raw(alloc::vec![-1.0, 0.0]);
        assert!(matches!(g.metric_at(&bad), Err(GeomError::OutOfDomain { axis: 0, .. })));
        let nan = MetricField::new(Chart::torus(2).unwrap(), "nan", |_| Matrix::diag(&[f64::NAN, 1.0]));
        let p = nan.chart().point(&[0.0, 0.0]).unwrap();
        assert_eq!(nan.metric_at(&p), Err(GeomError::NonFinite("metric evaluation")));
    }

    #[test]
    fn asymmetric_rounding_is_symmetrised() {
        let g = MetricField::new(Chart::torus(2).unwrap(), "skew", |_| {
            Matrix::from_vec(2, 2, alloc::vec![1.0, 0.1 + 1e-17, 0.1, 1.0])
        });
        let p = g.chart().point(&[0.0, 0.0]).unwrap();
        let m = g.metric_at(&p).unwrap();
        assert_eq!(m[(0, 1)], m[(1, 0)]);
    }

    #[test]
    fn positive_definite_check() {
        let g = round_sphere();
        assert!(g.check_positive_definite(&g.chart().sample_points(20)).is_ok());
        let bad = MetricField::new(Chart::torus(2).unwrap(), "bad", |_| Matrix::diag(&[1.0, -0.5]));
        assert!(bad.check_positive_definite(&bad.chart().sample_points(2)).is_err());
    }
}
