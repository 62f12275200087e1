//! The path `g(t) = (1−t) g0 + t g1` and the closed form of its curvature.
//!
//! With `P = G0⁻¹ G1` and `D = Γ1 − Γ0`,
//!
//! ```text
//! R_t(X,Y,Y,X) = (1−t) R0 + t R1 + t(1−t) B((1 − t(1−P))⁻¹)
//! B(M)         = g1(M D(X,X), D(Y,Y)) − g1(M D(X,Y), D(X,Y))
//! ```
//!
//! Expanding the resolvent in powers of `t` gives the Taylor coefficients at
//! `t = 0`: the first derivative is `R1 − R0 + B(1)` and for `r ≥ 2` the r-th
//! derivative is `−r! S_r` with `S_r = B(P (1−P)^{r−2})`.

use alloc::vec::Vec;

use crate::calculus::{self, Christoffel};
use crate::chart::{Chart, Point, TangentVector};
use crate::error::{contract, GeomError, Result};
use crate::linalg::Matrix;
use crate::metric::MetricField;
use crate::stencil::DerivativeStencil;

/// Largest order accepted by [`s_p_r`].
pub const MAX_ORDER: u32 = 12;

/// Two metrics on the same chart.
#[derive(Debug, Clone)]
pub struct BlendPath {
    g0: MetricField,
    g1: MetricField,
}

impl BlendPath {
    pub fn new(g0: MetricField, g1: MetricField) -> Result<Self> {
        if g0.chart() != g1.chart() {
            return Err(GeomError::InvalidChart("g0 and g1 live on different charts".into()));
        }
        Ok(BlendPath { g0, g1 })
    }

    pub fn g0(&self) -> &MetricField {
        &self.g0
    }

    pub fn g1(&self) -> &MetricField {
        &self.g1
    }

    pub fn chart(&self) -> &Chart {
        self.g0.chart()
    }

    pub fn dim(&self) -> usize {
        self.g0.dim()
    }

    /// Both metrics positive-definite at `points`.
    pub fn check_positive_definite(&self, points: &[Point]) -> Result<()> {
        self.g0.check_positive_definite(points)?;
        self.g1.check_positive_definite(points)
    }

    /// The metric `(1−t) g0 + t g1` as a field, any real `t`.
    ///
    /// No positivity check; the finite-difference oracle in `t` needs small
    /// negative values.
    pub fn field(&self, t: f64) -> MetricField {
        self.g0.combine(1.0 - t, &self.g1, t).with_label(alloc::format!("blend(t={t})"))
    }

    /// Same metrics, `g1` replaced by `c g1`.
    pub fn with_scaled_target(&self, c: f64) -> BlendPath {
        BlendPath { g0: self.g0.clone(), g1: self.g1.scaled(c) }
    }
}

/// `P` with `g0(P v, w) = g1(v, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PTensor {
    pub base: Point,
    pub matrix: Matrix,
}

impl PTensor {
    /// `c P`; with `c = t/(1−t)` this is the tensor of the graph immersion.
    pub fn scaled(&self, c: f64) -> PTensor {
        PTensor { base: self.base.clone(), matrix: self.matrix.scale(c) }
    }

    /// `max |g0(Pv, w) − g0(v, Pw)|` over coordinate basis pairs.
    pub fn self_adjoint_defect(&self, g0: &Matrix) -> f64 {
        let gp = g0.mul(&self.matrix);
        gp.sub(&gp.transpose()).max_abs()
    }

    /// Eigenvalues of `P` (real since `P` is `g0`-self-adjoint), ascending.
    pub fn eigenvalues(&self, g0: &Matrix) -> Result<Vec<f64>> {
        Matrix::generalized_eigenvalues(&g0.mul(&self.matrix).symmetrize(), g0)
    }
}

/// `D = ∇¹ − ∇⁰` at a point, a symmetric (1,2) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionDiff {
    pub base: Point,
    pub values: Christoffel,
}

impl ConnectionDiff {
    /// `D(X, Y)`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.values.contract(x, y)
    }
}

/// `G0⁻¹ G1` at raw coordinates.
pub fn p_matrix_raw(path: &BlendPath, x: &[f64]) -> Result<Matrix> {
    let g0 = path.g0.matrix(x);
    let g1 = path.g1.matrix(x);
    g0.lu().map_err(|_| GeomError::Singular("g0 metric matrix"))?.solve_matrix(&g1)
}

pub fn p_tensor(path: &BlendPath, p: &Point) -> Result<PTensor> {
    path.g0.metric_at(p)?;
    path.g1.metric_at(p)?;
    Ok(PTensor { base: p.clone(), matrix: p_matrix_raw(path, p.coords())? })
}

pub fn connection_diff_raw(path: &BlendPath, x: &[f64], stencil: &DerivativeStencil) -> Result<Christoffel> {
    let c0 = calculus::christoffel_raw(&path.g0, x, stencil)?;
    let c1 = calculus::christoffel_raw(&path.g1, x, stencil)?;
    Ok(c1.sub(&c0))
}

pub fn connection_diff(path: &BlendPath, p: &Point, stencil: &DerivativeStencil) -> Result<ConnectionDiff> {
    path.g0.metric_at(p)?;
    path.g1.metric_at(p)?;
    Ok(ConnectionDiff { base: p.clone(), values: connection_diff_raw(path, p.coords(), stencil)? })
}

/// `(1−t) G0(p) + t G1(p)` for `t ∈ [0, 1]`.
pub fn blend_metric(path: &BlendPath, t: f64, p: &Point) -> Result<Matrix> {
    check_t(t)?;
    let g0 = path.g0.metric_at(p)?;
    let g1 = path.g1.metric_at(p)?;
    Ok(g0.scale(1.0 - t).add(&g1.scale(t)))
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(contract(alloc::format!("blend parameter t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// Everything the closed form needs for one `(x, X, Y)`.
///
/// Computing this once and then evaluating at many `t` or many orders `r`
/// avoids repeating the finite differences.
#[derive(Debug, Clone)]
pub struct BlendTerms {
    /// `R0(X,Y,Y,X)`.
    pub r0: f64,
    /// `R1(X,Y,Y,X)`.
    pub r1: f64,
    pub p: Matrix,
    pub g0: Matrix,
    pub g1: Matrix,
    pub dxx: Vec<f64>,
    pub dyy: Vec<f64>,
    pub dxy: Vec<f64>,
}

impl BlendTerms {
    pub fn compute(path: &BlendPath, x: &[f64], xv: &[f64], yv: &[f64], stencil: &DerivativeStencil) -> Result<Self> {
        let d = connection_diff_raw(path, x, stencil)?;
        Ok(BlendTerms {
            r0: calculus::curvature_xyyx_raw(&path.g0, x, xv, yv, stencil)?,
            r1: calculus::curvature_xyyx_raw(&path.g1, x, xv, yv, stencil)?,
            p: p_matrix_raw(path, x)?,
            g0: path.g0.matrix(x),
            g1: path.g1.matrix(x),
            dxx: d.contract(xv, xv),
            dyy: d.contract(yv, yv),
            dxy: d.contract(xv, yv),
        })
    }

    /// `g1(M D_XX, D_YY) − g1(M D_XY, D_XY)`.
    pub fn quadratic(&self, m: &Matrix) -> f64 {
        self.g1.bilinear(&m.mul_vec(&self.dxx), &self.dyy) - self.g1.bilinear(&m.mul_vec(&self.dxy), &self.dxy)
    }

    /// `(1−t) R0 + t R1 + t(1−t) B((1 − t(1−P))⁻¹)`.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(self.r0);
        }
        if t == 1.0 {
            return Ok(self.r1);
        }
        let n = self.p.rows();
        let a = Matrix::identity(n).scale(1.0 - t).add(&self.p.scale(t));
        let lu = match a.lu() {
            Ok(lu) => lu,
            Err(_) => return Err(self.resolvent_error(t)),
        };
        // B is linear in M, so apply the resolvent to the two D vectors only
        let rxx = lu.solve(&self.dxx);
        let rxy = lu.solve(&self.dxy);
        let b = self.g1.bilinear(&rxx, &self.dyy) - self.g1.bilinear(&rxy, &self.dxy);
        Ok((1.0 - t) * self.r0 + t * self.r1 + t * (1.0 - t) * b)
    }

    fn resolvent_error(&self, t: f64) -> GeomError {
        let gp = self.g0.mul(&self.p).symmetrize();
        let eigenvalue = match Matrix::generalized_eigenvalues(&gp, &self.g0) {
            Ok(ev) => ev
                .into_iter()
                .map(|l| 1.0 - t + t * l)
                .fold(f64::INFINITY, |a, b| if b.abs() < a.abs() { b } else { a }),
            Err(_) => f64::NAN,
        };
        GeomError::Resolvent { eigenvalue }
    }

    /// `S_r = B(P (1−P)^{r−2})`.
    pub fn s_r(&self, r: u32) -> Result<f64> {
        check_order(r, 2)?;
        let n = self.p.rows();
        let q = Matrix::identity(n).sub(&self.p);
        let mut m = self.p.clone();
        for _ in 2..r {
            m = m.mul(&q);
        }
        Ok(self.quadratic(&m))
    }

    /// r-th `t`-derivative of `R_t(X,Y,Y,X)` at `t = 0`.
    pub fn derivative(&self, r: u32) -> Result<f64> {
        check_order(r, 1)?;
        if r == 1 {
            let n = self.p.rows();
            return Ok(self.r1 - self.r0 + self.quadratic(&Matrix::identity(n)));
        }
        Ok(-factorial(r) * self.s_r(r)?)
    }
}

fn check_order(r: u32, min: u32) -> Result<()> {
    if r < min || r > MAX_ORDER {
        return Err(contract(alloc::format!("order r = {r} outside {min}..={MAX_ORDER}")));
    }
    Ok(())
}

pub fn factorial(r: u32) -> f64 {
    (1..=r).map(f64::from).product()
}

fn terms(path: &BlendPath, p: &Point, x: &TangentVector, y: &TangentVector, stencil: &DerivativeStencil) -> Result<BlendTerms> {
    path.g0.metric_at(p)?;
    path.g1.metric_at(p)?;
    calculus::check_vectors(&path.g0, p, &[x, y])?;
    BlendTerms::compute(path, p.coords(), x.components(), y.components(), stencil)
}

/// `R_t(X,Y,Y,X)` from the closed form.
pub fn blend_curvature(
    path: &BlendPath,
    t: f64,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_t(t)?;
    terms(path, p, x, y, stencil)?.curvature(t)
}

/// `R_t(X,Y,Y,X)` by differentiating the blended metric directly.
pub fn blend_curvature_oracle(
    path: &BlendPath,
    t: f64,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_t(t)?;
    let q = path.field(t);
    q.metric_at(p)?;
    path.chart().check_len(x.components.len())?;
    path.chart().check_len(y.components.len())?;
    calculus::curvature_xyyx_raw(&q, p.coords(), x.components(), y.components(), stencil)
}

pub fn s_p_r(
    path: &BlendPath,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    r: u32,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_order(r, 2)?;
    terms(path, p, x, y, stencil)?.s_r(r)
}

pub fn t_derivative_analytic(
    path: &BlendPath,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    r: u32,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_order(r, 1)?;
    terms(path, p, x, y, stencil)?.derivative(r)
}

/// r-th `t`-derivative at `t = 0` by a fourth-order central difference in
/// `t` of the brute-force curvature. Supports `1 ≤ r ≤ 4`.
pub fn t_derivative_fd(
    path: &BlendPath,
    x: &[f64],
    xv: &[f64],
    yv: &[f64],
    r: u32,
    step: f64,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let (weights, denom): (&[f64], f64) = match r {
        1 => (&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        2 => (&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        3 => (&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0),
        4 => (&[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0),
        _ => return Err(contract(alloc::format!("finite-difference order r = {r} outside 1..=4"))),
    };
    if !(step > 0.0) {
        return Err(contract("t step must be positive"));
    }
    let half = (weights.len() / 2) as i32;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let t = (i as i32 - half) as f64 * step;
        acc += w * calculus::curvature_xyyx_raw(&path.field(t), x, xv, yv, stencil)?;
    }
    Ok(acc / (denom * crate::math::powi(step, r as i32)))
}

/// `1/ρ(1−P)`: the largest `t` for which the resolvent series converges.
/// Returns `f64::INFINITY` when `P = 1`.
pub fn series_radius(path: &BlendPath, p: &Point) -> Result<f64> {
    let pt = p_tensor(path, p)?;
    let g0 = path.g0.metric_at(p)?;
    let rho = pt.eigenvalues(&g0)?.into_iter().map(|l| (1.0 - l).abs()).fold(0.0, f64::max);
    Ok(if rho <= 1e-15 { f64::INFINITY } else { 1.0 / rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, sin};
    use core::f64::consts::{E, PI, TAU};

    fn warped() -> BlendPath {
        let chart = Chart::torus(3).unwrap();
        let g0 = MetricField::flat(chart.clone());
        let g1 = MetricField::new(chart, "warp", |x| Matrix::diag(&[1.0, 1.0, exp(0.4 * sin(x[0]))]));
        BlendPath::new(g0, g1).unwrap()
    }

    fn tv(p: &Point, c: &[f64]) -> TangentVector {
        TangentVector::new(p.clone(), c.to_vec()).unwrap()
    }

    #[test]
    fn p_tensor_examples() {
        let path = warped();
        let p = path.chart().point(&[0.7, 1.0, 2.0]).unwrap();
        let pt = p_tensor(&path, &p).unwrap();
        let want = Matrix::diag(&[1.0, 1.0, exp(0.4 * sin(0.7))]);
        assert!(pt.matrix.sub(&want).max_abs() < 1e-12);

        let same = BlendPath::new(path.g0().clone(), path.g0().clone()).unwrap();
        assert_eq!(p_tensor(&same, &p).unwrap().matrix, Matrix::identity(3));
        let conf = BlendPath::new(path.g0().clone(), path.g0().scaled(E)).unwrap();
        assert!(p_tensor(&conf, &p).unwrap().matrix.sub(&Matrix::identity(3).scale(E)).max_abs() < 1e-15);
    }

    #[test]
    fn connection_diff_vanishes_for_constant_scaling() {
        let path = warped();
        let st = DerivativeStencil::default();
        let p = path.chart().point(&[0.7, 1.0, 2.0]).unwrap();
        let sc = BlendPath::new(path.g1().clone(), path.g1().scaled(3.0)).unwrap();
        assert!(connection_diff(&sc, &p, &st).unwrap().values.max_abs() < 1e-12);
    }

    #[test]
    fn blend_metric_examples() {
        let chart = Chart::torus(2).unwrap();
        let path = BlendPath::new(MetricField::flat(chart.clone()), MetricField::flat(chart).scaled(2.0)).unwrap();
        let p = path.chart().point(&[0.0, 0.0]).unwrap();
        assert_eq!(blend_metric(&path, 0.5, &p).unwrap(), Matrix::diag(&[1.5, 1.5]));
        assert_eq!(blend_metric(&path, 0.0, &p).unwrap(), Matrix::identity(2));
        assert!(blend_metric(&path, 1.5, &p).is_err());
    }

    #[test]
    fn closed_form_matches_oracle_on_warped_torus() {
        let path = warped();
        let st = DerivativeStencil::default();
        let p = path.chart().point(&[2.1, 0.3, 4.0]).unwrap();
        let (x, y) = (tv(&p, &[1.0, 0.0, 0.0]), tv(&p, &[0.0, 0.0, 1.0]));
        for &t in &[0.1, 0.3, 0.9] {
            let a = blend_curvature(&path, t, &p, &x, &y, &st).unwrap();
            let b = blend_curvature_oracle(&path, t, &p, &x, &y, &st).unwrap();
            assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn scaled_sphere_oracle() {
        let chart = Chart::new(alloc::vec![(0.01, PI - 0.01), (0.0, TAU)], alloc::vec![false, true]).unwrap();
        let s2 = MetricField::new(chart, "S2", |x| Matrix::diag(&[1.0, sin(x[0]) * sin(x[0])]));
        let path = BlendPath::new(s2.clone(), s2.scaled(2.0)).unwrap();
        let st = DerivativeStencil::default();
        let p = path.chart().point(&[1.0, 2.0]).unwrap();
        let (x, y) = (tv(&p, &[1.0, 0.0]), tv(&p, &[0.0, 1.0]));
        for &t in &[0.25, 0.5] {
            let c = 1.0 + t;
            let area = c * c * sin(1.0) * sin(1.0);
            let want = area / c;
            let got = blend_curvature_oracle(&path, t, &p, &x, &y, &st).unwrap();
            assert!((got - want).abs() < 1e-6);
            assert!((blend_curvature(&path, t, &p, &x, &y, &st).unwrap() - want).abs() < 1e-6);
        }
    }

    #[test]
    fn taylor_coefficients_match_t_differences() {
        let path = warped();
        let st = DerivativeStencil::default();
        let x0 = [1.3, 0.2, 0.5];
        let p = path.chart().point(&x0).unwrap();
        let (x, y) = (tv(&p, &[1.0, 0.0, 0.0]), tv(&p, &[0.0, 0.0, 1.0]));
        for r in 1..=3 {
            let a = t_derivative_analytic(&path, &p, &x, &y, r, &st).unwrap();
            let b = t_derivative_fd(&path, &x0, x.components(), y.components(), r, 0.05, &st).unwrap();
            assert!((a - b).abs() <= 1e-3 * b.abs().max(1.0), "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn s_p_r_contracts() {
        let path = warped();
        let st = DerivativeStencil::default();
        let p = path.chart().point(&[1.0, 1.0, 1.0]).unwrap();
        let (x, y) = (tv(&p, &[1.0, 0.0, 0.0]), tv(&p, &[0.0, 0.0, 1.0]));
        assert!(s_p_r(&path, &p, &x, &y, 1, &st).is_err());
        assert!(t_derivative_analytic(&path, &p, &x, &y, 0, &st).is_err());
        let same = BlendPath::new(path.g0().clone(), path.g0().clone()).unwrap();
        assert_eq!(s_p_r(&same, &p, &x, &y, 3, &st).unwrap(), 0.0);
    }

    #[test]
    fn series_radius_examples() {
        let path = warped();
        let p = path.chart().point(&[0.0, 0.0, 0.0]).unwrap();
        let g0 = path.g0().clone();
        let same = BlendPath::new(g0.clone(), g0.clone()).unwrap();
        assert_eq!(series_radius(&same, &p).unwrap(), f64::INFINITY);
        let e = BlendPath::new(g0.clone(), g0.scaled(E)).unwrap();
        assert!((series_radius(&e, &p).unwrap() - 1.0 / (E - 1.0)).abs() < 1e-12);
        let half = BlendPath::new(g0.clone(), g0.scaled(0.5)).unwrap();
        assert!((series_radius(&half, &p).unwrap() - 2.0).abs() < 1e-12);
    }
}
