//! Immersed tori, periodic quadrature and the variation verdicts.
//!
//! Integrals over `T² = [0, 2π)²` use the trapezoidal rule, which is
//! spectrally accurate for smooth periodic integrands. Every estimate
//! carries an error bound built from three parts: the change between grid
//! `n` and `2n`, the change in the integrand when the finite-difference
//! steps are doubled (sampled on an 8×8 subgrid, times the area), and a
//! relative floor of `1e-12`.
//!
//! The first-order identity is integrated against the `g1`-area element
//! `|X∧Y|_1 du dv`, i.e. each integrand is divided by `|X∧Y|_1`; the values
//! divided by `|X∧Y|_1²` are reported next to them.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use crate::blend::{BlendPath, BlendTerms};
use crate::calculus::{self, Christoffel};
use crate::chart::{Chart, Point, TangentVector};
use crate::deformations::cheeger::{self, GroupAction};
use crate::error::{contract, GeomError, Result};
use crate::linalg::{self, Matrix};
use crate::math::{abs, sqrt};
use crate::metric::MetricField;
use crate::stencil::DerivativeStencil;

type MapFn = dyn Fn(f64, f64) -> Vec<f64> + Send + Sync;
type FrameFn = dyn Fn(f64, f64) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// Side of the subgrid used for the stencil-error estimate.
const STENCIL_PROBE: usize = 8;
/// Relative floor of every quadrature error estimate.
pub const ERROR_FLOOR: f64 = 1e-12;
/// Verdicts call an integral zero when it is within this many error bars.
pub const ZERO_BAND: f64 = 3.0;

/// A doubly periodic map `(u, v) ↦ point` with tangent frame `(∂_u, ∂_v)`.
#[derive(Clone)]
pub struct TorusImmersion {
    chart: Chart,
    map: Arc<MapFn>,
    frame: Option<Arc<FrameFn>>,
    label: alloc::string::String,
}

impl fmt::Debug for TorusImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusImmersion").field("label", &self.label).finish()
    }
}

impl TorusImmersion {
    /// Validates periodicity and frame independence on a 12×12 grid.
    pub fn new(
        chart: Chart,
        label: impl Into<alloc::string::String>,
        map: impl Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let t = TorusImmersion { chart, map: Arc::new(map), frame: None, label: label.into() };
        t.validate()?;
        Ok(t)
    }

    /// Replaces the finite-difference frame by an exact one.
    pub fn with_frame(mut self, frame: impl Fn(f64, f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static) -> Result<Self> {
        self.frame = Some(Arc::new(frame));
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let m = 12;
        let mut residual: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let (u, v) = (TAU * (i as f64 + 0.3) / m as f64, TAU * (j as f64 + 0.7) / m as f64);
                let a = (self.map)(u, v);
                self.chart.check_len(a.len())?;
                let b = (self.map)(u + TAU, v);
                let c = (self.map)(u, v + TAU);
                residual = residual.max(self.chart.coord_distance(&a, &b)).max(self.chart.coord_distance(&a, &c));
                if residual > 1e-9 {
                    return Err(GeomError::NotPeriodic { residual });
                }
                self.point(u, v)?;
                let (x, y) = self.frame_at(u, v);
                let e = Matrix::identity(x.len());
                let w = calculus::wedge_norm_sq(&e, &x, &y);
                if !(w > 1e-10 * e.bilinear(&x, &x) * e.bilinear(&y, &y)) {
                    return Err(GeomError::Degenerate("torus frame is not independent"));
                }
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Raw (unreduced) coordinates of the image of `(u, v)`.
    pub fn coords(&self, u: f64, v: f64) -> Vec<f64> {
        (self.map)(u, v)
    }

    pub fn point(&self, u: f64, v: f64) -> Result<Point> {
        self.chart.point(&(self.map)(u, v))
    }

    /// `(X, Y) = (∂_u, ∂_v)` of the map.
    pub fn frame_at(&self, u: f64, v: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.frame {
            Some(f) => f(u, v),
            None => {
                let st = DerivativeStencil::default();
                let n = self.chart.dim();
                (st.first(|e| (self.map)(u + e, v), n), st.first(|e| (self.map)(u, v + e), n))
            }
        }
    }

    /// `(∂_u X, ∂_u Y, ∂_v Y)` in coordinates.
    pub fn frame_derivatives(&self, u: f64, v: f64, stencil: &DerivativeStencil) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.chart.dim();
        let stack = |e: f64, along_u: bool| {
            let (x, y) = if along_u { self.frame_at(u + e, v) } else { self.frame_at(u, v + e) };
            let mut c = x;
            c.extend_from_slice(&y);
            c
        };
        let du = stencil.nested(|e| stack(e, true), 2 * n);
        let dv = stencil.nested(|e| stack(e, false), 2 * n);
        (du[..n].to_vec(), du[n..].to_vec(), dv[n..].to_vec())
    }

    /// Covariant derivatives `(∇_X X, ∇_X Y, ∇_Y Y)` of the frame along the
    /// immersion for the connection with symbols `gamma`.
    fn frame_covariant(&self, gamma: &Christoffel, u: f64, v: f64, stencil: &DerivativeStencil) -> [Vec<f64>; 3] {
        let (x, y) = self.frame_at(u, v);
        let (dux, duy, dvy) = self.frame_derivatives(u, v, stencil);
        [
            linalg::add(&dux, &gamma.contract(&x, &x)),
            linalg::add(&duy, &gamma.contract(&x, &y)),
            linalg::add(&dvy, &gamma.contract(&y, &y)),
        ]
    }

    /// The induced metric as a field on the `(u, v)` torus chart.
    pub fn induced_metric(&self, g: &MetricField) -> Result<MetricField> {
        if g.chart() != &self.chart {
            return Err(GeomError::InvalidChart("metric and torus live on different charts".into()));
        }
        let t = self.clone();
        let g = g.clone();
        Ok(MetricField::new(Chart::torus(2)?, alloc::format!("induced({})", self.label), move |w| {
            let (x, y) = t.frame_at(w[0], w[1]);
            let m = g.matrix(&t.coords(w[0], w[1]));
            let (xx, xy, yy) = (m.bilinear(&x, &x), m.bilinear(&x, &y), m.bilinear(&y, &y));
            Matrix::from_vec(2, 2, alloc::vec![xx, xy, xy, yy])
        }))
    }
}

/// Sign classification of an integral against its error bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Zero,
    Negative,
}

impl Verdict {
    pub fn classify(value: f64, error: f64) -> Verdict {
        if abs(value) <= ZERO_BAND * error {
            Verdict::Zero
        } else if value > 0.0 {
            Verdict::Positive
        } else {
            Verdict::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Positive => "positive",
            Verdict::Zero => "zero",
            Verdict::Negative => "negative",
        }
    }

    pub fn opposite(self) -> Verdict {
        match self {
            Verdict::Positive => Verdict::Negative,
            Verdict::Zero => Verdict::Zero,
            Verdict::Negative => Verdict::Positive,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
}

impl QuadratureEstimate {
    pub fn verdict(&self) -> Verdict {
        Verdict::classify(self.value, self.error)
    }

    /// `|self − other| ≤ 3 (err_self + err_other)`.
    pub fn agrees_with(&self, other: &QuadratureEstimate) -> bool {
        abs(self.value - other.value) <= ZERO_BAND * (self.error + other.error)
    }
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n < 8 {
        return Err(contract(alloc::format!("grid_n = {grid_n} must be at least 8")));
    }
    Ok(())
}

/// Trapezoidal rule on `[0, 2π)²` with an `n` vs `2n` error estimate.
pub fn integrate_torus(f: impl Fn(f64, f64) -> f64, grid_n: usize) -> Result<QuadratureEstimate> {
    let r = integrate_fields(|_, u, v| Ok(alloc::vec![f(u, v)]), 1, grid_n, None)?;
    Ok(r[0])
}

/// Integrates `len` quantities at once. With `stencil` given, the integrand
/// is also re-evaluated with doubled steps on a subgrid and the difference
/// is added to the error.
pub fn integrate_fields<F>(f: F, len: usize, grid_n: usize, stencil: Option<&DerivativeStencil>) -> Result<Vec<QuadratureEstimate>>
where
    F: Fn(&DerivativeStencil, f64, f64) -> Result<Vec<f64>>,
{
    check_grid(grid_n)?;
    let default = DerivativeStencil::default();
    let st = stencil.unwrap_or(&default);
    let fine = 2 * grid_n;
    let h = TAU / fine as f64;
    let mut coarse_sum = alloc::vec![0.0; len];
    let mut fine_sum = alloc::vec![0.0; len];
    let mut max_abs = alloc::vec![0.0f64; len];
    for i in 0..fine {
        for j in 0..fine {
            let vals = f(st, i as f64 * h, j as f64 * h)?;
            if vals.len() != len {
                return Err(GeomError::DimensionMismatch { expected: len, found: vals.len() });
            }
            for k in 0..len {
                let x = vals[k];
                if !x.is_finite() {
                    return Err(GeomError::NonFinite("torus integrand"));
                }
                fine_sum[k] += x;
                max_abs[k] = max_abs[k].max(abs(x));
                if i % 2 == 0 && j % 2 == 0 {
                    coarse_sum[k] += x;
                }
            }
        }
    }
    let area = TAU * TAU;
    let mut stencil_err = alloc::vec![0.0f64; len];
    if let Some(st) = stencil {
        let wide = st.scaled(2.0);
        let hp = TAU / STENCIL_PROBE as f64;
        for i in 0..STENCIL_PROBE {
            for j in 0..STENCIL_PROBE {
                let (u, v) = ((i as f64 + 0.5) * hp, (j as f64 + 0.5) * hp);
                let a = f(st, u, v)?;
                let b = f(&wide, u, v)?;
                for k in 0..len {
                    stencil_err[k] = stencil_err[k].max(abs(a[k] - b[k]));
                }
            }
        }
    }
    let w_fine = area / (fine * fine) as f64;
    let w_coarse = area / (grid_n * grid_n) as f64;
    Ok((0..len)
        .map(|k| {
            let value = fine_sum[k] * w_fine;
            let quad = abs(value - coarse_sum[k] * w_coarse);
            let error = quad + area * stencil_err[k] + ERROR_FLOOR * area * max_abs[k].max(1.0);
            QuadratureEstimate { value, error }
        })
        .collect())
}

/// Hypothesis residuals of a torus: how far the frame is from parallel and
/// the torus from flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusResidual {
    /// `max |∇⁰_X X|, |∇⁰_X Y|, |∇⁰_Y Y|` (`g0`-norms).
    pub geodesic: f64,
    /// `max |R0(X,Y,Y,X)|`.
    pub ambient_flatness: f64,
}

impl TorusResidual {
    pub fn max(&self) -> f64 {
        self.geodesic.max(self.ambient_flatness)
    }
}

/// Residuals of the totally geodesic flat hypothesis on a 16×16 grid.
pub fn check_totally_geodesic_flat(g0: &MetricField, torus: &TorusImmersion, stencil: &DerivativeStencil) -> Result<TorusResidual> {
    let m = 16;
    let mut res = TorusResidual { geodesic: 0.0, ambient_flatness: 0.0 };
    for i in 0..m {
        for j in 0..m {
            let (u, v) = (TAU * i as f64 / m as f64, TAU * j as f64 / m as f64);
            let x = torus.coords(u, v);
            let gm = g0.matrix(&x);
            let gamma = calculus::christoffel_raw(g0, &x, stencil)?;
            for d in torus.frame_covariant(&gamma, u, v, stencil) {
                res.geodesic = res.geodesic.max(sqrt(gm.bilinear(&d, &d).max(0.0)));
            }
            let (xv, yv) = torus.frame_at(u, v);
            let r = calculus::curvature_xyyx_raw(g0, &x, &xv, &yv, stencil)?;
            res.ambient_flatness = res.ambient_flatness.max(abs(r));
        }
    }
    Ok(res)
}

/// Both sides of the first-order identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderReport {
    /// `∫ R'_0(X,Y,Y,X) / |X∧Y|_1`.
    pub lhs: QuadratureEstimate,
    /// `∫ [g1((∇¹_X X)^T, (∇¹_Y Y)^T) − |(∇¹_X Y)^T|²_1] / |X∧Y|_1`.
    pub rhs: QuadratureEstimate,
    /// `lhs` with weight `1/|X∧Y|_1²`.
    pub lhs_squared_weight: QuadratureEstimate,
    /// `rhs` with weight `1/|X∧Y|_1²`.
    pub rhs_squared_weight: QuadratureEstimate,
    /// `∫ R'_0(X,Y,Y,X) du dv`.
    pub unweighted: QuadratureEstimate,
}

impl FirstOrderReport {
    pub fn holds(&self) -> bool {
        self.lhs.agrees_with(&self.rhs)
    }
}

/// `g1`-orthogonal projection of `w` onto `span{X, Y}`.
fn tangential(g1: &Matrix, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let gram = Matrix::from_vec(2, 2, alloc::vec![g1.bilinear(x, x), g1.bilinear(x, y), g1.bilinear(x, y), g1.bilinear(y, y)]);
    let c = gram.solve(&[g1.bilinear(x, w), g1.bilinear(y, w)])?;
    Ok(linalg::add(&linalg::scale(x, c[0]), &linalg::scale(y, c[1])))
}

/// Point values `[lhs, rhs, lhs², rhs², R'0, d^2.., S_2.., d^2·dA0..]` used
/// by the first-order and r-order integrals.
fn variation_sample(
    path: &BlendPath,
    torus: &TorusImmersion,
    r_max: u32,
    st: &DerivativeStencil,
    u: f64,
    v: f64,
) -> Result<Vec<f64>> {
    let x = torus.coords(u, v);
    let (xv, yv) = torus.frame_at(u, v);
    let terms = BlendTerms::compute(path, &x, &xv, &yv, st)?;
    let d1 = terms.derivative(1)?;
    let gamma1 = calculus::christoffel_raw(path.g1(), &x, st)?;
    let [nxx, nxy, nyy] = torus.frame_covariant(&gamma1, u, v, st);
    let g1 = &terms.g1;
    let (txx, txy, tyy) = (tangential(g1, &xv, &yv, &nxx)?, tangential(g1, &xv, &yv, &nxy)?, tangential(g1, &xv, &yv, &nyy)?);
    let top = g1.bilinear(&txx, &tyy) - g1.bilinear(&txy, &txy);
    let w1 = calculus::wedge_norm_sq(g1, &xv, &yv);
    let a1 = sqrt(w1);
    let a0 = sqrt(calculus::wedge_norm_sq(&terms.g0, &xv, &yv));
    let mut out = alloc::vec![d1 / a1, top / a1, d1 / w1, top / w1, d1];
    let mut s_vals = Vec::new();
    let mut d_vals = Vec::new();
    let mut area_vals = Vec::new();
    for r in 2..=r_max {
        let d = terms.derivative(r)?;
        d_vals.push(d);
        s_vals.push(terms.s_r(r)?);
        area_vals.push(d * a0);
    }
    out.extend(d_vals);
    out.extend(s_vals);
    out.extend(area_vals);
    Ok(out)
}

/// Bound on [`check_totally_geodesic_flat`] required by
/// [`first_order_average`] and [`r_order_average`].
pub const HYPOTHESIS_TOL: f64 = 1e-5;

fn require_hypothesis(g0: &MetricField, torus: &TorusImmersion, stencil: &DerivativeStencil) -> Result<()> {
    let res = check_totally_geodesic_flat(g0, torus, stencil)?;
    if res.max() > HYPOTHESIS_TOL {
        return Err(contract(alloc::format!(
            "torus {} is not totally geodesic and flat (residual {:.3e})",
            torus.label(),
            res.max()
        )));
    }
    Ok(())
}

/// The first-order identity on a totally geodesic flat torus.
pub fn first_order_average(path: &BlendPath, torus: &TorusImmersion, grid_n: usize, stencil: &DerivativeStencil) -> Result<FirstOrderReport> {
    require_hypothesis(path.g0(), torus, stencil)?;
    let v = integrate_fields(|st, u, v| variation_sample(path, torus, 1, st, u, v), 5, grid_n, Some(stencil))?;
    Ok(FirstOrderReport { lhs: v[0], rhs: v[1], lhs_squared_weight: v[2], rhs_squared_weight: v[3], unweighted: v[4] })
}

/// One order `r ≥ 2` of the report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationEntry {
    pub r: u32,
    /// `∫ d^r/dt^r R_0(X,Y,Y,X) du dv`.
    pub derivative: QuadratureEstimate,
    /// The same integrand against the `g0`-area element.
    pub derivative_area: QuadratureEstimate,
    /// `∫ S_r(X, Y) du dv`.
    pub s_p_r: QuadratureEstimate,
    pub verdict: Verdict,
    pub s_verdict: Verdict,
}

impl VariationEntry {
    /// Signs opposite, or both integrals zero.
    pub fn equivalence_holds(&self) -> bool {
        self.verdict == self.s_verdict.opposite()
    }
}

/// Every order `2..=r_max` in one pass over the grid. The torus hypotheses
/// are not checked.
pub fn r_order_averages(
    path: &BlendPath,
    torus: &TorusImmersion,
    r_max: u32,
    grid_n: usize,
    stencil: &DerivativeStencil,
) -> Result<(FirstOrderReport, Vec<VariationEntry>)> {
    if r_max < 2 || r_max > crate::blend::MAX_ORDER {
        return Err(contract(alloc::format!("r_max = {r_max} outside 2..={}", crate::blend::MAX_ORDER)));
    }
    let k = (r_max - 1) as usize;
    let vals = integrate_fields(|st, u, v| variation_sample(path, torus, r_max, st, u, v), 5 + 3 * k, grid_n, Some(stencil))?;
    let first = FirstOrderReport { lhs: vals[0], rhs: vals[1], lhs_squared_weight: vals[2], rhs_squared_weight: vals[3], unweighted: vals[4] };
    let entries = (0..k)
        .map(|i| {
            let (d, s, a) = (vals[5 + i], vals[5 + k + i], vals[5 + 2 * k + i]);
            VariationEntry { r: i as u32 + 2, derivative: d, derivative_area: a, s_p_r: s, verdict: d.verdict(), s_verdict: s.verdict() }
        })
        .collect();
    Ok((first, entries))
}

/// A single order `r ≥ 2` on a totally geodesic flat torus.
pub fn r_order_average(path: &BlendPath, torus: &TorusImmersion, r: u32, grid_n: usize, stencil: &DerivativeStencil) -> Result<VariationEntry> {
    require_hypothesis(path.g0(), torus, stencil)?;
    let (_, entries) = r_order_averages(path, torus, r, grid_n, stencil)?;
    Ok(*entries.last().expect("r ≥ 2 gives at least one entry"))
}

/// `∫ K dA` of the induced metric; zero for any torus.
pub fn gauss_bonnet_check(g: &MetricField, torus: &TorusImmersion, grid_n: usize, stencil: &DerivativeStencil) -> Result<QuadratureEstimate> {
    let induced = torus.induced_metric(g)?;
    let r = integrate_fields(
        |st, u, v| {
            let w = [u, v];
            let m = induced.matrix(&w);
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(0, 1)];
            if !(det > 0.0) {
                return Err(GeomError::Degenerate("induced metric is degenerate"));
            }
            let r = calculus::curvature_xyyx_raw(&induced, &w, &[1.0, 0.0], &[0.0, 1.0], st)?;
            Ok(alloc::vec![r / sqrt(det)])
        },
        1,
        grid_n,
        Some(stencil),
    )?;
    Ok(r[0])
}

/// Integral of the Cheeger limit integrand over a torus.
pub fn cheeger_limit_average(action: &GroupAction, torus: &TorusImmersion, grid_n: usize, stencil: &DerivativeStencil) -> Result<QuadratureEstimate> {
    let r = integrate_fields(
        |st, u, v| {
            let p = torus.point(u, v)?;
            let (xv, yv) = torus.frame_at(u, v);
            let x = TangentVector::new(p.clone(), xv)?;
            let y = TangentVector::new(p.clone(), yv)?;
            Ok(alloc::vec![cheeger::cheeger_limit_condition(action, &p, &x, &y, st)?])
        },
        1,
        grid_n,
        Some(stencil),
    )?;
    Ok(r[0])
}

/// Hypothesis residuals, first-order identity and per-order verdicts on one torus.
/// Hypotheses are measured and reported, not required.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub residual: TorusResidual,
    pub first_order: FirstOrderReport,
    pub entries: Vec<VariationEntry>,
    /// `∫` of the Cheeger limit integrand, when an action was supplied.
    pub cheeger: Option<QuadratureEstimate>,
}

impl VariationReport {
    pub fn r_values(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.r).collect()
    }

    /// First-order hypothesis `∫ R'_0 = 0` within the zero band.
    pub fn first_order_vanishes(&self) -> bool {
        self.first_order.unweighted.verdict() == Verdict::Zero
    }

    /// Sign equivalence at every order.
    pub fn equivalence_holds(&self) -> bool {
        self.entries.iter().all(VariationEntry::equivalence_holds)
    }
}

pub fn theorem_a_verdict(
    path: &BlendPath,
    torus: &TorusImmersion,
    r_max: u32,
    grid_n: usize,
    stencil: &DerivativeStencil,
    action: Option<&GroupAction>,
) -> Result<VariationReport> {
    let residual = check_totally_geodesic_flat(path.g0(), torus, stencil)?;
    let (first_order, entries) = r_order_averages(path, torus, r_max, grid_n, stencil)?;
    let cheeger = match action {
        Some(a) => Some(cheeger_limit_average(a, torus, grid_n, stencil)?),
        None => None,
    };
    Ok(VariationReport { residual, first_order, entries, cheeger })
}
