//! Christoffel symbols, covariant derivatives and the Riemann tensor.
//!
//! Sign convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` and
//! `R(X,Y,Z,W) = g(R(X,Y)Z, W)`, so the unit sphere has `R(X,Y,Y,X) > 0`.

use alloc::vec::Vec;

use crate::chart::{Point, TangentVector};
use crate::error::{GeomError, Result};
use crate::linalg::{self, Matrix};
use crate::metric::{MetricField, VectorField};
use crate::stencil::DerivativeStencil;

/// Christoffel symbols `Γ^k_{ij}` at one point, stored `[k][i][j]`.
///
/// Also used for any symmetric (1,2) array, e.g. a connection difference.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel { n, data: alloc::vec![0.0; n * n * n] }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n * n);
        Christoffel { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[(k * n + i) * n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// The vector `Γ(x, y)^k = Γ^k_{ij} x^i y^j`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = alloc::vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                let row = &self.data[(k * n + i) * n..(k * n + i + 1) * n];
                s += x[i] * linalg::dot(row, y);
            }
            *o = s;
        }
        out
    }

    /// The matrix of `v ↦ Γ(x, v)`.
    pub fn contract_left(&self, x: &[f64]) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |k, j| (0..n).map(|i| x[i] * self.get(k, i, j)).sum())
    }

    pub fn sub(&self, other: &Christoffel) -> Christoffel {
        Christoffel { n: self.n, data: linalg::sub(&self.data, &other.data) }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::norm_inf(&self.data)
    }

    /// Largest `|Γ^k_{ij} − Γ^k_{ji}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..i {
                    m = m.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        m
    }
}

/// Partial derivatives `∂_l g` at raw coordinates, one matrix per `l`.
pub fn metric_derivatives(g: &MetricField, x: &[f64], stencil: &DerivativeStencil) -> Vec<Matrix> {
    let n = g.dim();
    (0..n)
        .map(|l| {
            let d = stencil.first(
                |e| {
                    let mut y = x.to_vec();
                    y[l] += e;
                    g.matrix(&y).into_vec()
                },
                n * n,
            );
            Matrix::from_vec(n, n, d)
        })
        .collect()
}

/// Christoffel symbols at raw coordinates, no domain check.
pub fn christoffel_raw(g: &MetricField, x: &[f64], stencil: &DerivativeStencil) -> Result<Christoffel> {
    let n = g.dim();
    let ginv = g.matrix(x).inverse()?;
    let dg = metric_derivatives(g, x, stencil);
    // first kind: [ij, l] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = alloc::vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..=i {
            for l in 0..n {
                let v = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                first[(i * n + j) * n + l] = v;
                first[(j * n + i) * n + l] = v;
            }
        }
    }
    let mut gamma = Christoffel::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..=i {
                let base = (i * n + j) * n;
                let v: f64 = (0..n).map(|l| ginv[(k, l)] * first[base + l]).sum();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols of `g` at `p`.
pub fn christoffel(g: &MetricField, p: &Point, stencil: &DerivativeStencil) -> Result<Christoffel> {
    let m = g.metric_at(p)?;
    m.lu().map_err(|_| GeomError::Singular("metric matrix"))?;
    christoffel_raw(g, p.coords(), stencil)
}

/// Derivative of the Christoffel array along direction `v` at raw coordinates.
pub fn christoffel_directional(
    g: &MetricField,
    x: &[f64],
    v: &[f64],
    stencil: &DerivativeStencil,
) -> Result<Christoffel> {
    let n = g.dim();
    let s = linalg::norm_inf(v);
    if s == 0.0 {
        return Ok(Christoffel::zeros(n));
    }
    let dir = linalg::scale(v, 1.0 / s);
    let failure = core::cell::RefCell::new(None);
    let d = stencil.nested(
        |e| match christoffel_raw(g, &linalg::axpy(x, e, &dir), stencil) {
            Ok(c) => c.data,
            Err(err) => {
                *failure.borrow_mut() = Some(err);
                alloc::vec![0.0; n * n * n]
            }
        },
        n * n * n,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(Christoffel { n, data: linalg::scale(&d, s) })
}

/// `(∇_X Y)` at raw coordinates for vector fields `X`, `Y`.
pub fn covariant_derivative_raw(
    g: &MetricField,
    xf: &VectorField,
    yf: &VectorField,
    x: &[f64],
    stencil: &DerivativeStencil,
) -> Result<Vec<f64>> {
    let n = g.dim();
    let xv = xf.eval(x);
    let yv = yf.eval(x);
    g.chart().check_len(xv.len())?;
    g.chart().check_len(yv.len())?;
    let s = linalg::norm_inf(&xv);
    let mut out = christoffel_raw(g, x, stencil)?.contract(&xv, &yv);
    if s > 0.0 {
        let dir = linalg::scale(&xv, 1.0 / s);
        let dy = stencil.first(|e| yf.eval(&linalg::axpy(x, e, &dir)), n);
        out = linalg::axpy(&out, s, &dy);
    }
    Ok(out)
}

/// `∇_X Y` at `p`.
pub fn covariant_derivative(
    g: &MetricField,
    xf: &VectorField,
    yf: &VectorField,
    p: &Point,
    stencil: &DerivativeStencil,
) -> Result<TangentVector> {
    g.metric_at(p)?;
    let v = covariant_derivative_raw(g, xf, yf, p.coords(), stencil)?;
    TangentVector::new(p.clone(), v)
}

/// Matrix of the endomorphism `Z ↦ R(X,Y)Z` at raw coordinates.
pub fn curvature_operator_raw(
    g: &MetricField,
    x: &[f64],
    xv: &[f64],
    yv: &[f64],
    stencil: &DerivativeStencil,
) -> Result<Matrix> {
    let gamma = christoffel_raw(g, x, stencil)?;
    let dx = christoffel_directional(g, x, xv, stencil)?;
    let dy = christoffel_directional(g, x, yv, stencil)?;
    let gx = gamma.contract_left(xv);
    let gy = gamma.contract_left(yv);
    Ok(dx.contract_left(yv).sub(&dy.contract_left(xv)).add(&gx.mul(&gy)).sub(&gy.mul(&gx)))
}

/// `R(X,Y,Z,W)` at raw coordinates.
pub fn riemann_raw(
    g: &MetricField,
    x: &[f64],
    vecs: [&[f64]; 4],
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let [xv, yv, zv, wv] = vecs;
    let r = curvature_operator_raw(g, x, xv, yv, stencil)?;
    Ok(g.matrix(x).bilinear(&r.mul_vec(zv), wv))
}

/// `R(X,Y,Y,X)` at raw coordinates.
pub fn curvature_xyyx_raw(g: &MetricField, x: &[f64], xv: &[f64], yv: &[f64], stencil: &DerivativeStencil) -> Result<f64> {
    riemann_raw(g, x, [xv, yv, yv, xv], stencil)
}

pub(crate) fn check_vectors(g: &MetricField, p: &Point, vs: &[&TangentVector]) -> Result<()> {
    for v in vs {
        g.chart().check_len(v.components.len())?;
        if g.chart().coord_distance(v.base.coords(), p.coords()) > 1e-12 {
            return Err(crate::error::contract("tangent vector based at a different point"));
        }
    }
    Ok(())
}

/// `R(X,Y,Z,W)` at `p`.
pub fn riemann(
    g: &MetricField,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    z: &TangentVector,
    w: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    g.metric_at(p)?;
    check_vectors(g, p, &[x, y, z, w])?;
    riemann_raw(g, p.coords(), [x.components(), y.components(), z.components(), w.components()], stencil)
}

/// `g(X,X) g(Y,Y) − g(X,Y)²`.
pub fn wedge_norm_sq(gm: &Matrix, xv: &[f64], yv: &[f64]) -> f64 {
    let xx = gm.bilinear(xv, xv);
    let yy = gm.bilinear(yv, yv);
    let xy = gm.bilinear(xv, yv);
    xx * yy - xy * xy
}

/// Relative threshold below which two vectors count as dependent.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Sectional curvature of the plane spanned by `X`, `Y`.
pub fn sectional(
    g: &MetricField,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let gm = g.metric_at(p)?;
    check_vectors(g, p, &[x, y])?;
    let (xv, yv) = (x.components(), y.components());
    let area = wedge_norm_sq(&gm, xv, yv);
    if !(area > DEGENERACY_TOL * gm.bilinear(xv, xv) * gm.bilinear(yv, yv)) {
        return Err(GeomError::Degenerate("X and Y are linearly dependent"));
    }
    Ok(curvature_xyyx_raw(g, p.coords(), xv, yv, stencil)? / area)
}
