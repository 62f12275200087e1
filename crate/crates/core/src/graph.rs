//! The diagonal `Ξ : M → (M × M, (1−t) g0 × t g1)`, `p ↦ (p, p)`.
//!
//! Its induced metric is the blend `(1−t) g0 + t g1`, so the blend
//! curvature is the Gauss equation of `Ξ`. Tangent vectors of the image are
//! `χ(X) = (X, X)`; normal vectors are `χ'(Y) = (−P̃Y, Y)` with
//! `P̃ = t/(1−t) P`.

use alloc::vec::Vec;

use crate::blend::{self, BlendPath, PTensor};
use crate::calculus;
use crate::chart::{Point, TangentVector};
use crate::error::{contract, GeomError, Result};
use crate::linalg::{self, Matrix};
use crate::metric::MetricField;
use crate::stencil::DerivativeStencil;

/// A point of `M × M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    pub left: Point,
    pub right: Point,
}

impl ProductPoint {
    /// `(p, p)`.
    pub fn diagonal(p: &Point) -> Self {
        ProductPoint { left: p.clone(), right: p.clone() }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.left.coords().to_vec();
        c.extend_from_slice(self.right.coords());
        c
    }
}

/// A tangent vector of `M × M` split into its two factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVector {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl SplitVector {
    pub fn new(left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(GeomError::DimensionMismatch { expected: left.len(), found: right.len() });
        }
        Ok(SplitVector { left, right })
    }

    pub fn dim(&self) -> usize {
        self.left.len()
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut c = self.left.clone();
        c.extend_from_slice(&self.right);
        c
    }

    pub fn from_concat(v: &[f64]) -> Self {
        let n = v.len() / 2;
        SplitVector { left: v[..n].to_vec(), right: v[n..].to_vec() }
    }

    pub fn add(&self, other: &SplitVector) -> SplitVector {
        SplitVector { left: linalg::add(&self.left, &other.left), right: linalg::add(&self.right, &other.right) }
    }

    pub fn scale(&self, c: f64) -> SplitVector {
        SplitVector { left: linalg::scale(&self.left, c), right: linalg::scale(&self.right, c) }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::norm_inf(&self.left).max(linalg::norm_inf(&self.right))
    }
}

/// `χ(X) = (X, X)`.
pub fn chi(x: &TangentVector) -> SplitVector {
    SplitVector { left: x.components.clone(), right: x.components.clone() }
}

fn check_p(p: &PTensor, len: usize) -> Result<()> {
    if p.matrix.rows() != len {
        return Err(GeomError::DimensionMismatch { expected: p.matrix.rows(), found: len });
    }
    Ok(())
}

/// `χ'(Y) = (−PY, Y)`.
pub fn chi_prime(y: &TangentVector, p: &PTensor) -> Result<SplitVector> {
    check_p(p, y.components.len())?;
    Ok(SplitVector { left: linalg::scale(&p.matrix.mul_vec(&y.components), -1.0), right: y.components.clone() })
}

fn one_plus_inverse(p: &PTensor) -> Result<Matrix> {
    let n = p.matrix.rows();
    Matrix::identity(n).add(&p.matrix).inverse().map_err(|_| GeomError::Singular("1 + P"))
}

/// Recovers `(X, Y)` from `χ(X) + χ'(Y)`.
///
/// The inverse of `(X, Y) ↦ (X − PY, X + Y)` is `[[O, PO], [−O, O]]` with
/// `O = (1 + P)⁻¹`.
pub fn chi_chi_prime_inverse(v: &SplitVector, p: &PTensor) -> Result<(Vec<f64>, Vec<f64>)> {
    check_p(p, v.dim())?;
    let o = one_plus_inverse(p)?;
    let po = p.matrix.mul(&o);
    let x = linalg::add(&o.mul_vec(&v.left), &po.mul_vec(&v.right));
    let y = o.mul_vec(&linalg::sub(&v.right, &v.left));
    Ok((x, y))
}

/// Projection onto the normal space `χ'(TM)` along `χ(TM)`:
/// `[[PO, −PO], [−O, O]]`.
pub fn normal_projection(v: &SplitVector, p: &PTensor) -> Result<SplitVector> {
    check_p(p, v.dim())?;
    let o = one_plus_inverse(p)?;
    let y = o.mul_vec(&linalg::sub(&v.right, &v.left));
    Ok(SplitVector { left: linalg::scale(&p.matrix.mul_vec(&y), -1.0), right: y })
}

fn check_interior(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(contract(alloc::format!("graph immersion needs 0 < t < 1, got {t}")));
    }
    Ok(())
}

/// `P̃ = t/(1−t) P` at `p`.
pub fn scaled_p(path: &BlendPath, t: f64, p: &Point) -> Result<PTensor> {
    check_interior(t)?;
    Ok(blend::p_tensor(path, p)?.scaled(t / (1.0 - t)))
}

/// The metric `(1−t) g0 × t g1` on the product chart.
pub fn product_metric(path: &BlendPath, t: f64) -> Result<MetricField> {
    path.g0().product(1.0 - t, path.g1(), t)
}

/// Inner product of `(1−t) g0 × t g1` at the diagonal point over `p`.
pub fn product_inner(path: &BlendPath, t: f64, p: &Point, v: &SplitVector, w: &SplitVector) -> Result<f64> {
    let g0 = path.g0().metric_at(p)?;
    let g1 = path.g1().metric_at(p)?;
    Ok((1.0 - t) * g0.bilinear(&v.left, &w.left) + t * g1.bilinear(&v.right, &w.right))
}

/// Matrix of `Ξ^*((1−t) g0 × t g1)` in the coordinate basis.
pub fn pullback_metric(path: &BlendPath, t: f64, p: &Point) -> Result<Matrix> {
    let n = path.dim();
    let basis: Vec<SplitVector> = (0..n)
        .map(|i| {
            let mut e = alloc::vec![0.0; n];
            e[i] = 1.0;
            SplitVector { left: e.clone(), right: e }
        })
        .collect();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = product_inner(path, t, p, &basis[i], &basis[j])?;
        }
    }
    Ok(m)
}

/// `⟨II(X,Y), II(X',Y')⟩ = t g1((1 + P̃)⁻¹ D(X,Y), D(X',Y'))`.
pub fn shape_inner(
    path: &BlendPath,
    t: f64,
    p: &Point,
    vecs: [&TangentVector; 4],
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let pt = scaled_p(path, t, p)?;
    let d = blend::connection_diff(path, p, stencil)?;
    let [x, y, x2, y2] = vecs;
    let o = one_plus_inverse(&pt)?;
    let g1 = path.g1().metric_at(p)?;
    let a = o.mul_vec(&d.apply(&x.components, &y.components));
    Ok(t * g1.bilinear(&a, &d.apply(&x2.components, &y2.components)))
}

/// Second fundamental form of the diagonal, computed in the product chart:
/// the normal part of `∇_{χX} χY` for coordinate-constant extensions.
pub fn second_fundamental_form_direct(
    path: &BlendPath,
    t: f64,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<SplitVector> {
    let pt = scaled_p(path, t, p)?;
    let prod = product_metric(path, t)?;
    let gamma = calculus::christoffel_raw(&prod, &ProductPoint::diagonal(p).coords(), stencil)?;
    let nabla = gamma.contract(&chi(x).concat(), &chi(y).concat());
    normal_projection(&SplitVector::from_concat(&nabla), &pt)
}

/// [`shape_inner`] through the direct second fundamental form.
pub fn shape_inner_direct(
    path: &BlendPath,
    t: f64,
    p: &Point,
    vecs: [&TangentVector; 4],
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let [x, y, x2, y2] = vecs;
    let a = second_fundamental_form_direct(path, t, p, x, y, stencil)?;
    let b = second_fundamental_form_direct(path, t, p, x2, y2, stencil)?;
    product_inner(path, t, p, &a, &b)
}

/// Gauss equation of the diagonal:
/// `(1−t) R0 + t R1 + ⟨II(X,X), II(Y,Y)⟩ − |II(X,Y)|²`.
pub fn gauss_assembly(
    path: &BlendPath,
    t: f64,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_interior(t)?;
    let xc = p.coords();
    let r0 = calculus::curvature_xyyx_raw(path.g0(), xc, &x.components, &y.components, stencil)?;
    let r1 = calculus::curvature_xyyx_raw(path.g1(), xc, &x.components, &y.components, stencil)?;
    let s1 = shape_inner(path, t, p, [x, x, y, y], stencil)?;
    let s2 = shape_inner(path, t, p, [x, y, x, y], stencil)?;
    Ok((1.0 - t) * r0 + t * r1 + s1 - s2)
}
