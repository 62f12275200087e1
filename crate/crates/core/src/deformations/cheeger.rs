//! Cheeger deformations along an isometric group action.
//!
//! Vertical vectors are written in the Killing frame `K_1..K_k`:
//! `V = Σ a_i K_i`. With `G_K = (g0(K_i, K_j))` and a bi-invariant `Q`, the
//! orbit tensor is `O = Q⁻¹ G_K`, and
//!
//! ```text
//! g_s(X, Y) = g0(X^H, Y^H) + (CX)ᵀ (G_K⁻¹ + s Q⁻¹)⁻¹ (CY),   C = G_K⁻¹ Kᵀ G0
//! ```
//!
//! which is `g0(P_s X, Y)` with `P_s|_V = (1 + sO)⁻¹`.
//!
//! `∇^Q` is the Levi-Civita connection of the leaf metric that makes the
//! Killing frame `Q`-orthonormal in the sense `g^Q(K_i, K_j) = Q_ij`. As
//! `s → ∞` the vertical part of `∇^s` on vertical fields tends to `∇^Q`.

use alloc::vec::Vec;

use crate::calculus;
use crate::chart::{Point, TangentVector};
use crate::error::{contract, GeomError, Result};
use crate::foliation::FoliationStructure;
use crate::linalg::{self, Matrix};
use crate::metric::{MetricField, VectorField};
use crate::stencil::DerivativeStencil;

/// Sample count for the Killing and bracket checks.
const SAMPLE_COUNT: usize = 16;

/// Deformation parameters of the large-`s` extrapolation oracle.
pub const EXTRAPOLATION_S: (f64, f64) = (1e3, 1e4);

/// An isometric action given by Killing fields and their structure constants.
#[derive(Debug, Clone)]
pub struct GroupAction {
    foliation: FoliationStructure,
    /// `[K_i, K_j] = Σ_l c[(i k + j) k + l] K_l`.
    structure: Vec<f64>,
    q: Matrix,
}

/// `O` at a point, in the Killing basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTensor {
    pub base: Point,
    pub matrix: Matrix,
}

/// `(ℒ_K g)_{ab} = K(g_ab) + g(∂_a K, e_b) + g(e_a, ∂_b K)` at `x`.
pub fn lie_derivative_of_metric(g: &MetricField, k: &VectorField, x: &[f64], stencil: &DerivativeStencil) -> Matrix {
    let n = x.len();
    let kv = k.eval(x);
    let gm = g.matrix(x);
    let s = linalg::norm_inf(&kv);
    let dg = if s == 0.0 {
        Matrix::zeros(n, n)
    } else {
        let dir = linalg::scale(&kv, 1.0 / s);
        Matrix::from_vec(n, n, stencil.first(|e| g.matrix(&linalg::axpy(x, e, &dir)).into_vec(), n * n)).scale(s)
    };
    // jac[(c, a)] = ∂_a K^c
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            stencil.first(
                |e| {
                    let mut y = x.to_vec();
                    y[a] += e;
                    k.eval(&y)
                },
                n,
            )
        })
        .collect();
    let jac = Matrix::from_columns(&cols);
    let gj = gm.mul(&jac);
    dg.add(&gj).add(&gj.transpose())
}

impl GroupAction {
    /// Validates the Killing property, the structure constants, `Q > 0` and
    /// ad-invariance of `Q`.
    pub fn new(
        g0: MetricField,
        killing: Vec<VectorField>,
        structure: Vec<f64>,
        q: Matrix,
        stencil: &DerivativeStencil,
    ) -> Result<Self> {
        let k = killing.len();
        if structure.len() != k * k * k {
            return Err(GeomError::DimensionMismatch { expected: k * k * k, found: structure.len() });
        }
        if q.rows() != k || q.cols() != k {
            return Err(GeomError::DimensionMismatch { expected: k, found: q.rows() });
        }
        let ev = q.symmetrize().symmetric_eigenvalues();
        if !(ev[0] > 0.0) || q.sub(&q.transpose()).max_abs() > 1e-12 {
            return Err(GeomError::NotPositiveDefinite { min_eigenvalue: ev[0] });
        }
        let action = GroupAction { foliation: FoliationStructure::new(g0, killing, stencil)?, structure, q };
        let defect = action.ad_invariance_defect();
        if defect > 1e-10 {
            return Err(contract(alloc::format!("Q is not ad-invariant (defect {defect:.3e})")));
        }
        for p in action.metric().chart().sample_points(SAMPLE_COUNT) {
            let x = p.coords();
            for (i, kf) in action.killing().iter().enumerate() {
                let residual = lie_derivative_of_metric(action.metric(), kf, x, stencil).max_abs();
                if residual > 1e-6 {
                    return Err(GeomError::NotKilling { field: i, residual });
                }
            }
            let kx = action.foliation.frame_matrix(x);
            for i in 0..k {
                for j in 0..i {
                    let br = crate::foliation::bracket(&action.killing()[i], &action.killing()[j], x, stencil);
                    let want = kx.mul_vec(&action.bracket_coefficients(&unit(k, i), &unit(k, j)));
                    let residual = linalg::norm_inf(&linalg::sub(&br, &want));
                    if residual > 1e-6 {
                        return Err(contract(alloc::format!(
                            "structure constants disagree with [K_{i}, K_{j}] (residual {residual:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(action)
    }

    pub fn metric(&self) -> &MetricField {
        self.foliation.metric()
    }

    pub fn foliation(&self) -> &FoliationStructure {
        &self.foliation
    }

    pub fn killing(&self) -> &[VectorField] {
        self.foliation.frame()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn rank(&self) -> usize {
        self.q.rows()
    }

    /// Coefficients of `[Σ a_i K_i, Σ b_j K_j]` for constant `a`, `b`.
    pub fn bracket_coefficients(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let k = self.rank();
        let mut out = alloc::vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                let w = a[i] * b[j];
                if w == 0.0 {
                    continue;
                }
                for (l, o) in out.iter_mut().enumerate() {
                    *o += w * self.structure[(i * k + j) * k + l];
                }
            }
        }
        out
    }

    /// `max |Q([a,b],c) + Q(b,[a,c])|` over basis triples.
    pub fn ad_invariance_defect(&self) -> f64 {
        let k = self.rank();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let (ea, eb, ec) = (unit(k, a), unit(k, b), unit(k, c));
                    let lhs = self.q.bilinear(&self.bracket_coefficients(&ea, &eb), &ec)
                        + self.q.bilinear(&eb, &self.bracket_coefficients(&ea, &ec));
                    worst = worst.max(lhs.abs());
                }
            }
        }
        worst
    }

    /// `G_K = Kᵀ G0 K` at `x`.
    pub fn killing_gram(&self, x: &[f64]) -> Matrix {
        let kx = self.foliation.frame_matrix(x);
        kx.transpose().mul(&self.metric().matrix(x)).mul(&kx)
    }

    /// `C = G_K⁻¹ Kᵀ G0`: Killing coefficients of the vertical part.
    pub fn coefficient_map(&self, x: &[f64]) -> Result<Matrix> {
        let kx = self.foliation.frame_matrix(x);
        let gk = self.killing_gram(x);
        gk.lu()?.solve_matrix(&kx.transpose().mul(&self.metric().matrix(x)))
    }

    /// `O = Q⁻¹ G_K` at `x`.
    pub fn orbit_matrix(&self, x: &[f64]) -> Result<Matrix> {
        self.q.lu()?.solve_matrix(&self.killing_gram(x))
    }

    /// Vector field with Killing coefficients `a(x)`.
    fn field_from_coefficients(&self, a: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> VectorField {
        let f = self.foliation.clone();
        VectorField::new(move |x| f.frame_matrix(x).mul_vec(&a(x)))
    }

    /// Killing coefficients of `∇^Q_U V` at `x`, where `U`, `V` have
    /// coefficient functions `a`, `b`, from the Koszul formula for the leaf
    /// metric `Q` in the Killing frame.
    pub fn nabla_q(
        &self,
        x: &[f64],
        a: &dyn Fn(&[f64]) -> Vec<f64>,
        b: &dyn Fn(&[f64]) -> Vec<f64>,
        stencil: &DerivativeStencil,
    ) -> Result<Vec<f64>> {
        let k = self.rank();
        let kx = self.foliation.frame_matrix(x);
        let (av, bv) = (a(x), b(x));
        let along = |w: &[f64], f: &dyn Fn(&[f64]) -> Vec<f64>| -> Vec<f64> {
            let s = linalg::norm_inf(w);
            if s == 0.0 {
                return alloc::vec![0.0; k];
            }
            let dir = linalg::scale(w, 1.0 / s);
            linalg::scale(&stencil.first(|e| f(&linalg::axpy(x, e, &dir)), k), s)
        };
        let u_vec = kx.mul_vec(&av);
        let v_vec = kx.mul_vec(&bv);
        let u_b = along(&u_vec, b);
        let v_a = along(&v_vec, a);
        // coefficients of [U, V]
        let uv = linalg::add(&linalg::sub(&u_b, &v_a), &self.bracket_coefficients(&av, &bv));
        let q = &self.q;
        let mut rhs = alloc::vec![0.0; k];
        for (l, r) in rhs.iter_mut().enumerate() {
            let el = unit(k, l);
            let kl = kx.column(l);
            let kl_a = along(&kl, a);
            let kl_b = along(&kl, b);
            // K_l(Q(a, b)) = Q(K_l a, b) + Q(a, K_l b)
            let kl_ab = q.bilinear(&kl_a, &bv) + q.bilinear(&av, &kl_b);
            let u_kl = linalg::sub(&self.bracket_coefficients(&av, &el), &kl_a);
            let v_kl = linalg::sub(&self.bracket_coefficients(&bv, &el), &kl_b);
            *r = q.bilinear(&u_b, &el) + q.bilinear(&v_a, &el) - kl_ab + q.bilinear(&uv, &el)
                - q.bilinear(&u_kl, &bv)
                - q.bilinear(&v_kl, &av);
        }
        Ok(linalg::scale(&q.solve(&rhs)?, 0.5))
    }

    /// Killing coefficients of the vertical part of `∇^s_U V` for the
    /// deformed metric, computed from its Christoffel symbols.
    pub fn nabla_s_vertical(
        &self,
        s: f64,
        x: &[f64],
        a: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static,
        b: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        stencil: &DerivativeStencil,
    ) -> Result<Vec<f64>> {
        let gs = cheeger_metric(self, s)?;
        let uf = self.field_from_coefficients(a);
        let vf = self.field_from_coefficients(b);
        let nabla = calculus::covariant_derivative_raw(&gs, &uf, &vf, x, stencil)?;
        Ok(self.coefficient_map(x)?.mul_vec(&nabla))
    }
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    let mut e = alloc::vec![0.0; k];
    e[i] = 1.0;
    e
}

pub fn orbit_tensor(action: &GroupAction, p: &Point) -> Result<OrbitTensor> {
    action.metric().metric_at(p)?;
    Ok(OrbitTensor { base: p.clone(), matrix: action.orbit_matrix(p.coords())? })
}

/// The Cheeger deformation `g_s`, `s ≥ 0`; `s = 0` returns `g0` itself.
pub fn cheeger_metric(action: &GroupAction, s: f64) -> Result<MetricField> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(contract(alloc::format!("Cheeger parameter s = {s} must be finite and non-negative")));
    }
    if s == 0.0 {
        return Ok(action.metric().clone());
    }
    let act = action.clone();
    let qinv = action.q.inverse()?;
    Ok(MetricField::new(action.metric().chart().clone(), alloc::format!("cheeger(s={s})"), move |x| {
        let g = act.metric().matrix(x);
        let gk = act.killing_gram(x);
        let (c, gkinv) = match (act.coefficient_map(x), gk.inverse()) {
            (Ok(c), Ok(i)) => (c, i),
            _ => return Matrix::from_fn(g.rows(), g.cols(), |_, _| f64::NAN),
        };
        let middle = match gkinv.add(&qinv.scale(s)).inverse() {
            Ok(m) => m.sub(&gk),
            Err(_) => return Matrix::from_fn(g.rows(), g.cols(), |_, _| f64::NAN),
        };
        g.add(&c.transpose().mul(&middle).mul(&c))
    }))
}

/// `Q(O⁻¹ n_XX, n_YY) − Q(O⁻¹ n_XY, n_XY)` for three vertical coefficient
/// vectors.
fn limit_form(q: &Matrix, o: &Matrix, nxx: &[f64], nyy: &[f64], nxy: &[f64]) -> Result<f64> {
    let lu = o.lu()?;
    Ok(q.bilinear(&lu.solve(nxx), nyy) - q.bilinear(&lu.solve(nxy), nxy))
}

/// Killing coefficients of `O C v` as a function of position, for the
/// constant-component extension of `v`.
fn o_field(action: &GroupAction, v: &[f64]) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static {
    let act = action.clone();
    let v = v.to_vec();
    move |y: &[f64]| match (act.orbit_matrix(y), act.coefficient_map(y)) {
        (Ok(o), Ok(c)) => o.mul_vec(&c.mul_vec(&v)),
        _ => alloc::vec![f64::NAN; act.rank()],
    }
}

fn check_pair(action: &GroupAction, p: &Point, x: &TangentVector, y: &TangentVector) -> Result<()> {
    action.metric().metric_at(p)?;
    action.metric().chart().check_len(x.components.len())?;
    action.metric().chart().check_len(y.components.len())
}

/// `Q(O⁻¹ ∇^Q_{OX}OX, ∇^Q_{OY}OY) − Q(O⁻¹ ∇^Q_{OX}OY, ∇^Q_{OX}OY)` at `p`,
/// where `OX` is the vertical field with Killing coefficients `O C X` and
/// `X`, `Y` are extended with constant chart components.
pub fn cheeger_limit_condition(
    action: &GroupAction,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_pair(action, p, x, y)?;
    let xc = p.coords();
    let (fx, fy) = (o_field(action, &x.components), o_field(action, &y.components));
    let nxx = action.nabla_q(xc, &fx, &fx, stencil)?;
    let nyy = action.nabla_q(xc, &fy, &fy, stencil)?;
    let nxy = action.nabla_q(xc, &fx, &fy, stencil)?;
    limit_form(action.q(), &action.orbit_matrix(xc)?, &nxx, &nyy, &nxy)
}

/// The same expression with `∇^Q` replaced by the vertical part of `∇^s`.
pub fn cheeger_condition_at(
    action: &GroupAction,
    s: f64,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    check_pair(action, p, x, y)?;
    let xc = p.coords();
    let (fx, fy) = (o_field(action, &x.components), o_field(action, &y.components));
    let nxx = action.nabla_s_vertical(s, xc, fx.clone(), fx.clone(), stencil)?;
    let nyy = action.nabla_s_vertical(s, xc, fy.clone(), fy.clone(), stencil)?;
    let nxy = action.nabla_s_vertical(s, xc, fx, fy, stencil)?;
    limit_form(action.q(), &action.orbit_matrix(xc)?, &nxx, &nyy, &nxy)
}

/// Large-`s` oracle for [`cheeger_limit_condition`]: evaluates
/// [`cheeger_condition_at`] at `s = 10³, 10⁴` and removes the `1/s` term.
pub fn cheeger_limit_extrapolated(
    action: &GroupAction,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    let (s1, s2) = EXTRAPOLATION_S;
    let l1 = cheeger_condition_at(action, s1, p, x, y, stencil)?;
    let l2 = cheeger_condition_at(action, s2, p, x, y, stencil)?;
    let ratio = s2 / s1;
    Ok((ratio * l2 - l1) / (ratio - 1.0))
}

/// For each `s`, `|2 g0(s P_s ∇^s_U V, W) − 2 Q(∇^Q_U V, W)|` with `U`, `V`,
/// `W` the vertical fields of constant Killing coefficients through `u`,
/// `v`, `w`.
pub fn cheeger_koszul_convergence(
    action: &GroupAction,
    p: &Point,
    u: &TangentVector,
    v: &TangentVector,
    w: &TangentVector,
    s_list: &[f64],
    stencil: &DerivativeStencil,
) -> Result<Vec<f64>> {
    action.metric().metric_at(p)?;
    let xc = p.coords();
    let f = action.foliation();
    for vec in [u, v, w] {
        action.metric().chart().check_len(vec.components.len())?;
        let h = f.horizontal_at(xc, &vec.components)?;
        if linalg::norm_inf(&h) > 1e-8 * linalg::norm_inf(&vec.components).max(1.0) {
            return Err(contract("Koszul convergence needs vertical u, v, w"));
        }
    }
    if s_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(contract("s values must be increasing"));
    }
    let c = action.coefficient_map(xc)?;
    let (a, b, wc) = (c.mul_vec(&u.components), c.mul_vec(&v.components), c.mul_vec(&w.components));
    let (ac, bc) = (a.clone(), b.clone());
    let limit = 2.0 * action.q().bilinear(&action.nabla_q(xc, &move |_| ac.clone(), &move |_| bc.clone(), stencil)?, &wc);
    let gk = action.killing_gram(xc);
    let o = action.orbit_matrix(xc)?;
    let k = action.rank();
    s_list
        .iter()
        .map(|&s| {
            let (ac, bc) = (a.clone(), b.clone());
            let n = action.nabla_s_vertical(s, xc, move |_| ac.clone(), move |_| bc.clone(), stencil)?;
            // s P_s on vertical coefficients is (1/s + O)⁻¹
            let sp = Matrix::identity(k).scale(1.0 / s).add(&o);
            let lhs = 2.0 * gk.bilinear(&sp.solve(&n)?, &wc);
            Ok((lhs - limit).abs())
        })
        .collect()
}

/// The two pairings that survive when the `P_s⁻¹` rescaling is dropped:
/// `g0(P_s²(1−P_s)^{r−2} n_XX, n_YY)` and the `(XY, XY)` one, with `n` the
/// vertical parts of `∇^s` on the constant extensions of `X`, `Y`.
pub fn cheeger_dropped_pairings(
    action: &GroupAction,
    s: f64,
    r: u32,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
    stencil: &DerivativeStencil,
) -> Result<(f64, f64)> {
    check_pair(action, p, x, y)?;
    if r < 2 {
        return Err(contract("order r must be at least 2"));
    }
    let xc = p.coords();
    let c = action.coefficient_map(xc)?;
    let (cx, cy) = (c.mul_vec(&x.components), c.mul_vec(&y.components));
    let field = |v: Vec<f64>| move |_: &[f64]| v.clone();
    let nxx = action.nabla_s_vertical(s, xc, field(cx.clone()), field(cx.clone()), stencil)?;
    let nyy = action.nabla_s_vertical(s, xc, field(cy.clone()), field(cy.clone()), stencil)?;
    let nxy = action.nabla_s_vertical(s, xc, field(cx), field(cy), stencil)?;
    let k = action.rank();
    let o = action.orbit_matrix(xc)?;
    let ps = Matrix::identity(k).add(&o.scale(s)).inverse()?;
    let q = Matrix::identity(k).sub(&ps);
    let mut m = ps.mul(&ps);
    for _ in 2..r {
        m = m.mul(&q);
    }
    let gk = action.killing_gram(xc);
    Ok((gk.bilinear(&m.mul_vec(&nxx), &nyy), gk.bilinear(&m.mul_vec(&nxy), &nxy)))
}
