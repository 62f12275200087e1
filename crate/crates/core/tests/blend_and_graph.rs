use blendcurv::blend::{self, blend_curvature, blend_curvature_oracle, p_tensor, t_derivative_analytic, t_derivative_fd};
use blendcurv::graph::{self, chi, chi_chi_prime_inverse, chi_prime, normal_projection, SplitVector};
use blendcurv::{calculus, BlendPath, Chart, DerivativeStencil, Matrix, MetricField, Point, TangentVector};
use proptest::prelude::*;

fn random_metric(c: [f64; 6], label: &'static str) -> MetricField {
    MetricField::new(Chart::torus(3).unwrap(), label, move |x| {
        let a = Matrix::from_fn(3, 3, |i, j| {
            let k = (i * 3 + j) % 6;
            c[k] * (x[(i + 2 * j) % 3] + 0.5 * k as f64).cos()
        });
        Matrix::identity(3).add(&a.transpose().mul(&a))
    })
}

fn random_path(c0: [f64; 6], c1: [f64; 6]) -> BlendPath {
    BlendPath::new(random_metric(c0, "g0"), random_metric(c1, "g1")).unwrap()
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    proptest::array::uniform6(-0.5..0.5f64)
}

fn point() -> impl Strategy<Value = Point> {
    proptest::collection::vec(0.0..std::f64::consts::TAU, 3).prop_map(|x| Chart::torus(3).unwrap().point(&x).unwrap())
}

fn vector() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, 3)
}

fn tv(p: &Point, c: &[f64]) -> TangentVector {
    TangentVector::new(p.clone(), c.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_form_matches_oracle(c0 in coeffs(), c1 in coeffs(), p in point(), a in vector(), b in vector(), t in 0.0..1.0f64) {
        let path = random_path(c0, c1);
        let st = DerivativeStencil::default();
        let (x, y) = (tv(&p, &a), tv(&p, &b));
        let got = blend_curvature(&path, t, &p, &x, &y, &st).unwrap();
        let want = blend_curvature_oracle(&path, t, &p, &x, &y, &st).unwrap();
        prop_assert!((got - want).abs() <= 1e-5 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn p_is_self_adjoint_and_positive(c0 in coeffs(), c1 in coeffs(), p in point()) {
        let path = random_path(c0, c1);
        let pt = p_tensor(&path, &p).unwrap();
        let g0 = path.g0().metric_at(&p).unwrap();
        prop_assert!(pt.self_adjoint_defect(&g0) < 1e-12);
        prop_assert!(pt.eigenvalues(&g0).unwrap()[0] > 0.0);
        let g1 = path.g1().metric_at(&p).unwrap();
        prop_assert!(g0.mul(&pt.matrix).sub(&g1).max_abs() < 1e-12);
    }

    #[test]
    fn graph_closure(c0 in coeffs(), c1 in coeffs(), p in point(), a in vector(), b in vector(), t in 0.05..0.95f64) {
        let path = random_path(c0, c1);
        let st = DerivativeStencil::default();
        let (x, y) = (tv(&p, &a), tv(&p, &b));
        let gauss = graph::gauss_assembly(&path, t, &p, &x, &y, &st).unwrap();
        let want = blend_curvature(&path, t, &p, &x, &y, &st).unwrap();
        prop_assert!((gauss - want).abs() <= 1e-5 * want.abs().max(1.0));
        let fast = graph::shape_inner(&path, t, &p, [&x, &x, &y, &y], &st).unwrap();
        let direct = graph::shape_inner_direct(&path, t, &p, [&x, &x, &y, &y], &st).unwrap();
        prop_assert!((fast - direct).abs() <= 1e-6 * fast.abs().max(1.0), "{fast} vs {direct}");
    }

    #[test]
    fn projection_and_inverse_identities(c0 in coeffs(), c1 in coeffs(), p in point(), a in vector(), b in vector(), t in 0.05..0.95f64) {
        let path = random_path(c0, c1);
        let pt = graph::scaled_p(&path, t, &p).unwrap();
        let v = SplitVector::new(a.clone(), b.clone()).unwrap();
        let once = normal_projection(&v, &pt).unwrap();
        let twice = normal_projection(&once, &pt).unwrap();
        prop_assert!(once.add(&twice.scale(-1.0)).max_abs() <= 1e-12);
        // χ(X) is tangent, χ'(Y) is normal
        let (x, y) = (tv(&p, &a), tv(&p, &b));
        prop_assert!(normal_projection(&chi(&x), &pt).unwrap().max_abs() <= 1e-12);
        let n = chi_prime(&y, &pt).unwrap();
        prop_assert!(normal_projection(&n, &pt).unwrap().add(&n.scale(-1.0)).max_abs() <= 1e-12);
        let (xr, yr) = chi_chi_prime_inverse(&chi(&x).add(&n), &pt).unwrap();
        for i in 0..3 {
            prop_assert!((xr[i] - a[i]).abs() <= 1e-12 && (yr[i] - b[i]).abs() <= 1e-12);
        }
        // normal space is orthogonal to the diagonal in the product metric
        let ip = graph::product_inner(&path, t, &p, &chi(&x), &n).unwrap();
        prop_assert!(ip.abs() <= 1e-12 * (1.0 + a.iter().map(|v| v.abs()).sum::<f64>()));
    }
}

#[test]
fn constant_rescaling_oracle() {
    // g1 = c g0 ⇒ P = c, D = 0 and R_t = ((1 − t) + t c) R0
    let chart = Chart::new(vec![(0.01, std::f64::consts::PI - 0.01), (0.0, std::f64::consts::TAU)], vec![false, true]).unwrap();
    let g0 = MetricField::new(chart.clone(), "sphere", |x| Matrix::diag(&[1.0, x[0].sin().powi(2)]));
    let c = 2.5;
    let path = BlendPath::new(g0.clone(), g0.scaled(c)).unwrap();
    let st = DerivativeStencil::default();
    let p = chart.point(&[1.1, 0.4]).unwrap();
    let (x, y) = (tv(&p, &[1.0, 0.0]), tv(&p, &[0.0, 1.0]));
    let r0 = 1.1f64.sin().powi(2);
    for t in [0.0, 0.3, 0.7, 1.0] {
        let r = blend_curvature(&path, t, &p, &x, &y, &st).unwrap();
        assert!((r - (1.0 - t + t * c) * r0).abs() < 1e-6, "t={t}: {r}");
    }
    assert!((t_derivative_analytic(&path, &p, &x, &y, 1, &st).unwrap() - (c - 1.0) * r0).abs() < 1e-6);
    for r in 2..=5 {
        assert!(t_derivative_analytic(&path, &p, &x, &y, r, &st).unwrap().abs() < 1e-9);
    }
    assert!((blend::series_radius(&path, &p).unwrap() - 1.0 / (c - 1.0)).abs() < 1e-12);
}

#[test]
fn taylor_coefficients_match_finite_differences() {
    let path = random_path([0.3, -0.2, 0.1, 0.4, -0.3, 0.2], [-0.1, 0.35, 0.25, -0.2, 0.15, 0.3]);
    let st = DerivativeStencil::default();
    let chart = Chart::torus(3).unwrap();
    for p in chart.sample_points(5) {
        let (a, b) = ([0.4, -0.3, 0.8], [0.1, 0.9, -0.2]);
        let (x, y) = (tv(&p, &a), tv(&p, &b));
        for (r, tol) in [(1u32, 1e-3), (2, 1e-3), (3, 1e-3), (4, 5e-3)] {
            let an = t_derivative_analytic(&path, &p, &x, &y, r, &st).unwrap();
            let fd = t_derivative_fd(&path, p.coords(), &a, &b, r, 0.05, &st).unwrap();
            assert!((an - fd).abs() <= tol * an.abs().max(1.0), "r={r}: {an} vs {fd}");
        }
    }
}

#[test]
fn blend_curvature_rejects_bad_input() {
    let path = random_path([0.1; 6], [0.2; 6]);
    let st = DerivativeStencil::default();
    let p = Chart::torus(3).unwrap().point(&[0.0, 0.0, 0.0]).unwrap();
    let (x, y) = (tv(&p, &[1.0, 0.0, 0.0]), tv(&p, &[0.0, 1.0, 0.0]));
    assert!(blend_curvature(&path, 1.5, &p, &x, &y, &st).is_err());
    let other = Chart::torus(2).unwrap();
    assert!(BlendPath::new(MetricField::flat(other), random_metric([0.0; 6], "g")).is_err());
    let q = Chart::torus(3).unwrap().point(&[1.0, 0.0, 0.0]).unwrap();
    assert!(blend_curvature(&path, 0.5, &p, &tv(&q, &[1.0, 0.0, 0.0]), &y, &st).is_err());
    assert!(calculus::sectional(path.g0(), &p, &x, &x, &st).is_err());
}
