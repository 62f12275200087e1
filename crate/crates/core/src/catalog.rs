//! Built-in geometries with a foliation, an isometric action and a torus.
//!
//! | name          | manifold               | vertical               | torus                      |
//! |---------------|------------------------|------------------------|----------------------------|
//! | `flat3torus`  | `T³`, flat             | `∂₃`                   | `(u, 0, v)`                |
//! | `warped3torus`| `T³`, flat, with `f`   | `∂₃`                   | `(u, 0, v)`                |
//! | `s2xs2`       | `S² × S²`, round       | second factor          | equator × equator          |
//! | `s3hopf`      | round `S³`, Hopf coords| Hopf circles           | Clifford torus             |
//! | `s3berger`    | Berger `S³`            | all of `TS³` (`SU(2)`) | Clifford torus             |
//!
//! Hopf coordinates `(η, ξ₁, ξ₂)` embed `S³` as
//! `(sin η e^{iξ₁}, cos η e^{iξ₂})` with `η ∈ [0.01, π/2 − 0.01]`.
//! The Clifford torus is intrinsically flat but not totally geodesic, so its
//! entries only promise intrinsic flatness.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::blend::BlendPath;
use crate::chart::Chart;
use crate::deformations::cheeger::{cheeger_metric, GroupAction};
use crate::deformations::conformal::conformal_metric;
use crate::deformations::vertical::{canonical_variation_metric, warped_metric};
use crate::error::{contract, GeomError, Result};
use crate::foliation::FoliationStructure;
use crate::linalg::{self, Matrix};
use crate::math::{cos, sin};
use crate::metric::{MetricField, ScalarField, VectorField};
use crate::stencil::DerivativeStencil;
use crate::torus::{self, TorusImmersion};

/// Margin kept from the polar ends of a non-periodic angle.
pub const POLE_MARGIN: f64 = 1e-2;

/// Names accepted by [`catalog_get`].
pub const CATALOG_NAMES: [&str; 5] = ["flat3torus", "warped3torus", "s2xs2", "s3hopf", "s3berger"];

/// Declared properties, re-checked when an entry is built.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryNotes {
    /// The torus is totally geodesic and the ambient planes along it flat.
    pub totally_geodesic_flat: bool,
    /// Bound on [`torus::check_totally_geodesic_flat`] (or on the intrinsic
    /// curvature when the torus is only intrinsically flat).
    pub torus_residual_bound: f64,
    /// Whether the horizontal distribution is integrable (`A = 0`), when
    /// there is one.
    pub oneill_a_vanishes: Option<bool>,
    pub summary: &'static str,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub chart: Chart,
    pub g0: MetricField,
    pub foliation: Option<FoliationStructure>,
    pub action: Option<GroupAction>,
    pub torus: TorusImmersion,
    /// Default warping function for the vertical warping deformation.
    pub warping: Option<ScalarField>,
    pub notes: EntryNotes,
}

impl CatalogEntry {
    fn foliation_or_err(&self) -> Result<&FoliationStructure> {
        self.foliation.as_ref().ok_or_else(|| contract(alloc::format!("{} has no foliation", self.name)))
    }

    pub fn action_or_err(&self) -> Result<&GroupAction> {
        self.action.as_ref().ok_or_else(|| contract(alloc::format!("{} has no group action", self.name)))
    }

    /// `g0 → e^{2h} g0`.
    pub fn conformal_path(&self, h: ScalarField) -> Result<BlendPath> {
        BlendPath::new(self.g0.clone(), conformal_metric(&self.g0, h))
    }

    /// `g0 → g0|_H + e^{2s} g0|_V`.
    pub fn canonical_path(&self, s: f64) -> Result<BlendPath> {
        BlendPath::new(self.g0.clone(), canonical_variation_metric(self.foliation_or_err()?, s))
    }

    /// `g0 → g0|_H + e^{2φ} g0|_V`; `φ` must be basic.
    pub fn warping_path(&self, phi: &ScalarField, stencil: &DerivativeStencil) -> Result<BlendPath> {
        BlendPath::new(self.g0.clone(), warped_metric(self.foliation_or_err()?, phi, stencil)?)
    }

    /// `g0 → g_s` for the entry's action.
    pub fn cheeger_path(&self, s: f64) -> Result<BlendPath> {
        BlendPath::new(self.g0.clone(), cheeger_metric(self.action_or_err()?, s)?)
    }

    /// Re-runs the declared residual checks.
    pub fn self_test(&self, stencil: &DerivativeStencil) -> Result<()> {
        let pts = self.chart.sample_points(16);
        self.g0.check_positive_definite(&pts)?;
        let bound = self.notes.torus_residual_bound;
        if self.notes.totally_geodesic_flat {
            let res = torus::check_totally_geodesic_flat(&self.g0, &self.torus, stencil)?;
            if res.max() > bound {
                return Err(contract(alloc::format!("{}: torus residual {:.3e} above {bound:.1e}", self.name, res.max())));
            }
        } else {
            let k = intrinsic_curvature_max(&self.g0, &self.torus, stencil)?;
            if k > bound {
                return Err(contract(alloc::format!("{}: torus intrinsic curvature {k:.3e} above {bound:.1e}", self.name)));
            }
        }
        if let (Some(f), Some(vanishes)) = (&self.foliation, self.notes.oneill_a_vanishes) {
            let a = oneill_a_size(f, &pts, stencil)?;
            if vanishes != (a < 1e-6) {
                return Err(contract(alloc::format!("{}: |A| = {a:.3e} contradicts the declared integrability", self.name)));
            }
        }
        Ok(())
    }
}

/// `max |A_X Y|` over horizontal basis pairs at the given points.
pub fn oneill_a_size(f: &FoliationStructure, pts: &[crate::chart::Point], stencil: &DerivativeStencil) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in pts {
        let x = p.coords();
        let hb = f.horizontal_basis(x)?;
        for a in &hb {
            for b in &hb {
                worst = worst.max(linalg::norm_inf(&f.oneill_a_at(x, a, b, stencil)?));
            }
        }
    }
    Ok(worst)
}

/// `max |K|` of the induced metric over an 8×8 grid.
pub fn intrinsic_curvature_max(g: &MetricField, t: &TorusImmersion, stencil: &DerivativeStencil) -> Result<f64> {
    let induced = t.induced_metric(g)?;
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let w = [TAU * i as f64 / 8.0, TAU * j as f64 / 8.0];
            let r = crate::calculus::curvature_xyyx_raw(&induced, &w, &[1.0, 0.0], &[0.0, 1.0], stencil)?;
            let m = induced.matrix(&w);
            worst = worst.max((r / (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(0, 1)])).abs());
        }
    }
    Ok(worst)
}

fn coordinate_torus(n: usize) -> Result<TorusImmersion> {
    TorusImmersion::new(Chart::torus(n)?, "coordinate", |u, v| vec![u, 0.0, v])?
        .with_frame(|_, _| (vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]))
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

fn flat3torus_entry(name: &str, warping: Option<ScalarField>, st: &DerivativeStencil) -> Result<CatalogEntry> {
    let chart = Chart::torus(3)?;
    let g0 = MetricField::flat(chart.clone()).with_label(name);
    let e3 = VectorField::constant(unit(3, 2));
    let foliation = FoliationStructure::new(g0.clone(), vec![e3.clone()], st)?;
    let action = GroupAction::new(g0.clone(), vec![e3], vec![0.0], Matrix::identity(1), st)?;
    Ok(CatalogEntry {
        name: name.into(),
        chart,
        g0,
        foliation: Some(foliation),
        action: Some(action),
        torus: coordinate_torus(3)?,
        warping,
        notes: EntryNotes {
            totally_geodesic_flat: true,
            torus_residual_bound: 1e-12,
            oneill_a_vanishes: Some(true),
            summary: "flat T³, vertical ∂₃, circle action along ∂₃",
        },
    })
}

/// Flat `T³` with warping function `a sin x₁`.
pub fn warped3torus(a: f64, st: &DerivativeStencil) -> Result<CatalogEntry> {
    let f = ScalarField::new(move |x| a * sin(x[0]));
    let mut e = flat3torus_entry("warped3torus", Some(f), st)?;
    e.notes.summary = "flat T³ with basic warping f = a sin x₁";
    Ok(e)
}

fn s2xs2(st: &DerivativeStencil) -> Result<CatalogEntry> {
    let polar = (POLE_MARGIN, PI - POLE_MARGIN);
    let chart = Chart::new(vec![polar, (0.0, TAU), polar, (0.0, TAU)], vec![false, true, false, true])?;
    let g0 = MetricField::new(chart.clone(), "s2xs2", |x| {
        let (a, b) = (sin(x[0]), sin(x[2]));
        Matrix::diag(&[1.0, a * a, 1.0, b * b])
    });
    let foliation = FoliationStructure::new(
        g0.clone(),
        vec![VectorField::constant(unit(4, 2)), VectorField::constant(unit(4, 3))],
        st,
    )?;
    let action = GroupAction::new(
        g0.clone(),
        vec![VectorField::constant(unit(4, 1)), VectorField::constant(unit(4, 3))],
        vec![0.0; 8],
        Matrix::identity(2),
        st,
    )?;
    let torus = TorusImmersion::new(chart.clone(), "equators", |u, v| vec![FRAC_PI_2, u, FRAC_PI_2, v])?
        .with_frame(|_, _| (unit(4, 1), unit(4, 3)))?;
    Ok(CatalogEntry {
        name: "s2xs2".into(),
        chart,
        g0,
        foliation: Some(foliation),
        action: Some(action),
        torus,
        warping: Some(ScalarField::new(|x| 0.2 * cos(x[0]))),
        notes: EntryNotes {
            totally_geodesic_flat: true,
            torus_residual_bound: 1e-6,
            oneill_a_vanishes: Some(true),
            summary: "round S²×S², foliated by the second factor, T² rotating both factors",
        },
    })
}

fn hopf_chart() -> Result<Chart> {
    Chart::new(vec![(POLE_MARGIN, FRAC_PI_2 - POLE_MARGIN), (0.0, TAU), (0.0, TAU)], vec![false, true, true])
}

fn clifford_torus(chart: &Chart) -> Result<TorusImmersion> {
    TorusImmersion::new(chart.clone(), "clifford", |u, v| vec![FRAC_PI_4, u, v])?
        .with_frame(|_, _| (unit(3, 1), unit(3, 2)))
}

fn s3hopf(st: &DerivativeStencil) -> Result<CatalogEntry> {
    let chart = hopf_chart()?;
    let g0 = MetricField::new(chart.clone(), "s3hopf", |x| {
        let (s, c) = (sin(x[0]), cos(x[0]));
        Matrix::diag(&[1.0, s * s, c * c])
    });
    let hopf = VectorField::constant(vec![0.0, 1.0, 1.0]);
    let foliation = FoliationStructure::new(g0.clone(), vec![hopf.clone()], st)?;
    let action = GroupAction::new(g0.clone(), vec![hopf], vec![0.0], Matrix::identity(1), st)?;
    Ok(CatalogEntry {
        name: "s3hopf".into(),
        torus: clifford_torus(&chart)?,
        chart,
        g0,
        foliation: Some(foliation),
        action: Some(action),
        warping: Some(ScalarField::new(|x| 0.2 * cos(2.0 * x[0]))),
        notes: EntryNotes {
            totally_geodesic_flat: false,
            torus_residual_bound: 1e-6,
            oneill_a_vanishes: Some(false),
            summary: "round S³ in Hopf coordinates, Hopf circle action, Clifford torus",
        },
    })
}

/// Embedding of Hopf coordinates in `R⁴ = H` and its Jacobian columns.
fn hopf_embedding(x: &[f64]) -> ([f64; 4], [[f64; 4]; 3]) {
    let (se, ce) = (sin(x[0]), cos(x[0]));
    let (s1, c1, s2, c2) = (sin(x[1]), cos(x[1]), sin(x[2]), cos(x[2]));
    let q = [se * c1, se * s1, ce * c2, ce * s2];
    let jac = [
        [ce * c1, ce * s1, -se * c2, -se * s2],
        [-se * s1, se * c1, 0.0, 0.0],
        [0.0, 0.0, -ce * s2, ce * c2],
    ];
    (q, jac)
}

/// Quaternion product with components `(1, i, j, k)`.
fn qmul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn imaginary_unit(i: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[i + 1] = 1.0;
    e
}

/// Chart components of the tangent vector `w ∈ R⁴` at `x`.
fn hopf_components(jac: &[[f64; 4]; 3], w: &[f64; 4]) -> Vec<f64> {
    let d = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    // the Jacobian columns are orthogonal
    (0..3).map(|a| d(&jac[a], w) / d(&jac[a], &jac[a])).collect()
}

/// Berger scaling of the left-invariant direction `q·i`.
pub const BERGER_SCALE: f64 = 1.5;

fn s3berger(st: &DerivativeStencil) -> Result<CatalogEntry> {
    let chart = hopf_chart()?;
    let g0 = MetricField::new(chart.clone(), "s3berger", |x| {
        let (q, jac) = hopf_embedding(x);
        let l = qmul(&q, &imaginary_unit(0));
        let c: Vec<f64> = (0..3).map(|a| jac[a].iter().zip(&l).map(|(p, r)| p * r).sum()).collect();
        Matrix::from_fn(3, 3, |a, b| {
            let round: f64 = jac[a].iter().zip(&jac[b]).map(|(p, r)| p * r).sum();
            round + (BERGER_SCALE - 1.0) * c[a] * c[b]
        })
    });
    // left multiplication by exp(t e) is generated by q ↦ e q
    let killing: Vec<VectorField> = (0..3)
        .map(|i| {
            VectorField::new(move |x| {
                let (q, jac) = hopf_embedding(x);
                hopf_components(&jac, &qmul(&imaginary_unit(i), &q))
            })
        })
        .collect();
    // [K_i, K_j] = −2 ε_ijk K_k
    let mut structure = vec![0.0; 27];
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        structure[(i * 3 + j) * 3 + k] = -2.0;
        structure[(j * 3 + i) * 3 + k] = 2.0;
    }
    let action = GroupAction::new(g0.clone(), killing, structure, Matrix::identity(3), st)?;
    Ok(CatalogEntry {
        name: "s3berger".into(),
        torus: clifford_torus(&chart)?,
        chart,
        g0,
        foliation: None,
        action: Some(action),
        warping: None,
        notes: EntryNotes {
            totally_geodesic_flat: false,
            torus_residual_bound: 1e-6,
            oneill_a_vanishes: None,
            summary: "Berger S³ (left-invariant, one direction scaled by 1.5), SU(2) acting on the left",
        },
    })
}

/// Builds and self-tests an entry.
pub fn catalog_get(name: &str) -> Result<CatalogEntry> {
    let st = DerivativeStencil::default();
    let entry = match name {
        "flat3torus" => flat3torus_entry("flat3torus", None, &st)?,
        "warped3torus" => warped3torus(0.2, &st)?,
        "s2xs2" => s2xs2(&st)?,
        "s3hopf" => s3hopf(&st)?,
        "s3berger" => s3berger(&st)?,
        other => return Err(GeomError::UnknownEntry(other.into())),
    };
    entry.self_test(&st)?;
    Ok(entry)
}

/// Every entry, in [`CATALOG_NAMES`] order.
pub fn catalog_list() -> Result<Vec<CatalogEntry>> {
    CATALOG_NAMES.iter().map(|n| catalog_get(n)).collect()
}

/// A labelled blend path on a catalog torus.
#[derive(Debug, Clone)]
pub struct BlendCase {
    pub label: String,
    pub entry: String,
    pub path: BlendPath,
    pub torus: TorusImmersion,
}

/// The standard deformations of every entry with the parameters used by
/// the test suites.
pub fn blend_cases() -> Result<Vec<BlendCase>> {
    let st = DerivativeStencil::default();
    let mut out = Vec::new();
    let mut push = |label: &str, e: &CatalogEntry, path: BlendPath| {
        out.push(BlendCase { label: label.into(), entry: e.name.clone(), path, torus: e.torus.clone() });
    };
    let warped = catalog_get("warped3torus")?;
    push("warped3torus/warping", &warped, warped.warping_path(warped.warping.as_ref().expect("warping"), &st)?);
    push("warped3torus/conformal", &warped, warped.conformal_path(ScalarField::new(|x| 0.15 * sin(x[0]) + 0.1 * cos(x[2])))?);
    let prod = catalog_get("s2xs2")?;
    push("s2xs2/canonical", &prod, prod.canonical_path(0.5)?);
    push("s2xs2/warping", &prod, prod.warping_path(prod.warping.as_ref().expect("warping"), &st)?);
    push("s2xs2/conformal", &prod, prod.conformal_path(ScalarField::new(|x| 0.2 * cos(x[0]) + 0.1 * sin(x[1])))?);
    push("s2xs2/cheeger", &prod, prod.cheeger_path(1.0)?);
    let hopf = catalog_get("s3hopf")?;
    push("s3hopf/canonical", &hopf, hopf.canonical_path(0.5)?);
    push("s3hopf/cheeger", &hopf, hopf.cheeger_path(1.0)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus;

    #[test]
    fn unknown_name() {
        assert!(matches!(catalog_get("nope"), Err(GeomError::UnknownEntry(_))));
    }

    #[test]
    fn flat_entry_has_zero_christoffels() {
        let e = catalog_get("flat3torus").unwrap();
        let g = calculus::christoffel_raw(&e.g0, &[1.0, 2.0, 3.0], &DerivativeStencil::default()).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn product_and_hopf_entries() {
        let st = DerivativeStencil::default();
        let p = catalog_get("s2xs2").unwrap();
        assert!(torus::check_totally_geodesic_flat(&p.g0, &p.torus, &st).unwrap().max() <= 1e-6);
        let h = catalog_get("s3hopf").unwrap();
        assert!(intrinsic_curvature_max(&h.g0, &h.torus, &st).unwrap() <= 1e-6);
        // the ambient planes along the Clifford torus have curvature 1
        let r = calculus::curvature_xyyx_raw(&h.g0, &[FRAC_PI_4, 0.3, 0.4], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &st).unwrap();
        assert!((r - 0.25).abs() < 1e-6, "{r}");
    }

    #[test]
    fn berger_builds() {
        let b = catalog_get("s3berger").unwrap();
        let a = b.action.unwrap();
        assert_eq!(a.rank(), 3);
        assert!(a.orbit_matrix(&[0.4, 0.1, 0.2]).unwrap().sub(&Matrix::identity(3)).max_abs() > 0.1);
    }
}
