//! Experiment configuration: JSON schema, defaults, validation and the
//! conversion of inline specs into library objects.

use std::path::PathBuf;

use blendcurv::catalog::{self, CatalogEntry, EntryNotes};
use blendcurv::foliation::FoliationStructure;
use blendcurv::torus::TorusImmersion;
use blendcurv::{Chart, DerivativeStencil, Matrix, MetricField, ScalarField, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::expr::Expr;

/// A number or a constant expression such as `"2*pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    fn resolve(&self) -> Result<f64, CliError> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Expr(s) => {
                let e = Expr::parse(s).map_err(|e| CliError::Usage(format!("'{s}': {e}")))?;
                e.check_vars(0, false).map_err(CliError::Usage)?;
                Ok(e.eval(&[], (0.0, 0.0)))
            }
        }
    }
}

/// A metric defined by a chart and a matrix of expressions in `x1..xn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineGeometry {
    #[serde(default = "default_inline_name")]
    pub name: String,
    pub domain: Vec<[Number; 2]>,
    pub periodic: Vec<bool>,
    pub g0: Vec<Vec<String>>,
    /// Torus map: one expression in `u`, `v` per coordinate.
    pub torus: Vec<String>,
    /// Frame of the vertical distribution, one vector of expressions each.
    #[serde(default)]
    pub vertical: Vec<Vec<String>>,
}

fn default_inline_name() -> String {
    "inline".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySpec {
    Catalog(String),
    Inline(InlineGeometry),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Deformation {
    /// `g1 = e^{2h} g0`.
    Conformal { h: String },
    /// Vertical block scaled by `e^{2s}`.
    Canonical { s: f64 },
    /// Vertical block scaled by `e^{2f}`, `f` basic. Missing `f` uses the
    /// catalog entry's default.
    Warping { f: Option<String> },
    /// Cheeger deformation with parameter `s`.
    Cheeger { s: f64 },
    /// An explicit second metric; an empty matrix means `g1 = g0`.
    #[serde(rename = "custom-g1")]
    CustomG1 { g1: Vec<Vec<String>> },
}

impl Deformation {
    pub fn kind(&self) -> &'static str {
        match self {
            Deformation::Conformal { .. } => "conformal",
            Deformation::Canonical { .. } => "canonical",
            Deformation::Warping { .. } => "warping",
            Deformation::Cheeger { .. } => "cheeger",
            Deformation::CustomG1 { .. } => "custom-g1",
        }
    }

    /// Default parameters for a kind named on the command line.
    pub fn default_for(kind: &str) -> Result<Deformation, CliError> {
        Ok(match kind {
            "conformal" => Deformation::Conformal { h: "0.1*sin(x1)".into() },
            "canonical" => Deformation::Canonical { s: 0.5 },
            "warping" => Deformation::Warping { f: None },
            "cheeger" => Deformation::Cheeger { s: 1.0 },
            "custom-g1" => Deformation::CustomG1 { g1: Vec::new() },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown deformation '{other}' (conformal, canonical, warping, cheeger, custom-g1)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StencilConfig {
    pub order: u32,
    pub step: f64,
    pub nested_step: f64,
    pub richardson: bool,
}

impl Default for StencilConfig {
    fn default() -> Self {
        let d = DerivativeStencil::default();
        StencilConfig { order: 4, step: d.step, nested_step: d.nested_step, richardson: d.richardson }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Report,
    OracleTable,
    IntegrandSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub deformation: Deformation,
    pub r_max: u32,
    pub grid_n: usize,
    pub seed: u64,
    pub stencil: StencilConfig,
    /// Step of the `t` finite differences in the Taylor oracle.
    pub fd_step: f64,
    /// `t` values of the blend oracle sweep.
    pub t_grid: Vec<f64>,
    /// Random `(p, X, Y)` samples for the oracle sweep.
    pub oracle_points: usize,
    pub outputs: Vec<Output>,
    pub out: Option<PathBuf>,
    pub format: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: GeometrySpec::Catalog("flat3torus".into()),
            deformation: Deformation::Canonical { s: 0.5 },
            r_max: 4,
            grid_n: 16,
            seed: 0,
            stencil: StencilConfig::default(),
            fd_step: 0.05,
            t_grid: vec![0.1, 0.5, 0.9],
            oracle_points: 8,
            outputs: vec![Output::Report],
            out: None,
            format: "csv".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(2..=8).contains(&self.r_max) {
            return usage(format!("r_max = {} must lie in [2, 8]", self.r_max));
        }
        if !(16..=256).contains(&self.grid_n) || !self.grid_n.is_power_of_two() {
            return usage(format!("grid_n = {} must be a power of two in [16, 256]", self.grid_n));
        }
        if self.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return usage("t_grid values must lie in [0, 1]".into());
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.25) {
            return usage(format!("fd_step = {} must lie in (0, 0.25)", self.fd_step));
        }
        self.format.parse::<crate::table::Format>().map_err(CliError::Usage)?;
        self.stencil()?;
        Ok(())
    }

    pub fn stencil(&self) -> Result<DerivativeStencil, CliError> {
        let s = self.stencil;
        DerivativeStencil::new(s.order, s.step, s.nested_step, s.richardson).map_err(|e| CliError::Usage(format!("stencil: {e}")))
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}

/// Command-line values that replace the matching config keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub geometry: Option<String>,
    pub deformation: Option<String>,
    pub r_max: Option<u32>,
    pub grid_n: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl ExperimentConfig {
    /// A deformation flag naming the configured kind keeps its parameters;
    /// any other kind starts from [`Deformation::default_for`].
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(g) = &o.geometry {
            self.geometry = GeometrySpec::Catalog(g.clone());
        }
        if let Some(k) = &o.deformation {
            if k != self.deformation.kind() {
                self.deformation = Deformation::default_for(k)?;
            }
        }
        if let Some(r) = o.r_max {
            self.r_max = r;
        }
        if let Some(n) = o.grid_n {
            self.grid_n = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(f) = &o.format {
            self.format = f.clone();
        }
        Ok(())
    }
}

fn parse_with(src: &str, dim: usize, allow_uv: bool) -> Result<Expr, CliError> {
    let e = Expr::parse(src).map_err(|e| CliError::Usage(format!("'{src}': {e}")))?;
    e.check_vars(dim, allow_uv).map_err(|m| CliError::Usage(format!("'{src}': {m}")))?;
    Ok(e)
}

/// Parses a field `x ↦ f(x)` on an `n`-dimensional chart.
pub fn scalar_field(src: &str, dim: usize) -> Result<ScalarField, CliError> {
    let e = parse_with(src, dim, false)?;
    Ok(ScalarField::new(move |x| e.eval(x, (0.0, 0.0))))
}

fn vector_field(srcs: &[String], dim: usize) -> Result<VectorField, CliError> {
    if srcs.len() != dim {
        return Err(CliError::Usage(format!("vector field needs {dim} components, got {}", srcs.len())));
    }
    let es = srcs.iter().map(|s| parse_with(s, dim, false)).collect::<Result<Vec<_>, _>>()?;
    Ok(VectorField::new(move |x| es.iter().map(|e| e.eval(x, (0.0, 0.0))).collect()))
}

/// A symmetric `n×n` matrix of expressions as a metric on `chart`.
pub fn metric_field(rows: &[Vec<String>], chart: &Chart, label: &str) -> Result<MetricField, CliError> {
    let n = chart.dim();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("{label} must be a {n}×{n} matrix of expressions")));
    }
    let es = rows.iter().map(|r| r.iter().map(|s| parse_with(s, n, false)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
    for i in 0..n {
        for j in 0..i {
            if es[i][j] != es[j][i] {
                return Err(CliError::Usage(format!("{label} is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(MetricField::new(chart.clone(), label, move |x| Matrix::from_fn(n, n, |i, j| es[i][j].eval(x, (0.0, 0.0)))))
}

impl InlineGeometry {
    pub fn build(&self, stencil: &DerivativeStencil) -> Result<CatalogEntry, CliError> {
        let domain = self.domain.iter().map(|[a, b]| Ok((a.resolve()?, b.resolve()?))).collect::<Result<Vec<_>, CliError>>()?;
        let chart = Chart::new(domain, self.periodic.clone()).map_err(|e| CliError::Usage(format!("chart: {e}")))?;
        let n = chart.dim();
        let g0 = metric_field(&self.g0, &chart, &self.name)?;
        g0.check_positive_definite(&chart.sample_points(32)).map_err(|e| CliError::Usage(format!("g0: {e}")))?;
        if self.torus.len() != n {
            return Err(CliError::Usage(format!("torus map needs {n} components")));
        }
        let map = self.torus.iter().map(|s| parse_with(s, 0, true)).collect::<Result<Vec<_>, _>>()?;
        let torus = TorusImmersion::new(chart.clone(), "inline", move |u, v| map.iter().map(|e| e.eval(&[], (u, v))).collect())
            .map_err(|e| CliError::Usage(format!("torus: {e}")))?;
        let foliation = if self.vertical.is_empty() {
            None
        } else {
            let frame = self.vertical.iter().map(|v| vector_field(v, n)).collect::<Result<Vec<_>, _>>()?;
            Some(FoliationStructure::new(g0.clone(), frame, stencil).map_err(|e| CliError::Usage(format!("vertical: {e}")))?)
        };
        Ok(CatalogEntry {
            name: self.name.clone(),
            chart,
            g0,
            foliation,
            action: None,
            torus,
            warping: None,
            notes: EntryNotes {
                totally_geodesic_flat: false,
                torus_residual_bound: f64::INFINITY,
                oneill_a_vanishes: None,
                summary: "user-defined geometry",
            },
        })
    }
}

/// Resolves the geometry of a validated config.
pub fn load_geometry(spec: &GeometrySpec, stencil: &DerivativeStencil) -> Result<CatalogEntry, CliError> {
    match spec {
        GeometrySpec::Catalog(name) => catalog::catalog_get(name).map_err(|e| match e {
            blendcurv::GeomError::UnknownEntry(n) => {
                CliError::Usage(format!("unknown geometry '{n}' (known: {})", catalog::CATALOG_NAMES.join(", ")))
            }
            other => CliError::Geometry(other),
        }),
        GeometrySpec::Inline(g) => g.build(stencil),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema() {
        let c = ExperimentConfig::from_json(
            r#"{"geometry": "s2xs2", "deformation": {"kind": "warping", "f": "0.1*cos(x1)"}, "r_max": 3}"#,
        )
        .unwrap();
        assert_eq!(c.geometry, GeometrySpec::Catalog("s2xs2".into()));
        assert_eq!(c.deformation, Deformation::Warping { f: Some("0.1*cos(x1)".into()) });
        assert_eq!(c.grid_n, 16);
        let c = ExperimentConfig::from_json(r#"{"deformation": {"kind": "custom-g1", "g1": [["1"]]}}"#).unwrap();
        assert_eq!(c.deformation.kind(), "custom-g1");
        let c = ExperimentConfig::from_json(r#"{"deformation": {"kind": "warping"}}"#).unwrap();
        assert_eq!(c.deformation, Deformation::Warping { f: None });
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation_bounds() {
        let mut c = ExperimentConfig::default();
        c.validate().unwrap();
        c.r_max = 9;
        assert!(c.validate().is_err());
        c.r_max = 4;
        c.grid_n = 48;
        assert!(c.validate().is_err());
        c.grid_n = 512;
        assert!(c.validate().is_err());
        c.grid_n = 32;
        c.format = "xml".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn inline_geometry() {
        let g: InlineGeometry = serde_json::from_str(
            r#"{"domain": [[0, "2*pi"], [0, "2*pi"], [0, "2*pi"]], "periodic": [true, true, true],
                "g0": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "exp(0.2*sin(x1))"]],
                "torus": ["u", "0", "v"], "vertical": [["0", "0", "1"]]}"#,
        )
        .unwrap();
        let e = g.build(&DerivativeStencil::default()).unwrap();
        assert_eq!(e.chart.dim(), 3);
        assert!(e.foliation.is_some());
        let row = |a: &str, b: &str, c: &str| vec![a.to_string(), b.to_string(), c.to_string()];
        let asym = InlineGeometry { g0: vec![row("1", "x1", "0"), row("0", "1", "0"), row("0", "0", "1")], ..g.clone() };
        assert!(asym.build(&DerivativeStencil::default()).is_err());
    }
}
