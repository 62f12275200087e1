//! Coordinate charts, points and tangent vectors.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{GeomError, Result};
use crate::math::{floor, sqrt};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 8;

/// A box-shaped coordinate domain; some coordinates may be periodic.
///
/// Periodic coordinates are identified modulo the interval length and points
/// are stored reduced to `[lo, hi)`. Non-periodic intervals are closed and
/// are expected to already exclude any coordinate singularity by a margin.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    domain: Vec<(f64, f64)>,
    periodic: Vec<bool>,
}

impl Chart {
    pub fn new(domain: Vec<(f64, f64)>, periodic: Vec<bool>) -> Result<Self> {
        if domain.len() != periodic.len() {
            return Err(GeomError::InvalidChart(format!(
                "{} intervals but {} periodicity flags",
                domain.len(),
                periodic.len()
            )));
        }
        if domain.len() < 2 || domain.len() > MAX_DIM {
            return Err(GeomError::InvalidChart(format!(
                "dimension {} outside 2..={MAX_DIM}",
                domain.len()
            )));
        }
        for (i, (lo, hi)) in domain.iter().enumerate() {
            if !(hi - lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
                return Err(GeomError::InvalidChart(format!("interval {i} is empty or unbounded")));
            }
        }
        Ok(Chart { domain, periodic })
    }

    /// `[0, 2pi)^n`, all periodic.
    pub fn torus(n: usize) -> Result<Self> {
        Chart::new(alloc::vec![(0.0, core::f64::consts::TAU); n], alloc::vec![true; n])
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    /// Chart of the product manifold, coordinates `(left, right)`.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let mut domain = self.domain.clone();
        domain.extend_from_slice(&other.domain);
        let mut periodic = self.periodic.clone();
        periodic.extend_from_slice(&other.periodic);
        Chart::new(domain, periodic)
    }

    /// Reduces periodic coordinates in place.
    pub fn reduce(&self, coords: &mut [f64]) {
        for (i, c) in coords.iter_mut().enumerate() {
            if self.periodic[i] {
                let (lo, hi) = self.domain[i];
                let len = hi - lo;
                let mut r = *c - len * floor((*c - lo) / len);
                if r >= hi {
                    r -= len;
                }
                *c = r;
            }
        }
    }

    /// Distance between two coordinate tuples, honouring periodicity.
    pub fn coord_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            let mut d = a[i] - b[i];
            if self.periodic[i] {
                let (lo, hi) = self.domain[i];
                let len = hi - lo;
                d -= len * floor(d / len + 0.5);
            }
            s += d * d;
        }
        sqrt(s)
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(GeomError::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }

    /// Validates and reduces a coordinate tuple.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        self.check_len(coords.len())?;
        let mut c = coords.to_vec();
        for (axis, v) in c.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeomError::OutOfDomain { axis, value: *v });
            }
        }
        self.reduce(&mut c);
        for (axis, v) in c.iter().enumerate() {
            let (lo, hi) = self.domain[axis];
            if !self.periodic[axis] && (*v < lo || *v > hi) {
                return Err(GeomError::OutOfDomain { axis, value: *v });
            }
        }
        Ok(Point { coords: c })
    }

    /// Deterministic well-spread interior points (Kronecker sequence).
    ///
    /// Non-periodic coordinates keep 5% of the interval away from each end.
    pub fn sample_points(&self, count: usize) -> Vec<Point> {
        const ALPHAS: [f64; MAX_DIM] = [
            0.414_213_562_373_095,
            0.732_050_807_568_877,
            0.236_067_977_499_790,
            0.645_751_311_064_591,
            0.316_624_790_355_400,
            0.605_551_275_463_989,
            0.123_105_625_617_661,
            0.358_898_943_540_674,
        ];
        (0..count)
            .map(|k| {
                let coords: Vec<f64> = (0..self.dim())
                    .map(|i| {
                        let frac = {
                            let x = 0.5 + (k as f64 + 1.0) * ALPHAS[i];
                            x - floor(x)
                        };
                        let (lo, hi) = self.domain[i];
                        if self.periodic[i] {
                            lo + (hi - lo) * frac
                        } else {
                            let m = 0.05 * (hi - lo);
                            lo + m + (hi - lo - 2.0 * m) * frac
                        }
                    })
                    .collect();
                Point { coords }
            })
            .collect()
    }
}

/// A point of a chart with periodic coordinates reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Builds a point without domain checks.
    #[cfg(test)]
    pub(crate) fn raw(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// A tangent vector at a point, in coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.dim() {
            return Err(GeomError::DimensionMismatch { expected: base.dim(), found: components.len() });
        }
        Ok(TangentVector { base, components })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{PI, TAU};

    fn sphere_chart() -> Chart {
        Chart::new(alloc::vec![(0.01, PI - 0.01), (0.0, TAU)], alloc::vec![false, true]).unwrap()
    }

    #[test]
    fn periodic_coordinates_are_reduced() {
        let c = sphere_chart();
        let p = c.point(&[1.0, TAU + 0.5]).unwrap();
        assert!((p.coords()[1] - 0.5).abs() < 1e-15);
        let q = c.point(&[1.0, -0.25]).unwrap();
        assert!((q.coords()[1] - (TAU - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn outside_domain_is_an_error() {
        let c = sphere_chart();
        assert_eq!(c.point(&[0.0, 1.0]), Err(GeomError::OutOfDomain { axis: 0, value: 0.0 }));
        assert!(matches!(c.point(&[1.0]), Err(GeomError::DimensionMismatch { .. })));
    }

    #[test]
    fn invalid_charts() {
        assert!(Chart::new(alloc::vec![(0.0, 1.0)], alloc::vec![false, false]).is_err());
        assert!(Chart::new(alloc::vec![(0.0, 1.0), (2.0, 2.0)], alloc::vec![false, false]).is_err());
        assert!(Chart::new(alloc::vec![(0.0, 1.0)], alloc::vec![false]).is_err());
    }

    #[test]
    fn samples_stay_inside() {
        let c = sphere_chart();
        for p in c.sample_points(200) {
            assert!(c.point(p.coords()).is_ok());
        }
    }

    #[test]
    fn periodic_distance_wraps() {
        let c = sphere_chart();
        let d = c.coord_distance(&[1.0, 0.01], &[1.0, TAU - 0.01]);
        assert!((d - 0.02).abs() < 1e-12);
    }
}
