//! Central finite-difference stencils with optional Richardson extrapolation.

use alloc::vec::Vec;

use crate::error::{contract, Result};

/// Accuracy order of the central difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccuracyOrder {
    Second,
    Fourth,
}

impl AccuracyOrder {
    fn exponent(self) -> i32 {
        match self {
            AccuracyOrder::Second => 2,
            AccuracyOrder::Fourth => 4,
        }
    }
}

/// Step sizes and scheme for first derivatives.
///
/// `step` is used for derivatives of the metric itself; `nested_step` for
/// derivatives of quantities that are already finite differences (the
/// Christoffel symbols when building curvature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeStencil {
    pub order: AccuracyOrder,
    pub step: f64,
    pub nested_step: f64,
    pub richardson: bool,
}

impl Default for DerivativeStencil {
    fn default() -> Self {
        DerivativeStencil { order: AccuracyOrder::Fourth, step: 1e-3, nested_step: 5e-3, richardson: true }
    }
}

impl DerivativeStencil {
    pub fn new(order: u32, step: f64, nested_step: f64, richardson: bool) -> Result<Self> {
        let order = match order {
            2 => AccuracyOrder::Second,
            4 => AccuracyOrder::Fourth,
            o => return Err(contract(alloc::format!("stencil order {o} not in {{2, 4}}"))),
        };
        if !(step > 0.0) || !(nested_step > 0.0) {
            return Err(contract("stencil steps must be positive"));
        }
        Ok(DerivativeStencil { order, step, nested_step, richardson })
    }

    /// Same scheme with every step multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        DerivativeStencil { step: self.step * factor, nested_step: self.nested_step * factor, ..*self }
    }

    /// Derivative at 0 of `f`, using the base step.
    pub fn first<F>(&self, f: F, len: usize) -> Vec<f64>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        self.derive(&f, len, self.step)
    }

    /// Derivative at 0 of `f`, using the nested step.
    pub fn nested<F>(&self, f: F, len: usize) -> Vec<f64>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        self.derive(&f, len, self.nested_step)
    }

    pub fn scalar<F>(&self, f: F) -> f64
    where
        F: Fn(f64) -> f64,
    {
        self.derive(&|e| alloc::vec![f(e)], 1, self.step)[0]
    }

    fn derive<F>(&self, f: &F, len: usize, h: f64) -> Vec<f64>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let coarse = central(f, len, h, self.order);
        if !self.richardson {
            return coarse;
        }
        let fine = central(f, len, 0.5 * h, self.order);
        let w = (1i64 << self.order.exponent()) as f64;
        fine.iter().zip(&coarse).map(|(a, b)| (w * a - b) / (w - 1.0)).collect()
    }
}

fn central<F>(f: &F, len: usize, h: f64, order: AccuracyOrder) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let mut out = alloc::vec![0.0; len];
    match order {
        AccuracyOrder::Second => {
            let p = f(h);
            let m = f(-h);
            for i in 0..len {
                out[i] = (p[i] - m[i]) / (2.0 * h);
            }
        }
        AccuracyOrder::Fourth => {
            let p2 = f(2.0 * h);
            let p1 = f(h);
            let m1 = f(-h);
            let m2 = f(-2.0 * h);
            for i in 0..len {
                out[i] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, exp, sin};

    #[test]
    fn fourth_order_with_richardson_is_accurate() {
        let st = DerivativeStencil::default();
        let d = st.scalar(|e| sin(1.3 + e));
        assert!((d - cos(1.3)).abs() < 1e-12);
        let d = st.scalar(|e| exp(0.7 + e));
        assert!((d - exp(0.7)).abs() < 1e-12);
    }

    #[test]
    fn second_order_converges_quadratically() {
        let f = |e: f64| sin(0.4 + e);
        let err = |h: f64| {
            let st = DerivativeStencil::new(2, h, h, false).unwrap();
            (st.scalar(f) - cos(0.4)).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(DerivativeStencil::new(3, 1e-3, 1e-3, true).is_err());
        assert!(DerivativeStencil::new(4, 0.0, 1e-3, true).is_err());
    }
}
