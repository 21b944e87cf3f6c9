use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function::RegressionFunction;

/// The operator `S ↦ g²(x, S)` generating the noise scales `σ_j = g(x_j, S)`.
pub trait ScaleModel: Send + Sync + fmt::Debug {
    /// `g²(x, S)`.
    fn g2(&self, x: f64, s: &dyn RegressionFunction) -> f64;

    /// `g²(x, S)` at many points; implementations share work across `xs`.
    fn g2_profile(&self, s: &dyn RegressionFunction, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.g2(x, s)).collect()
    }

    fn g(&self, x: f64, s: &dyn RegressionFunction) -> f64 {
        self.g2(x, s).sqrt()
    }

    /// Fréchet derivative `L_{x,S}(f)` of `g²(x, ·)` at `S`, if known.
    fn frechet(&self, _x: f64, _s: &dyn RegressionFunction, _f: &dyn RegressionFunction) -> Option<f64> {
        None
    }

    /// `ς(S) = ∫₀¹ g²(x, S) dx`.
    fn varsigma(&self, s: &dyn RegressionFunction) -> f64 {
        let (xs, ws) = crate::quadrature::simpson_nodes(0.0, 1.0);
        let g2 = self.g2_profile(s, &xs);
        g2.iter().zip(&ws).map(|(g, w)| g * w).sum()
    }

    /// `g_* = inf_x inf_S g²(x, S)` over all `S`.
    fn g2_floor(&self) -> f64;

    /// Whether `g` does not depend on `S`.
    fn constant_variance(&self) -> bool;
}

/// `g²(x, S) = c₀ + c₁ x + c₂ S²(x) + c₃ ‖S‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconometricScale {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl EconometricScale {
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(invalid(format!("c0 must be positive, got {c0}")));
        }
        if [c1, c2, c3].iter().any(|c| !(*c >= 0.0) || !c.is_finite()) || !c0.is_finite() {
            return Err(invalid("c1, c2, c3 must be finite and nonnegative"));
        }
        Ok(Self { c0, c1, c2, c3 })
    }

    /// `g ≡ σ`.
    pub fn homogeneous(sigma: f64) -> Result<Self> {
        Self::new(sigma * sigma, 0.0, 0.0, 0.0)
    }

    fn at(&self, x: f64, sx: f64, norm_sq: f64) -> f64 {
        self.c0 + self.c1 * x + self.c2 * sx * sx + self.c3 * norm_sq
    }
}

impl ScaleModel for EconometricScale {
    fn g2(&self, x: f64, s: &dyn RegressionFunction) -> f64 {
        let norm = if self.c3 != 0.0 { s.norm_sq() } else { 0.0 };
        let sx = if self.c2 != 0.0 { s.eval(x) } else { 0.0 };
        self.at(x, sx, norm)
    }

    fn g2_profile(&self, s: &dyn RegressionFunction, xs: &[f64]) -> Vec<f64> {
        let norm = if self.c3 != 0.0 { s.norm_sq() } else { 0.0 };
        xs.iter()
            .map(|&x| {
                let sx = if self.c2 != 0.0 { s.eval(x) } else { 0.0 };
                self.at(x, sx, norm)
            })
            .collect()
    }

    fn frechet(&self, x: f64, s: &dyn RegressionFunction, f: &dyn RegressionFunction) -> Option<f64> {
        let local = if self.c2 != 0.0 { 2.0 * self.c2 * s.eval(x) * f.eval(x) } else { 0.0 };
        let global = if self.c3 != 0.0 { 2.0 * self.c3 * s.inner(f) } else { 0.0 };
        Some(local + global)
    }

    /// Closed form `c₀ + c₁/2 + (c₂ + c₃)‖S‖²`.
    fn varsigma(&self, s: &dyn RegressionFunction) -> f64 {
        let norm = if self.c2 + self.c3 != 0.0 { s.norm_sq() } else { 0.0 };
        self.c0 + 0.5 * self.c1 + (self.c2 + self.c3) * norm
    }

    fn g2_floor(&self) -> f64 {
        self.c0
    }

    fn constant_variance(&self) -> bool {
        self.c2 == 0.0 && self.c3 == 0.0
    }
}

/// `g̃²(x, S) = g²(x, S) χ²(x) + ε²` for the cut-off model.
#[derive(Debug, Clone)]
pub struct CutoffScale {
    pub inner: Arc<dyn ScaleModel>,
    pub chi: Arc<dyn RegressionFunction>,
    pub epsilon: f64,
}

impl CutoffScale {
    pub fn new(inner: Arc<dyn ScaleModel>, chi: Arc<dyn RegressionFunction>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { inner, chi, epsilon })
    }
}

impl ScaleModel for CutoffScale {
    fn g2(&self, x: f64, s: &dyn RegressionFunction) -> f64 {
        let c = self.chi.eval(x);
        self.inner.g2(x, s) * c * c + self.epsilon * self.epsilon
    }

    fn g2_profile(&self, s: &dyn RegressionFunction, xs: &[f64]) -> Vec<f64> {
        let e2 = self.epsilon * self.epsilon;
        self.inner
            .g2_profile(s, xs)
            .into_iter()
            .zip(xs)
            .map(|(g, &x)| {
                let c = self.chi.eval(x);
                g * c * c + e2
            })
            .collect()
    }

    fn frechet(&self, x: f64, s: &dyn RegressionFunction, f: &dyn RegressionFunction) -> Option<f64> {
        let c = self.chi.eval(x);
        self.inner.frechet(x, s, f).map(|l| l * c * c)
    }

    fn varsigma(&self, s: &dyn RegressionFunction) -> f64 {
        let (xs, ws) = crate::quadrature::simpson_nodes(0.0, 1.0);
        let g2 = self.g2_profile(s, &xs);
        g2.iter().zip(&ws).map(|(g, w)| g * w).sum()
    }

    fn g2_floor(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    fn constant_variance(&self) -> bool {
        self.inner.constant_variance()
    }
}

/// `∫₀¹ |f|` by quadrature.
#[cfg(test)]
pub(crate) fn l1_norm(f: &dyn RegressionFunction) -> f64 {
    crate::quadrature::simpson(|x| f.eval(x).abs(), 0.0, 1.0)
}
