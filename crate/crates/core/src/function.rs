//! Real functions on `[0, 1]`: the regression function, estimates, and the
//! perturbations fed to Fréchet derivatives all implement [`RegressionFunction`].

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{phi, DesignGrid};
use crate::quadrature::{gauss_legendre5, simpson};

/// A square-integrable function on `[0, 1]`.
///
/// The provided methods fall back to quadrature; types with closed forms
/// override them.
pub trait RegressionFunction: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64) -> f64;

    /// `∫₀¹ f²`.
    fn norm_sq(&self) -> f64 {
        simpson(|x| self.eval(x).powi(2), 0.0, 1.0)
    }

    /// `∫₀¹ f·g`.
    fn inner(&self, other: &dyn RegressionFunction) -> f64 {
        simpson(|x| self.eval(x) * other.eval(x), 0.0, 1.0)
    }

    /// `∫ₐᵇ f`, used for the step-extension loss.
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        let pieces = 4;
        let w = (b - a) / pieces as f64;
        (0..pieces)
            .map(|i| {
                let lo = a + i as f64 * w;
                gauss_legendre5(|x| self.eval(x), lo, lo + w)
            })
            .sum()
    }

    /// Continuous Fourier coefficient `θ_j = ∫₀¹ f φ_j`.
    fn fourier_coefficient(&self, j: usize) -> f64 {
        simpson(|x| self.eval(x) * phi(j, x), 0.0, 1.0)
    }

    fn as_any(&self) -> &dyn Any;
}

/// `S ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl RegressionFunction for Zero {
    fn eval(&self, _x: f64) -> f64 {
        0.0
    }
    fn norm_sq(&self) -> f64 {
        0.0
    }
    fn inner(&self, _other: &dyn RegressionFunction) -> f64 {
        0.0
    }
    fn cell_integral(&self, _a: f64, _b: f64) -> f64 {
        0.0
    }
    fn fourier_coefficient(&self, _j: usize) -> f64 {
        0.0
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// A finite expansion `Σ c_j φ_j` in the trigonometric basis.
///
/// All integrals are exact: the basis is orthonormal in `L₂[0,1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPolynomial {
    coeffs: BTreeMap<usize, f64>,
}

impl TrigPolynomial {
    /// Build from `(j, c_j)` pairs; repeated indices are summed.
    pub fn new(terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (j, c) in terms {
            assert!(j >= 1, "basis index starts at 1");
            *coeffs.entry(j).or_insert(0.0) += c;
        }
        Self { coeffs }
    }

    /// Dense coefficients `c_1..c_len` (index 0 holds `c_1`).
    pub fn from_dense(coeffs: &[f64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, &c)| (i + 1, c)),
        )
    }

    pub fn coefficient(&self, j: usize) -> f64 {
        self.coeffs.get(&j).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().map(|(&j, &c)| (j, c))
    }

    pub fn max_index(&self) -> usize {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }
}

/// `∫ₐᵇ φ_j`.
fn basis_integral(j: usize, a: f64, b: f64) -> f64 {
    if j == 1 {
        return b - a;
    }
    let w = 2.0 * std::f64::consts::PI * (j / 2) as f64;
    let s2 = std::f64::consts::SQRT_2;
    if j % 2 == 0 {
        s2 * ((w * b).sin() - (w * a).sin()) / w
    } else {
        s2 * ((w * a).cos() - (w * b).cos()) / w
    }
}

impl RegressionFunction for TrigPolynomial {
    fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().map(|(&j, &c)| c * phi(j, x)).sum()
    }
    fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }
    fn inner(&self, other: &dyn RegressionFunction) -> f64 {
        match other.as_any().downcast_ref::<TrigPolynomial>() {
            Some(p) => self.coeffs.iter().map(|(&j, &c)| c * p.coefficient(j)).sum(),
            None => self
                .coeffs
                .iter()
                .map(|(&j, &c)| c * other.fourier_coefficient(j))
                .sum(),
        }
    }
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        self.coeffs.iter().map(|(&j, &c)| c * basis_integral(j, a, b)).sum()
    }
    fn fourier_coefficient(&self, j: usize) -> f64 {
        self.coefficient(j)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Any closure, integrated by quadrature.
#[derive(Clone)]
pub struct FnFunction {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for FnFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFunction").field("name", &self.name).finish()
    }
}

impl RegressionFunction for FnFunction {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Pointwise product `f·χ`, used for the non-periodic reduction.
#[derive(Debug, Clone)]
pub struct Product {
    pub left: Arc<dyn RegressionFunction>,
    pub right: Arc<dyn RegressionFunction>,
}

impl RegressionFunction for Product {
    fn eval(&self, x: f64) -> f64 {
        self.left.eval(x) * self.right.eval(x)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Right-continuous step function on the design cells:
/// value `v_1` on `[0, x_1]` and `v_k` on `(x_{k-1}, x_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "step function needs at least one value");
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl RegressionFunction for StepFunction {
    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        // Cell k (1-based) is (x_{k-1}, x_k]; x = k/n lands in cell k.
        let k = (x * n as f64).ceil() as isize;
        let k = k.clamp(1, n as isize) as usize;
        self.values[k - 1]
    }
    fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        // Exact: split [a, b] at the knots.
        let n = self.values.len() as f64;
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let k = ((lo * n).floor() + 1.0).min(n);
            let hi = (k / n).min(b);
            let hi = if hi <= lo { b } else { hi };
            total += self.eval(0.5 * (lo + hi)) * (hi - lo);
            lo = hi;
        }
        total
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// A function together with its values on a design grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    function: Arc<dyn RegressionFunction>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(function: Arc<dyn RegressionFunction>, grid: &DesignGrid) -> Self {
        let values = grid.points().iter().map(|&x| function.eval(x)).collect();
        Self { function, values }
    }

    /// Wrap precomputed grid values; `values` must be the function on the grid.
    pub fn from_parts(function: Arc<dyn RegressionFunction>, values: Vec<f64>) -> Self {
        Self { function, values }
    }

    pub fn function(&self) -> &Arc<dyn RegressionFunction> {
        &self.function
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.function.eval(x)
    }
}
