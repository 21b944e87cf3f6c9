//! Trigonometric basis on `[0, 1]`, the empiric inner product on the design
//! grid `x_l = l/n`, and the discrete Fourier transform of observations.
//!
//! For odd `n` the first `n` basis functions are exactly orthonormal for the
//! empiric inner product, so the transform is an orthogonal change of
//! coordinates: Parseval holds and `λ ≡ 1` reconstructs the data.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function::{SampledFunction, TrigPolynomial};

/// Equidistant design `x_l = l/n`, `l = 1..n`, with `n` odd.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGrid {
    n: usize,
    points: Vec<f64>,
}

impl DesignGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("sample size must be positive"));
        }
        if n % 2 == 0 {
            return Err(Error::EvenDesign(n));
        }
        let points = (1..=n).map(|l| l as f64 / n as f64).collect();
        Ok(Self { n, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Empirical Fourier coefficients `θ̂_{j,n} = (Y, φ_j)_n`, `j = 1..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub n: usize,
    pub theta_hat: Vec<f64>,
}

impl FourierCoeffs {
    pub fn new(theta_hat: Vec<f64>) -> Self {
        Self {
            n: theta_hat.len(),
            theta_hat,
        }
    }

    /// `θ̂_j` with 1-based `j`.
    pub fn get(&self, j: usize) -> f64 {
        self.theta_hat[j - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta_hat
    }
}

/// `φ_j(x)` without argument checks; `j ≥ 1`.
#[inline]
pub(crate) fn phi(j: usize, x: f64) -> f64 {
    if j == 1 {
        return 1.0;
    }
    let arg = 2.0 * PI * (j / 2) as f64 * x;
    if j % 2 == 0 {
        SQRT_2 * arg.cos()
    } else {
        SQRT_2 * arg.sin()
    }
}

/// `φ_j(l/n)` with the phase reduced exactly in integers.
#[inline]
pub(crate) fn phi_on_grid(j: usize, l: usize, n: usize) -> f64 {
    if j == 1 {
        return 1.0;
    }
    let phase = ((j / 2) * l) % n;
    let arg = 2.0 * PI * phase as f64 / n as f64;
    if j % 2 == 0 {
        SQRT_2 * arg.cos()
    } else {
        SQRT_2 * arg.sin()
    }
}

/// `(u, v)_n = (1/n) Σ u_l v_l`.
pub fn empiric_inner_product(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(invalid("empiric inner product of empty sequences"));
    }
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / u.len() as f64)
}

/// The standard trigonometric basis: `φ_1 = 1`, `φ_j(x) = √2 cos(2π[j/2]x)`
/// for even `j` and `√2 sin(2π[j/2]x)` for odd `j ≥ 3`.
pub fn trig_basis_eval(j: usize, x: f64) -> Result<f64> {
    if j < 1 {
        return Err(invalid("basis index j must be >= 1"));
    }
    Ok(phi(j, x))
}

/// `θ̂_j = (Y, φ_j)_n` for `j = 1..n`.
pub fn discrete_fourier(y: &[f64], grid: &DesignGrid) -> Result<FourierCoeffs> {
    let n = grid.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let theta = (1..=n)
        .map(|j| {
            (1..=n)
                .map(|l| y[l - 1] * phi_on_grid(j, l, n))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    Ok(FourierCoeffs::new(theta))
}

/// `Ŝ_λ = Σ_j λ(j) θ̂_j φ_j` as a function on `[0, 1]`.
pub fn synthesize(lambda: &[f64], coeffs: &FourierCoeffs) -> Result<TrigPolynomial> {
    if lambda.len() != coeffs.n {
        return Err(Error::DimensionMismatch {
            expected: coeffs.n,
            got: lambda.len(),
        });
    }
    let dense: Vec<f64> = lambda
        .iter()
        .zip(&coeffs.theta_hat)
        .map(|(l, t)| l * t)
        .collect();
    Ok(TrigPolynomial::from_dense(&dense))
}

/// `Ŝ_λ(x)` at a single point.
pub fn synthesize_at(lambda: &[f64], coeffs: &FourierCoeffs, x: f64) -> Result<f64> {
    if lambda.len() != coeffs.n {
        return Err(Error::DimensionMismatch {
            expected: coeffs.n,
            got: lambda.len(),
        });
    }
    Ok(lambda
        .iter()
        .zip(&coeffs.theta_hat)
        .enumerate()
        .map(|(i, (l, t))| l * t * phi(i + 1, x))
        .sum())
}

/// `Ŝ_λ` evaluated on the design grid (and kept as a function).
pub fn synthesize_on_grid(
    lambda: &[f64],
    coeffs: &FourierCoeffs,
    grid: &DesignGrid,
) -> Result<SampledFunction> {
    if grid.n() != coeffs.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            got: coeffs.n,
        });
    }
    let poly = synthesize(lambda, coeffs)?;
    let table = BasisTable::new(grid);
    let dense: Vec<f64> = (1..=coeffs.n).map(|j| poly.coefficient(j)).collect();
    let values = table.synthesize(&dense);
    Ok(SampledFunction::from_parts(Arc::new(poly), values))
}

/// Precomputed `φ_j(x_l)` for repeated transforms at one sample size.
///
/// Row `j-1` holds `φ_j` on the grid. Memory is `n²` doubles.
#[derive(Debug, Clone)]
pub struct BasisTable {
    n: usize,
    rows: Vec<f64>,
}

impl BasisTable {
    pub fn new(grid: &DesignGrid) -> Self {
        let n = grid.n();
        let mut rows = Vec::with_capacity(n * n);
        for j in 1..=n {
            for l in 1..=n {
                rows.push(phi_on_grid(j, l, n));
            }
        }
        Self { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `φ_j` on the grid.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[(j - 1) * self.n..j * self.n]
    }

    /// `(v, φ_j)_n` for all `j`; `v` must have length `n`.
    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "transform input length");
        let inv = 1.0 / self.n as f64;
        (1..=self.n)
            .map(|j| self.row(j).iter().zip(v).map(|(p, y)| p * y).sum::<f64>() * inv)
            .collect()
    }

    /// `Σ_j c_j φ_j(x_l)` for all `l`; `c` may be shorter than `n`.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        assert!(c.len() <= self.n, "synthesis input length");
        let mut out = vec![0.0; self.n];
        for (j, &cj) in c.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.row(j + 1)) {
                *o += cj * p;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::RegressionFunction;

    fn sampled(grid: &DesignGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.points().iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(empiric_inner_product(&[1.0; 5], &[1.0; 5]).unwrap(), 1.0);
        let v = empiric_inner_product(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((v - 10.0 / 3.0).abs() < 1e-15);
        let g = DesignGrid::new(5).unwrap();
        let u = sampled(&g, |x| phi(1, x));
        let w = sampled(&g, |x| phi(2, x));
        assert!(empiric_inner_product(&u, &w).unwrap().abs() < 1e-15);
    }

    #[test]
    fn inner_product_rejects_mismatch() {
        assert!(matches!(
            empiric_inner_product(&[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(empiric_inner_product(&[], &[]).is_err());
    }

    #[test]
    fn basis_eval_examples() {
        assert_eq!(trig_basis_eval(1, 0.37).unwrap(), 1.0);
        assert!((trig_basis_eval(2, 0.0).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((trig_basis_eval(3, 0.25).unwrap() - SQRT_2).abs() < 1e-15);
        assert!(trig_basis_eval(0, 0.5).is_err());
    }

    #[test]
    fn grid_rejects_even_sizes() {
        assert!(matches!(DesignGrid::new(10), Err(Error::EvenDesign(10))));
        assert!(DesignGrid::new(0).is_err());
        let g = DesignGrid::new(7).unwrap();
        assert_eq!(*g.points().last().unwrap(), 1.0);
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn transform_of_basis_function_is_unit_vector() {
        let g = DesignGrid::new(11).unwrap();
        let y = sampled(&g, |x| phi(3, x));
        let c = discrete_fourier(&y, &g).unwrap();
        for j in 1..=11 {
            let expect = if j == 3 { 1.0 } else { 0.0 };
            assert!((c.get(j) - expect).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn transform_is_linear() {
        let g = DesignGrid::new(25).unwrap();
        let c = discrete_fourier(&[0.0; 25], &g).unwrap();
        assert!(c.theta_hat.iter().all(|&t| t == 0.0));
        let y = sampled(&g, |x| 2.0 * phi(1, x) + 0.5 * phi(4, x));
        let c = discrete_fourier(&y, &g).unwrap();
        for j in 1..=25 {
            let expect = match j {
                1 => 2.0,
                4 => 0.5,
                _ => 0.0,
            };
            assert!((c.get(j) - expect).abs() < 1e-12, "j = {j}");
        }
    }

    #[test]
    fn transform_rejects_bad_length() {
        let g = DesignGrid::new(5).unwrap();
        assert!(discrete_fourier(&[1.0; 4], &g).is_err());
    }

    #[test]
    fn synthesis_examples() {
        let g = DesignGrid::new(9).unwrap();
        let y = sampled(&g, |x| 3.0 * phi(1, x) + phi(2, x));
        let c = discrete_fourier(&y, &g).unwrap();

        let full = synthesize_on_grid(&[1.0; 9], &c, &g).unwrap();
        for (a, b) in full.values().iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }

        let zero = synthesize(&[0.0; 9], &c).unwrap();
        assert_eq!(zero.eval(0.3), 0.0);

        let mut ind = [0.0; 9];
        ind[0] = 1.0;
        let first = synthesize(&ind, &c).unwrap();
        for &x in &[0.0, 0.2, 0.77] {
            assert!((first.eval(x) - 3.0).abs() < 1e-12);
            assert!((synthesize_at(&ind, &c, x).unwrap() - 3.0).abs() < 1e-12);
        }
        assert!(synthesize(&[1.0; 8], &c).is_err());
    }

    #[test]
    fn table_matches_direct_transform() {
        let g = DesignGrid::new(31).unwrap();
        let y = sampled(&g, |x| (5.0 * x).sin() + x * x);
        let direct = discrete_fourier(&y, &g).unwrap();
        let table = BasisTable::new(&g);
        let fast = table.transform(&y);
        for (a, b) in direct.theta_hat.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-14);
        }
        let back = table.synthesize(&fast);
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
