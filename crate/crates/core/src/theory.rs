//! Sobolev ellipsoids, the Pinsker constant, the oracle weight index and
//! the auxiliary inequalities used by the risk analysis.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{discrete_fourier, phi, DesignGrid};
use crate::error::{invalid, Result};
use crate::function::{RegressionFunction, SampledFunction, StepFunction};
use crate::weights::{a_beta, TuningSequences, WeightIndex};

/// `W^k_r`: periodic functions with `Σ_{i≤k} ‖f^{(i)}‖² ≤ r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevBall {
    pub k: u32,
    pub r: f64,
}

impl SobolevBall {
    pub fn new(k: u32, r: f64) -> Result<Self> {
        if k < 1 {
            return Err(invalid("smoothness k must be >= 1"));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("radius must be positive, got {r}")));
        }
        Ok(Self { k, r })
    }
}

/// `a_j = Σ_{i=0}^{k} (2π[j/2])^{2i}`.
pub fn ellipsoid_coeff(j: usize, k: u32) -> f64 {
    let w2 = (2.0 * PI * (j / 2) as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for _ in 0..k {
        term *= w2;
        sum += term;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub inside: bool,
    /// `r − Σ a_j θ_j²`.
    pub margin: f64,
}

/// Ellipsoid test `Σ a_j θ_j² ≤ r` for `θ = (θ_1, θ_2, ..)`.
pub fn ellipsoid_membership(theta: &[f64], ball: &SobolevBall) -> Membership {
    let s: f64 = theta
        .iter()
        .enumerate()
        .map(|(i, t)| ellipsoid_coeff(i + 1, ball.k) * t * t)
        .sum();
    let margin = ball.r - s;
    Membership {
        inside: margin >= 0.0,
        margin,
    }
}

fn check_constant_args(k: u32, r: f64, varsigma: f64) -> Result<f64> {
    SobolevBall::new(k, r)?;
    if !(varsigma > 0.0) {
        return Err(invalid(format!("varsigma must be positive, got {varsigma}")));
    }
    Ok(k as f64)
}

/// `γ_k = (2k+1)^{1/(2k+1)} (k/(π(k+1)))^{2k/(2k+1)} r^{1/(2k+1)} ς^{2k/(2k+1)}`.
pub fn pinsker_constant(k: u32, r: f64, varsigma: f64) -> Result<f64> {
    let kf = check_constant_args(k, r, varsigma)?;
    let p = 2.0 * kf + 1.0;
    Ok(p.powf(1.0 / p)
        * (kf / (PI * (kf + 1.0))).powf(2.0 * kf / p)
        * r.powf(1.0 / p)
        * varsigma.powf(2.0 * kf / p))
}

/// The constant with the exponents `(2k+1)^{−(2k+1)}` and `r^{−(2k+1)}`;
/// kept for comparison output only.
pub fn pinsker_constant_as_printed(k: u32, r: f64, varsigma: f64) -> Result<f64> {
    let kf = check_constant_args(k, r, varsigma)?;
    let p = 2.0 * kf + 1.0;
    Ok(p.powf(-p) * (kf / (PI * (kf + 1.0))).powf(2.0 * kf / p) * r.powf(-p) * varsigma.powf(2.0 * kf / p))
}

/// `∫₀¹ (1 − z^k)² dz = 2k² / ((k+1)(2k+1))`.
pub fn pinsker_shape_integral(k: u32) -> f64 {
    let kf = k as f64;
    2.0 * kf * kf / ((kf + 1.0) * (2.0 * kf + 1.0))
}

/// Limit of `n^{2k/(2k+1)}` times the risk of the oracle Pinsker weights:
/// `r π^{−2k} (A_k r̄)^{−2k/(2k+1)} + ς (A_k r̄)^{1/(2k+1)} ∫₀¹(1 − z^k)²`
/// with `r̄ = r/ς`.
pub fn asymptotic_upper_risk(k: u32, r: f64, varsigma: f64) -> Result<f64> {
    let kf = check_constant_args(k, r, varsigma)?;
    let p = 2.0 * kf + 1.0;
    let ar = a_beta(k)? * r / varsigma;
    let bias = r * PI.powf(-2.0 * kf) * ar.powf(-2.0 * kf / p);
    let variance = varsigma * ar.powf(1.0 / p) * pinsker_shape_integral(k);
    Ok(bias + variance)
}

/// `α̃ = (k, l̃ ε)` with `l̃ = inf{i ≥ 1 : iε ≥ r̄} ∧ m` and `r̄ = r/ς`.
pub fn oracle_index(ball: &SobolevBall, varsigma: f64, seqs: &TuningSequences) -> Result<WeightIndex> {
    if !(varsigma > 0.0) {
        return Err(invalid(format!("varsigma must be positive, got {varsigma}")));
    }
    let rbar = ball.r / varsigma;
    let eps = seqs.eps_n;
    let m = seqs.m as u64;
    let mut i = ((rbar / eps).ceil().max(1.0) as u64).min(m.max(1));
    while i > 1 && (i - 1) as f64 * eps >= rbar {
        i -= 1;
    }
    while i < m && (i as f64) * eps < rbar {
        i += 1;
    }
    WeightIndex::new(ball.k, i as u32, eps)
}

/// `T(f)(x) = f(x₁)` on `[0, x₁]` and `f(x_l)` on `(x_{l−1}, x_l]`.
pub fn step_extension(values: &[f64], grid: &DesignGrid) -> Result<SampledFunction> {
    if values.len() != grid.n() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: grid.n(),
            got: values.len(),
        });
    }
    Ok(SampledFunction::from_parts(
        Arc::new(StepFunction::new(values.to_vec())),
        values.to_vec(),
    ))
}

/// `∫ₓ₍ₗ₋₁₎^{x_l} S` for every cell of the grid.
pub fn cell_integrals(s: &dyn RegressionFunction, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|l| s.cell_integral((l - 1) as f64 / n as f64, l as f64 / n as f64))
        .collect()
}

/// `‖T(v) − S‖²` given the cell integrals of `S` and `‖S‖²`.
pub fn step_extension_loss_with(values: &[f64], cells: &[f64], s_norm_sq: f64) -> f64 {
    let n = values.len() as f64;
    let sq: f64 = values.iter().map(|v| v * v).sum::<f64>() / n;
    let cross: f64 = values.iter().zip(cells).map(|(v, c)| v * c).sum();
    (sq - 2.0 * cross + s_norm_sq).max(0.0)
}

/// `‖T(v) − S‖²` over `[0, 1]`.
pub fn step_extension_loss(values: &[f64], s: &dyn RegressionFunction) -> f64 {
    let cells = cell_integrals(s, values.len());
    step_extension_loss_with(values, &cells, s.norm_sq())
}

/// Outcome of checking an inequality over a battery of cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub holds: bool,
    /// Smallest `rhs − lhs` seen; negative on violation.
    pub worst_slack: f64,
    pub cases: usize,
}

impl LemmaCheck {
    fn new() -> Self {
        Self {
            holds: true,
            worst_slack: f64::INFINITY,
            cases: 0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, tol: f64) {
        let slack = rhs - lhs;
        self.worst_slack = self.worst_slack.min(slack);
        self.holds &= slack >= -tol * rhs.abs().max(1.0);
        self.cases += 1;
    }

    pub fn merge(mut self, other: LemmaCheck) -> Self {
        self.holds &= other.holds;
        self.worst_slack = self.worst_slack.min(other.worst_slack);
        self.cases += other.cases;
        self
    }
}

const ROUNDING: f64 = 1e-12;

/// `m^{2k} Σ_{j=m+1}^{n} θ²_{j,n} ≤ 4r / π^{2(k−1)}` for all `1 ≤ m < n`.
pub fn lemma_tail_bound(s: &dyn RegressionFunction, ball: &SobolevBall, n: usize) -> Result<LemmaCheck> {
    let grid = DesignGrid::new(n)?;
    let y: Vec<f64> = grid.points().iter().map(|&x| s.eval(x)).collect();
    let theta = discrete_fourier(&y, &grid)?;
    let rhs = 4.0 * ball.r / PI.powi(2 * (ball.k as i32 - 1));
    let mut tail = vec![0.0; n + 1];
    for j in (1..=n).rev() {
        tail[j - 1] = tail[j] + theta.get(j).powi(2);
    }
    let mut check = LemmaCheck::new();
    for (m, t) in tail.iter().enumerate().take(n).skip(1) {
        let lhs = (m as f64).powi(2 * ball.k as i32) * t;
        check.record(lhs, rhs, ROUNDING);
    }
    Ok(check)
}

/// `|Σ_{l=2}^{N} l^m (φ_l²(x) − 1)| ≤ 2^m N^m`.
pub fn lemma_basis_square_sum(m: u32, n_max: usize, x: f64) -> LemmaCheck {
    let mut check = LemmaCheck::new();
    let mut acc = 0.0;
    for l in 2..=n_max {
        acc += (l as f64).powi(m as i32) * (phi(l, x).powi(2) - 1.0);
        let rhs = 2f64.powi(m as i32) * (l as f64).powi(m as i32);
        check.record(acc.abs(), rhs, ROUNDING);
    }
    check
}

/// `|θ_{j,n} − θ_j| ≤ 2π √r j / n` for `1 ≤ j ≤ n`.
pub fn lemma_coeff_gap(s: &dyn RegressionFunction, r: f64, n: usize) -> Result<LemmaCheck> {
    let grid = DesignGrid::new(n)?;
    let y: Vec<f64> = grid.points().iter().map(|&x| s.eval(x)).collect();
    let theta_n = discrete_fourier(&y, &grid)?;
    let mut check = LemmaCheck::new();
    for j in 1..=n {
        let lhs = (theta_n.get(j) - s.fourier_coefficient(j)).abs();
        let rhs = 2.0 * PI * r.sqrt() * j as f64 / n as f64;
        check.record(lhs, rhs, 1e-9);
    }
    Ok(check)
}

/// `‖Ŝ − S‖²_n ≥ (1−δ) ‖T(Ŝ) − S‖² − (δ⁻¹ − 1) r / n²`.
pub fn lemma_norm_transfer(estimate: &[f64], s: &dyn RegressionFunction, delta: f64, r: f64) -> Result<LemmaCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = estimate.len();
    let grid = DesignGrid::new(n)?;
    let empiric: f64 = estimate
        .iter()
        .zip(grid.points())
        .map(|(v, &x)| (v - s.eval(x)).powi(2))
        .sum::<f64>()
        / n as f64;
    let l2 = step_extension_loss(estimate, s);
    let lower = (1.0 - delta) * l2 - (1.0 / delta - 1.0) * r / (n * n) as f64;
    let mut check = LemmaCheck::new();
    // The inequality reads lower ≤ empiric.
    check.record(lower, empiric, 1e-9);
    Ok(check)
}
