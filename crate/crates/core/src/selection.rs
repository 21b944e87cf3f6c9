//! Penalized model selection over the weight family.
//!
//! The cost is
//! `J_n(λ) = Σ λ²(j) θ̂²_j − 2 Σ λ(j) θ̃_j + ρ |λ|² ς̂_n / n`
//! with `θ̃_j = θ̂²_j − ς̂_n / n` and `ς̂_n = Σ_{j > l_n} θ̂²_j`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{discrete_fourier, synthesize, synthesize_on_grid, DesignGrid, FourierCoeffs};
use crate::error::{invalid, Error, Result};
use crate::function::{SampledFunction, TrigPolynomial};
use crate::weights::{weight_family, TuningSequences, WeightIndex, WeightVector};

/// `ς̂_n = Σ_{j = l_n + 1}^{n} θ̂²_j`.
pub fn varsigma_hat(coeffs: &FourierCoeffs, l_n: usize) -> Result<f64> {
    if l_n < 1 || l_n >= coeffs.n {
        return Err(invalid(format!(
            "l_n must lie in [1, n), got {l_n} with n = {}",
            coeffs.n
        )));
    }
    Ok(coeffs.theta_hat[l_n..].iter().map(|t| t * t).sum())
}

/// The three summands of `J_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostTerms {
    /// `Σ λ² θ̂²`.
    pub fit: f64,
    /// `−2 Σ λ θ̃`.
    pub cross: f64,
    /// `ρ |λ|² ς̂ / n`.
    pub penalty: f64,
}

impl CostTerms {
    pub fn total(&self) -> f64 {
        self.fit + self.cross + self.penalty
    }
}

fn check_len(lambda: &[f64], coeffs: &FourierCoeffs) -> Result<()> {
    if lambda.len() != coeffs.n {
        return Err(Error::DimensionMismatch {
            expected: coeffs.n,
            got: lambda.len(),
        });
    }
    Ok(())
}

/// `J_n(λ)` split into its terms.
pub fn cost_terms(lambda: &[f64], coeffs: &FourierCoeffs, varsigma: f64, rho: f64) -> Result<CostTerms> {
    check_len(lambda, coeffs)?;
    let shift = varsigma / coeffs.n as f64;
    let tilde: Vec<f64> = coeffs.theta_hat.iter().map(|t| t * t - shift).collect();
    Ok(cost_with_cross(lambda, &coeffs.theta_hat, &tilde, rho * shift))
}

/// `J_n(λ)`.
pub fn cost(lambda: &[f64], coeffs: &FourierCoeffs, varsigma: f64, rho: f64) -> Result<f64> {
    Ok(cost_terms(lambda, coeffs, varsigma, rho)?.total())
}

/// The cost with an arbitrary cross sequence in place of `θ̃` and a
/// per-unit penalty `p`, i.e. `Σ λ²θ̂² − 2 Σ λ c + p |λ|²`.
pub fn cost_with_cross(lambda: &[f64], theta_hat: &[f64], cross: &[f64], p: f64) -> CostTerms {
    let mut fit = 0.0;
    let mut cr = 0.0;
    let mut norm = 0.0;
    for ((&l, &t), &c) in lambda.iter().zip(theta_hat).zip(cross) {
        if l == 0.0 {
            continue;
        }
        fit += l * l * t * t;
        cr += l * c;
        norm += l * l;
    }
    CostTerms {
        fit,
        cross: -2.0 * cr,
        penalty: p * norm,
    }
}

/// Shared prefix sums for fast evaluation over a family.
struct CostTable {
    sq: Vec<f64>,
    tilde: Vec<f64>,
    /// `P[j] = Σ_{i<j} θ̂²_i`, and likewise for `θ̃`.
    sq_prefix: Vec<f64>,
    tilde_prefix: Vec<f64>,
    unit_penalty: f64,
}

impl CostTable {
    fn new(coeffs: &FourierCoeffs, varsigma: f64, rho: f64) -> Self {
        let shift = varsigma / coeffs.n as f64;
        let sq: Vec<f64> = coeffs.theta_hat.iter().map(|t| t * t).collect();
        let tilde: Vec<f64> = sq.iter().map(|s| s - shift).collect();
        let prefix = |v: &[f64]| {
            let mut p = Vec::with_capacity(v.len() + 1);
            p.push(0.0);
            let mut acc = 0.0;
            for x in v {
                acc += x;
                p.push(acc);
            }
            p
        };
        Self {
            sq_prefix: prefix(&sq),
            tilde_prefix: prefix(&tilde),
            sq,
            tilde,
            unit_penalty: rho * shift,
        }
    }

    fn eval(&self, lambda: &WeightVector) -> CostTerms {
        let head = lambda.head();
        let support = lambda.support();
        let mut fit = self.sq_prefix[head];
        let mut cr = self.tilde_prefix[head];
        for j in head..support {
            let l = lambda[j];
            fit += l * l * self.sq[j];
            cr += l * self.tilde[j];
        }
        CostTerms {
            fit,
            cross: -2.0 * cr,
            penalty: self.unit_penalty * lambda.norm_sq(),
        }
    }
}

/// Result of one run of the adaptive procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOutput {
    pub coeffs: FourierCoeffs,
    pub selected: WeightIndex,
    pub lambda_hat: WeightVector,
    pub varsigma_hat: f64,
    /// `J_n` of every family member, in family order.
    pub costs: Vec<(WeightIndex, f64)>,
    /// `Ŝ*` on the design grid.
    pub estimate: Vec<f64>,
}

impl EstimatorOutput {
    /// `Ŝ*` as a trigonometric polynomial.
    pub fn estimate_function(&self) -> TrigPolynomial {
        synthesize(&self.lambda_hat, &self.coeffs).expect("lengths checked at selection")
    }

    /// `Ŝ*` as a function together with its grid values.
    pub fn estimate_sampled(&self) -> SampledFunction {
        SampledFunction::from_parts(
            std::sync::Arc::new(self.estimate_function()),
            self.estimate.clone(),
        )
    }

    /// Cost of the selected member.
    pub fn selected_cost(&self) -> f64 {
        self.costs
            .iter()
            .find(|(a, _)| *a == self.selected)
            .map(|c| c.1)
            .expect("selected member is in the cost table")
    }
}

/// Index of the minimizer of `J_n`; ties go to the smallest `(β, t)`.
fn argmin(costs: &[(WeightIndex, f64)]) -> usize {
    let mut best = 0;
    for (i, (a, c)) in costs.iter().enumerate().skip(1) {
        let (ba, bc) = &costs[best];
        if *c < *bc || (*c == *bc && a < ba) {
            best = i;
        }
    }
    best
}

/// `J_n` for every member, computed in parallel and returned in family order.
pub fn family_costs(
    family: &[(WeightIndex, WeightVector)],
    coeffs: &FourierCoeffs,
    varsigma: f64,
    rho: f64,
) -> Result<Vec<(WeightIndex, f64)>> {
    for (_, l) in family {
        check_len(l, coeffs)?;
    }
    let table = CostTable::new(coeffs, varsigma, rho);
    Ok(family
        .par_iter()
        .map(|(a, l)| (*a, table.eval(l).total()))
        .collect())
}

/// Selection without grid synthesis; returns the family position of `λ̂`
/// and all costs.
pub fn select_index(
    family: &[(WeightIndex, WeightVector)],
    coeffs: &FourierCoeffs,
    varsigma: f64,
    rho: f64,
) -> Result<(usize, Vec<(WeightIndex, f64)>)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let costs = family_costs(family, coeffs, varsigma, rho)?;
    Ok((argmin(&costs), costs))
}

/// `λ̂ = argmin J_n(λ)` and `Ŝ* = Ŝ_λ̂`.
pub fn select(
    family: &[(WeightIndex, WeightVector)],
    coeffs: &FourierCoeffs,
    seqs: &TuningSequences,
) -> Result<EstimatorOutput> {
    let vs = varsigma_hat(coeffs, seqs.l_n)?;
    let (best, costs) = select_index(family, coeffs, vs, seqs.rho)?;
    let (selected, lambda_hat) = family[best].clone();
    let grid = DesignGrid::new(coeffs.n)?;
    let estimate = synthesize_on_grid(&lambda_hat, coeffs, &grid)?.values().to_vec();
    Ok(EstimatorOutput {
        coeffs: coeffs.clone(),
        selected,
        lambda_hat,
        varsigma_hat: vs,
        costs,
        estimate,
    })
}

/// Full pipeline: transform, tail variance, family, selection.
pub fn estimate(y: &[f64], grid: &DesignGrid, seqs: &TuningSequences) -> Result<EstimatorOutput> {
    let coeffs = discrete_fourier(y, grid)?;
    let family = weight_family(grid.n(), seqs)?;
    select(&family, &coeffs, seqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{empiric_inner_product, BasisTable};
    use crate::weights::default_sequences;
    use proptest::prelude::*;

    fn coeffs_of(y: &[f64]) -> FourierCoeffs {
        discrete_fourier(y, &DesignGrid::new(y.len()).unwrap()).unwrap()
    }

    #[test]
    fn varsigma_hat_examples() {
        let n = 11;
        let c = coeffs_of(&vec![1.0; n]);
        assert!(varsigma_hat(&c, 3).unwrap().abs() < 1e-28);
        let mut t = vec![0.0; n];
        t[n - 1] = 1.5;
        let c = FourierCoeffs::new(t);
        assert_eq!(varsigma_hat(&c, 4).unwrap(), 2.25);
        assert!(varsigma_hat(&c, 0).is_err());
        assert!(varsigma_hat(&c, n).is_err());
    }

    #[test]
    fn cost_examples() {
        let c = FourierCoeffs::new(vec![0.3, -1.0, 0.2, 0.05, 0.7]);
        assert_eq!(cost(&[0.0; 5], &c, 0.4, 0.25).unwrap(), 0.0);

        // λ ≡ 1: J = −Σθ̂² + 2ς̂ + ρς̂.
        let vs = 0.4;
        let rho = 0.25;
        let sum_sq: f64 = c.theta_hat.iter().map(|t| t * t).sum();
        let j = cost(&[1.0; 5], &c, vs, rho).unwrap();
        assert!((j - (-sum_sq + 2.0 * vs + rho * vs)).abs() < 1e-14);

        let terms = cost_terms(&[1.0; 5], &c, vs, rho).unwrap();
        assert!((terms.penalty - rho * vs).abs() < 1e-15);
        assert!(cost(&[1.0; 4], &c, vs, rho).is_err());
    }

    #[test]
    fn cost_with_exact_cross_is_empiric_loss() {
        let n = 31;
        let grid = DesignGrid::new(n).unwrap();
        let s: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * x).sin() + x * x)
            .collect();
        let noise: Vec<f64> = (0..n).map(|i| 0.1 * ((i * 7919 % 13) as f64 - 6.0)).collect();
        let y: Vec<f64> = s.iter().zip(&noise).map(|(a, b)| a + b).collect();
        let th = coeffs_of(&y);
        let theta = coeffs_of(&s);
        let lambda: Vec<f64> = (1..=n).map(|j| (1.0 - j as f64 / 9.0).max(0.0)).collect();
        let cross: Vec<f64> = th.theta_hat.iter().zip(&theta.theta_hat).map(|(a, b)| a * b).collect();
        let j = cost_with_cross(&lambda, &th.theta_hat, &cross, 0.0).total();
        let table = BasisTable::new(&grid);
        let lc: Vec<f64> = lambda.iter().zip(&th.theta_hat).map(|(l, t)| l * t).collect();
        let est = table.synthesize(&lc);
        let diff: Vec<f64> = est.iter().zip(&s).map(|(a, b)| a - b).collect();
        let loss = empiric_inner_product(&diff, &diff).unwrap();
        let s_norm = empiric_inner_product(&s, &s).unwrap();
        assert!((j + s_norm - loss).abs() < 1e-12);
    }

    #[test]
    fn fit_term_is_estimate_norm() {
        let n = 41;
        let grid = DesignGrid::new(n).unwrap();
        let y: Vec<f64> = grid.points().iter().map(|&x| (5.0 * x).cos() + x).collect();
        let c = coeffs_of(&y);
        let lambda: Vec<f64> = (1..=n).map(|j| 1.0 / j as f64).collect();
        let est = synthesize_on_grid(&lambda, &c, &grid).unwrap();
        let norm = empiric_inner_product(est.values(), est.values()).unwrap();
        let fit = cost_terms(&lambda, &c, 0.0, 0.1).unwrap().fit;
        assert!((fit - norm).abs() < 1e-10 * norm.max(1.0));
    }

    #[test]
    fn prefix_table_matches_direct_cost() {
        let n = 101;
        let seqs = default_sequences(n).unwrap();
        let y: Vec<f64> = (0..n).map(|i| ((i * i) % 17) as f64 / 17.0 - 0.5).collect();
        let c = coeffs_of(&y);
        let vs = varsigma_hat(&c, seqs.l_n).unwrap();
        let fam = weight_family(n, &seqs).unwrap();
        let fast = family_costs(&fam, &c, vs, seqs.rho).unwrap();
        for ((_, l), (_, f)) in fam.iter().zip(&fast) {
            let slow = cost(l, &c, vs, seqs.rho).unwrap();
            assert!((slow - f).abs() < 1e-12 * slow.abs().max(1.0));
        }
    }

    #[test]
    fn single_member_and_empty_family() {
        let n = 11;
        let seqs = default_sequences(n).unwrap();
        let c = coeffs_of(&vec![0.5; n]);
        let fam = weight_family(n, &seqs).unwrap();
        let out = select(&fam[..1], &c, &seqs).unwrap();
        assert_eq!(out.selected, fam[0].0);
        assert!(matches!(select(&[], &c, &seqs), Err(Error::EmptyFamily)));
    }

    #[test]
    fn ties_go_to_smaller_index() {
        let a = WeightIndex::new(1, 2, 0.1).unwrap();
        let b = WeightIndex::new(1, 1, 0.1).unwrap();
        let c = WeightIndex::new(2, 1, 0.1).unwrap();
        assert_eq!(argmin(&[(a, 1.0), (b, 1.0), (c, 1.0)]), 1);
        assert_eq!(argmin(&[(c, 0.5), (b, 1.0)]), 0);

        let n = 11;
        let seqs = default_sequences(n).unwrap();
        let coeffs = coeffs_of(&vec![0.0; n]);
        let lam = WeightVector::from_values(vec![1.0; n]);
        let fam = vec![(a, lam.clone()), (b, lam)];
        assert_eq!(select(&fam, &coeffs, &seqs).unwrap().selected, b);
    }

    #[test]
    fn noiseless_argmin_is_exhaustive_minimum() {
        let n = 101;
        let grid = DesignGrid::new(n).unwrap();
        let seqs = default_sequences(n).unwrap();
        let y: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| {
                let w = 2.0 * std::f64::consts::PI * x;
                2.0 + std::f64::consts::SQRT_2 * (w.cos() + 0.5 * w.sin())
            })
            .collect();
        let out = estimate(&y, &grid, &seqs).unwrap();
        let best = out.selected_cost();
        let fam = weight_family(n, &seqs).unwrap();
        for (_, l) in &fam {
            assert!(best <= cost(l, &out.coeffs, out.varsigma_hat, seqs.rho).unwrap() + 1e-15);
        }
        assert_eq!(out.costs.len(), fam.len());
    }

    #[test]
    fn noiseless_smooth_function_beats_family_scan() {
        let n = 501;
        let grid = DesignGrid::new(n).unwrap();
        let seqs = default_sequences(n).unwrap();
        let s: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * x).cos().exp())
            .collect();
        let out = estimate(&s, &grid, &seqs).unwrap();
        let loss = |v: &[f64]| {
            let d: Vec<f64> = v.iter().zip(&s).map(|(a, b)| a - b).collect();
            empiric_inner_product(&d, &d).unwrap()
        };
        let fam = weight_family(n, &seqs).unwrap();
        let best_family = fam
            .iter()
            .map(|(_, l)| loss(synthesize_on_grid(l, &out.coeffs, &grid).unwrap().values()))
            .fold(f64::INFINITY, f64::min);
        // Best projection onto the first j₁ frequencies.
        let best_proj = (1..=n)
            .map(|j1| {
                let l: Vec<f64> = (1..=n).map(|j| if j <= j1 { 1.0 } else { 0.0 }).collect();
                loss(synthesize_on_grid(&l, &out.coeffs, &grid).unwrap().values())
            })
            .take(40)
            .fold(f64::INFINITY, f64::min);
        let ours = loss(&out.estimate);
        assert!(ours <= best_family.max(best_proj) + 1e-8, "{ours} {best_family} {best_proj}");
    }

    #[test]
    fn zero_data_gives_zero_estimate_and_is_deterministic() {
        let n = 51;
        let grid = DesignGrid::new(n).unwrap();
        let seqs = default_sequences(n).unwrap();
        let out = estimate(&vec![0.0; n], &grid, &seqs).unwrap();
        assert!(out.estimate.iter().all(|&v| v == 0.0));
        let y: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let a = estimate(&y, &grid, &seqs).unwrap();
        let b = estimate(&y, &grid, &seqs).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    proptest! {
        #[test]
        fn selected_cost_is_minimal(seed in 0u64..1000, half in 2usize..40) {
            let n = 2 * half + 1;
            let grid = DesignGrid::new(n).unwrap();
            let seqs = default_sequences(n).unwrap();
            let y: Vec<f64> = (0..n)
                .map(|i| (((i as u64 + 1) * (seed * 2654435761 + 1)) % 1009) as f64 / 1009.0 - 0.5)
                .collect();
            let out = estimate(&y, &grid, &seqs).unwrap();
            let min = out.costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(out.selected_cost(), min);
            prop_assert!(out.varsigma_hat >= 0.0);
        }
    }
}
