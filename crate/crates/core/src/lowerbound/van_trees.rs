use std::any::Any;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelAtom, KernelFamily, KernelFunction};
use crate::basis::DesignGrid;
use crate::error::{invalid, Error, Result};
use crate::function::{RegressionFunction, Zero};
use crate::models::{DataGenerator, NoiseSpec, ScaleModel};
use crate::quadrature::pairwise_sum;
use crate::rng::{substream, tag};

/// A regression function `S_z` linear in `z ∈ ℝˡ`, with the target
/// functionals `τ_i(z)` whose prior-averaged derivatives are `τ̄_i`.
pub trait ParametricFamily: Send + Sync {
    fn dim(&self) -> usize;
    fn function(&self, z: &[f64]) -> Result<Arc<dyn RegressionFunction>>;
    /// `∂S_z/∂z_i`, constant in `z`.
    fn derivative(&self, i: usize) -> Arc<dyn RegressionFunction>;
    fn tau_bar(&self, i: usize) -> f64;
}

/// `S_z ≡ z` with `τ(z) = z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantFamily;

#[derive(Debug, Clone, Copy)]
struct Constant(f64);

impl RegressionFunction for Constant {
    fn eval(&self, _x: f64) -> f64 {
        self.0
    }
    fn norm_sq(&self) -> f64 {
        self.0 * self.0
    }
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        self.0 * (b - a)
    }
    fn fourier_coefficient(&self, j: usize) -> f64 {
        if j == 1 {
            self.0
        } else {
            0.0
        }
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

impl ParametricFamily for ConstantFamily {
    fn dim(&self) -> usize {
        1
    }
    fn function(&self, z: &[f64]) -> Result<Arc<dyn RegressionFunction>> {
        match z {
            [c] => Ok(Arc::new(Constant(*c))),
            _ => Err(Error::DimensionMismatch { expected: 1, got: z.len() }),
        }
    }
    fn derivative(&self, _i: usize) -> Arc<dyn RegressionFunction> {
        Arc::new(Constant(1.0))
    }
    fn tau_bar(&self, _i: usize) -> f64 {
        1.0
    }
}

impl ParametricFamily for KernelFamily {
    fn dim(&self) -> usize {
        KernelFamily::dim(self)
    }
    fn function(&self, z: &[f64]) -> Result<Arc<dyn RegressionFunction>> {
        Ok(Arc::new(KernelFunction::new(self.clone(), z.to_vec())?))
    }
    fn derivative(&self, i: usize) -> Arc<dyn RegressionFunction> {
        let (m, j) = (i / self.freqs() + 1, i % self.freqs() + 1);
        Arc::new(KernelAtom::new(self.clone(), m, j))
    }
    /// `√h ē_j(χ_η)`.
    fn tau_bar(&self, i: usize) -> f64 {
        self.h().sqrt() * self.e_bar_chi(i % self.freqs() + 1)
    }
}

/// One summand `τ̄²/(F + B + t⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanTreesTerm {
    pub tau_bar: f64,
    pub fisher: f64,
    pub scale_info: f64,
    pub prior_scale: f64,
}

impl VanTreesTerm {
    pub fn value(&self) -> f64 {
        if self.prior_scale == 0.0 {
            return 0.0;
        }
        self.tau_bar.powi(2) / (self.fisher + self.scale_info + self.prior_scale.powi(-2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanTreesBound {
    pub bound: f64,
    pub terms: Vec<VanTreesTerm>,
    /// Whether `F` and `B` were computed exactly (scale free of `S`).
    pub exact: bool,
}

const CHUNK: usize = 16;

struct Moments {
    inv_g2: Vec<f64>,
    info: Vec<f64>,
}

fn draw_theta(t: &[f64], seed: u64, labels: &[u64], rep: u64) -> Vec<f64> {
    let mut rng = substream(seed, labels, rep);
    t.iter()
        .map(|ti| {
            let z: f64 = StandardNormal.sample(&mut rng);
            ti * z
        })
        .collect()
}

/// `Σ_i τ̄_i²/(F_i + B_i + t_i⁻²)` for the Gaussian prior `z_i ~ N(0, t_i²)`.
///
/// `F_i = Σ_l S'_i(x_l)² E g⁻²(x_l, S_z)` and
/// `B_i = ½ Σ_l E[L_{x_l,S_z}(S'_i)² / g⁴(x_l, S_z)]`; the expectations are
/// exact when the scale does not depend on `S`, Monte Carlo otherwise.
pub fn van_trees_bound(
    family: &dyn ParametricFamily,
    t: &[f64],
    scale: &dyn ScaleModel,
    n: usize,
    mc_reps: usize,
    seed: u64,
) -> Result<VanTreesBound> {
    let dim = family.dim();
    if t.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: t.len() });
    }
    if t.iter().any(|&v| !(v >= 0.0)) {
        return Err(invalid("prior scales must be nonnegative"));
    }
    let grid = DesignGrid::new(n)?;
    let xs = grid.points();
    let derivs: Vec<Arc<dyn RegressionFunction>> = (0..dim).map(|i| family.derivative(i)).collect();
    let d_vals: Vec<Vec<f64>> = derivs.iter().map(|d| xs.iter().map(|&x| d.eval(x)).collect()).collect();

    let exact = scale.constant_variance();
    let moments = if exact {
        Moments {
            inv_g2: scale.g2_profile(&Zero, xs).iter().map(|g| 1.0 / g).collect(),
            info: vec![0.0; dim],
        }
    } else {
        if mc_reps == 0 {
            return Err(invalid("need at least one Monte Carlo replicate"));
        }
        let probe = family.function(&vec![0.0; dim])?;
        if scale.frechet(xs[0], probe.as_ref(), derivs[0].as_ref()).is_none() {
            return Err(Error::UnsupportedModel(format!("{scale:?} has no Fréchet derivative")));
        }
        let labels = [tag::FISHER, n as u64];
        let chunks: Vec<Result<Moments>> = (0..mc_reps.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = Moments { inv_g2: vec![0.0; n], info: vec![0.0; dim] };
                for rep in c * CHUNK..((c + 1) * CHUNK).min(mc_reps) {
                    let theta = draw_theta(t, seed, &labels, rep as u64);
                    let s = family.function(&theta)?;
                    let g2 = scale.g2_profile(s.as_ref(), xs);
                    for (a, g) in acc.inv_g2.iter_mut().zip(&g2) {
                        *a += 1.0 / g;
                    }
                    for (i, d) in derivs.iter().enumerate() {
                        let mut b = 0.0;
                        for (l, &x) in xs.iter().enumerate() {
                            let lv = scale
                                .frechet(x, s.as_ref(), d.as_ref())
                                .ok_or_else(|| Error::UnsupportedModel("Fréchet derivative vanished".into()))?;
                            b += lv * lv / (g2[l] * g2[l]);
                        }
                        acc.info[i] += 0.5 * b;
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = Moments { inv_g2: vec![0.0; n], info: vec![0.0; dim] };
        for chunk in chunks {
            let chunk = chunk?;
            total.inv_g2.iter_mut().zip(&chunk.inv_g2).for_each(|(a, b)| *a += b);
            total.info.iter_mut().zip(&chunk.info).for_each(|(a, b)| *a += b);
        }
        let r = mc_reps as f64;
        total.inv_g2.iter_mut().for_each(|v| *v /= r);
        total.info.iter_mut().for_each(|v| *v /= r);
        total
    };

    let terms: Vec<VanTreesTerm> = (0..dim)
        .map(|i| VanTreesTerm {
            tau_bar: family.tau_bar(i),
            fisher: pairwise_sum(
                &d_vals[i].iter().zip(&moments.inv_g2).map(|(d, w)| d * d * w).collect::<Vec<_>>(),
            ),
            scale_info: moments.info[i],
            prior_scale: t[i],
        })
        .collect();
    let bound = pairwise_sum(&terms.iter().map(VanTreesTerm::value).collect::<Vec<_>>());
    Ok(VanTreesBound { bound, terms, exact })
}

/// Monte Carlo Bayes risk `E‖Ŝ − S_ϑ‖²` under Gaussian noise, returned as
/// `(mean, standard error)`.
///
/// The estimator maps observations on the design grid to trigonometric
/// coefficients `(c_1, c_2, …)` of `Ŝ`; the loss is the exact `L₂[0,1]` norm.
pub fn bayes_risk_mc<E>(
    estimator: E,
    family: &dyn ParametricFamily,
    t: &[f64],
    scale: &dyn ScaleModel,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    E: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let dim = family.dim();
    if t.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: t.len() });
    }
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let grid = DesignGrid::new(n)?;
    let derivs: Vec<Arc<dyn RegressionFunction>> = (0..dim).map(|i| family.derivative(i)).collect();
    let w: Vec<Vec<f64>> = derivs
        .par_iter()
        .map(|d| (1..=n).map(|j| d.fourier_coefficient(j)).collect())
        .collect();
    let labels = [tag::PRIOR, n as u64];
    let losses: Vec<Result<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let theta = draw_theta(t, seed, &labels, rep as u64);
            let s = family.function(&theta)?;
            let y = DataGenerator::new(s.as_ref(), scale, &grid).draw(NoiseSpec::Gaussian, seed, rep as u64);
            let c = estimator(&y)?;
            if c.len() > n {
                return Err(invalid(format!("estimator returned {} coefficients for n = {n}", c.len())));
            }
            let cross: f64 = theta
                .iter()
                .zip(&w)
                .filter(|(th, _)| **th != 0.0)
                .map(|(th, row)| th * c.iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            let c_norm: f64 = c.iter().map(|v| v * v).sum();
            Ok((c_norm - 2.0 * cross + s.norm_sq()).max(0.0))
        })
        .collect();
    let losses = losses.into_iter().collect::<Result<Vec<_>>>()?;
    let mean = pairwise_sum(&losses) / reps as f64;
    let var = pairwise_sum(&losses.iter().map(|l| (l - mean).powi(2)).collect::<Vec<_>>()) / (reps - 1) as f64;
    Ok((mean, (var / reps as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowerbound::{least_favorable_prior, PriorConfig};
    use crate::models::EconometricScale;

    fn unit() -> EconometricScale {
        EconometricScale::homogeneous(1.0).unwrap()
    }

    #[test]
    fn degenerate_case_is_classical() {
        for (n, t) in [(51usize, 0.3), (101, 1.7), (1001, 0.05)] {
            let b = van_trees_bound(&ConstantFamily, &[t], &unit(), n, 0, 0).unwrap();
            let classical = t * t / (n as f64 * t * t + 1.0);
            assert!((b.bound - classical).abs() < 1e-12);
            assert!(b.exact);
        }
    }

    #[test]
    fn constant_scale_fisher_is_design_energy() {
        let sigma = 1.5;
        let scale = EconometricScale::homogeneous(sigma).unwrap();
        let fam = KernelFamily::new(0.1, 3, 0.05).unwrap();
        let t = vec![0.2; fam.dim()];
        let b = van_trees_bound(&fam, &t, &scale, 101, 0, 0).unwrap();
        let grid = DesignGrid::new(101).unwrap();
        for (i, term) in b.terms.iter().enumerate() {
            let (m, j) = (i / 3 + 1, i % 3 + 1);
            let energy: f64 = grid.points().iter().map(|&x| fam.atom(m, j, x).powi(2)).sum();
            assert!((term.fisher - energy / (sigma * sigma)).abs() < 1e-12);
            assert_eq!(term.scale_info, 0.0);
        }
    }

    #[test]
    fn terms_are_monotone() {
        let base = VanTreesTerm { tau_bar: 0.4, fisher: 10.0, scale_info: 1.0, prior_scale: 0.5 };
        let more_f = VanTreesTerm { fisher: 12.0, ..base };
        let more_b = VanTreesTerm { scale_info: 2.0, ..base };
        let less_t = VanTreesTerm { prior_scale: 0.3, ..base };
        assert!(more_f.value() < base.value());
        assert!(more_b.value() < base.value());
        assert!(less_t.value() < base.value());
        assert_eq!(VanTreesTerm { prior_scale: 0.0, ..base }.value(), 0.0);
    }

    #[test]
    fn heteroscedastic_needs_derivative_and_adds_information() {
        let scale = EconometricScale::new(1.0, 0.5, 0.5, 0.5).unwrap();
        let fam = KernelFamily::new(0.1, 2, 0.05).unwrap();
        let t = vec![0.3; fam.dim()];
        let b = van_trees_bound(&fam, &t, &scale, 51, 64, 9).unwrap();
        assert!(!b.exact);
        assert!(b.terms.iter().all(|term| term.scale_info > 0.0));
        let again = van_trees_bound(&fam, &t, &scale, 51, 64, 9).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn zero_estimator_bayes_risk_matches_prior_energy() {
        let p = least_favorable_prior(1, 1.0, 101, &PriorConfig::default(), &unit()).unwrap();
        let fam = &p.family;
        let analytic: f64 = p
            .t
            .iter()
            .enumerate()
            .map(|(i, t)| t * t * fam.h() * fam.e_bar_chi2(i % fam.freqs() + 1))
            .sum();
        let (mean, se) = bayes_risk_mc(|_| Ok(Vec::new()), fam, &p.t, &unit(), 101, 2000, 5).unwrap();
        assert!((mean - analytic).abs() < 4.0 * se, "{mean} ± {se} vs {analytic}");
        let vt = van_trees_bound(fam, &p.t, &unit(), 101, 0, 0).unwrap();
        assert!(mean + 5.0 * se > vt.bound);
    }
}
