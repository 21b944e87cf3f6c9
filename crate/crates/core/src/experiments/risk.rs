use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EstimatorSpec, ExperimentConfig};
use super::presets::{resolve_test_function, TestFunction};
use crate::basis::{BasisTable, DesignGrid, FourierCoeffs};
use crate::error::Result;
use crate::models::{DataGenerator, NoiseSpec, ScaleModel};
use crate::quadrature::pairwise_sum;
use crate::selection::{select_index, varsigma_hat};
use crate::theory::{cell_integrals, oracle_index, pinsker_constant, step_extension_loss_with};
use crate::weights::{pinsker_weights, weight_family, TuningSequences, WeightIndex, WeightVector};

/// One line of a risk table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub estimator: String,
    pub noise: String,
    pub n: usize,
    pub risk_empiric: f64,
    pub se_empiric: f64,
    pub risk_l2: f64,
    pub se_l2: f64,
    /// `n^{2k/(2k+1)} R̂ / γ_k(S)` with the empiric-norm risk.
    pub normalized_ratio: f64,
    pub gamma_k: f64,
    pub seed: u64,
}

/// Loss of one estimator on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateLoss {
    pub estimator: String,
    pub noise: String,
    pub n: usize,
    pub replicate: u64,
    pub loss_empiric: f64,
    pub loss_l2: f64,
}

/// Monte Carlo mean and standard error in both norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub empiric: f64,
    pub se_empiric: f64,
    pub l2: f64,
    pub se_l2: f64,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = pairwise_sum(values) / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = pairwise_sum(&values.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>()) / (r - 1.0);
    (mean, (var / r).sqrt())
}

impl RiskEstimate {
    pub fn from_losses(empiric: &[f64], l2: &[f64]) -> Self {
        let (e, se_e) = mean_se(empiric);
        let (c, se_c) = mean_se(l2);
        Self {
            empiric: e,
            se_empiric: se_e,
            l2: c,
            se_l2: se_c,
        }
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Adaptive,
    Fixed(WeightVector),
}

/// A concrete estimator: the adaptive procedure or a fixed weight vector.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: EstimatorSpec,
    pub label: String,
    pub index: Option<WeightIndex>,
    rule: Rule,
}

/// Per-estimator outcome of a Monte Carlo run.
#[derive(Debug, Clone)]
pub struct EstimatorRisk {
    pub spec: EstimatorSpec,
    pub label: String,
    pub index: Option<WeightIndex>,
    pub risk: RiskEstimate,
    /// `(empiric, continuous)` loss per replicate.
    pub losses: Vec<(f64, f64)>,
}

/// Everything about one sample size that does not depend on the noise draw.
pub struct RiskContext {
    pub test: TestFunction,
    pub n: usize,
    pub seqs: TuningSequences,
    pub family: Vec<(WeightIndex, WeightVector)>,
    /// `ς(S)` under the configured scale.
    pub varsigma: f64,
    pub gamma_k: f64,
    table: BasisTable,
    generator: DataGenerator,
    /// Discrete coefficients of `S` on the grid.
    theta_n: Vec<f64>,
    /// `tail[s] = Σ_{j ≥ s} θ_{j,n}²` (0-based).
    tail: Vec<f64>,
    cells: Vec<f64>,
    s_norm_sq: f64,
}

impl RiskContext {
    pub fn new(cfg: &ExperimentConfig, test: TestFunction, n: usize) -> Result<Self> {
        let grid = DesignGrid::new(n)?;
        let seqs = TuningSequences::new(n, &cfg.tuning)?;
        let family = weight_family(n, &seqs)?;
        let s = test.function.as_ref();
        let varsigma = cfg.scale.varsigma(s);
        let gamma_k = pinsker_constant(test.ball.k, test.ball.r, varsigma)?;
        let table = BasisTable::new(&grid);
        let generator = DataGenerator::new(s, &cfg.scale, &grid);
        let theta_n = table.transform(generator.signal());
        let mut tail = vec![0.0; n + 1];
        for j in (0..n).rev() {
            tail[j] = tail[j + 1] + theta_n[j] * theta_n[j];
        }
        Ok(Self {
            cells: cell_integrals(s, n),
            s_norm_sq: s.norm_sq(),
            test,
            n,
            seqs,
            family,
            varsigma,
            gamma_k,
            table,
            generator,
            theta_n,
            tail,
        })
    }

    /// `n^{2k/(2k+1)} / γ_k(S)`.
    pub fn normalizer(&self) -> f64 {
        let k = self.test.ball.k as f64;
        (self.n as f64).powf(2.0 * k / (2.0 * k + 1.0)) / self.gamma_k
    }

    pub fn instances(&self, specs: &[EstimatorSpec]) -> Result<Vec<Instance>> {
        let mut out = Vec::new();
        for &spec in specs {
            match spec {
                EstimatorSpec::Adaptive => out.push(Instance {
                    spec,
                    label: spec.label().into(),
                    index: None,
                    rule: Rule::Adaptive,
                }),
                EstimatorSpec::OracleWeight => {
                    let alpha = oracle_index(&self.test.ball, self.varsigma, &self.seqs)?;
                    out.push(Instance {
                        spec,
                        label: spec.label().into(),
                        index: Some(alpha),
                        rule: Rule::Fixed(pinsker_weights(&alpha, self.n, &self.seqs)?),
                    });
                }
                EstimatorSpec::PerFamily => {
                    out.extend(self.family.iter().map(|(a, l)| Instance {
                        spec,
                        label: format!("lambda_b{}_t{}", a.beta, a.t_index),
                        index: Some(*a),
                        rule: Rule::Fixed(l.clone()),
                    }))
                }
                EstimatorSpec::Projection => out.push(Instance {
                    spec,
                    label: spec.label().into(),
                    index: None,
                    rule: Rule::Fixed(WeightVector::ones(self.n)),
                }),
                EstimatorSpec::Zero => out.push(Instance {
                    spec,
                    label: spec.label().into(),
                    index: None,
                    rule: Rule::Fixed(WeightVector::zeros(self.n)),
                }),
            }
        }
        Ok(out)
    }

    /// `(‖Ŝ_λ − S‖²_n, ‖T(Ŝ_λ) − S‖²)`; the first by Parseval on the grid.
    fn losses(&self, lambda: &WeightVector, theta_hat: &[f64]) -> (f64, f64) {
        let supp = lambda.support();
        let c: Vec<f64> = lambda[..supp].iter().zip(theta_hat).map(|(l, t)| l * t).collect();
        let empiric = c.iter().zip(&self.theta_n).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + self.tail[supp];
        let values = self.table.synthesize(&c);
        (empiric, step_extension_loss_with(&values, &self.cells, self.s_norm_sq))
    }

    pub fn draw_coefficients(&self, noise: NoiseSpec, seed: u64, replicate: u64) -> Vec<f64> {
        self.table.transform(&self.generator.draw(noise, seed, replicate))
    }

    pub fn run(&self, instances: &[Instance], noise: NoiseSpec, reps: usize, seed: u64) -> Result<Vec<EstimatorRisk>> {
        let per_rep: Vec<Result<Vec<(f64, f64)>>> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let theta_hat = self.draw_coefficients(noise, seed, rep);
                let mut adaptive = None;
                instances
                    .iter()
                    .map(|inst| match &inst.rule {
                        Rule::Fixed(l) => Ok(self.losses(l, &theta_hat)),
                        Rule::Adaptive => {
                            if adaptive.is_none() {
                                let coeffs = FourierCoeffs::new(theta_hat.clone());
                                let vs = varsigma_hat(&coeffs, self.seqs.l_n)?;
                                let (best, _) = select_index(&self.family, &coeffs, vs, self.seqs.rho)?;
                                adaptive = Some(self.losses(&self.family[best].1, &theta_hat));
                            }
                            Ok(adaptive.unwrap())
                        }
                    })
                    .collect()
            })
            .collect();
        let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(instances
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                let losses: Vec<(f64, f64)> = per_rep.iter().map(|r| r[i]).collect();
                let e: Vec<f64> = losses.iter().map(|l| l.0).collect();
                let c: Vec<f64> = losses.iter().map(|l| l.1).collect();
                EstimatorRisk {
                    spec: inst.spec,
                    label: inst.label.clone(),
                    index: inst.index,
                    risk: RiskEstimate::from_losses(&e, &c),
                    losses,
                }
            })
            .collect())
    }

    pub fn row(&self, r: &EstimatorRisk, noise: &str, seed: u64) -> RiskRow {
        RiskRow {
            estimator: r.label.clone(),
            noise: noise.into(),
            n: self.n,
            risk_empiric: r.risk.empiric,
            se_empiric: r.risk.se_empiric,
            risk_l2: r.risk.l2,
            se_l2: r.risk.se_l2,
            normalized_ratio: r.risk.empiric * self.normalizer(),
            gamma_k: self.gamma_k,
            seed,
        }
    }
}

/// Risk of one estimator at one `n` under one noise law.
pub fn mc_risk(cfg: &ExperimentConfig, estimator: EstimatorSpec, noise: NoiseSpec, n: usize) -> Result<RiskEstimate> {
    cfg.validate()?;
    let test = resolve_test_function(&cfg.test_function, cfg.ball)?;
    let ctx = RiskContext::new(cfg, test, n)?;
    let inst = ctx.instances(&[estimator])?;
    cfg.install(|| ctx.run(&inst, noise, cfg.reps, cfg.seed))?
        .map(|r| r[0].risk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{Preset, TestFunctionSpec};
    use crate::models::EconometricScale;

    fn zero_config(reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            reps,
            test_function: TestFunctionSpec::Preset { name: Preset::S3 },
            scale: EconometricScale::homogeneous(1.0).unwrap(),
            ..Default::default()
        }
    }

    #[test]
    fn full_projection_of_pure_noise_has_unit_risk() {
        let cfg = zero_config(400);
        let r = mc_risk(&cfg, EstimatorSpec::Projection, NoiseSpec::Gaussian, 51).unwrap();
        assert!((r.empiric - 1.0).abs() < 4.0 * r.se_empiric, "{r:?}");
    }

    #[test]
    fn single_coefficient_risk_is_one_over_n() {
        let cfg = zero_config(2000);
        let test = resolve_test_function(&cfg.test_function, None).unwrap();
        let ctx = RiskContext::new(&cfg, test, 101).unwrap();
        let mut v = vec![0.0; 101];
        v[0] = 1.0;
        let inst = Instance {
            spec: EstimatorSpec::Projection,
            label: "first".into(),
            index: None,
            rule: Rule::Fixed(WeightVector::from_values(v)),
        };
        let r = ctx.run(&[inst], NoiseSpec::Gaussian, cfg.reps, 3).unwrap()[0].risk;
        assert!((r.empiric - 1.0 / 101.0).abs() < 4.0 * r.se_empiric, "{r:?}");
    }

    #[test]
    fn losses_match_direct_computation() {
        let cfg = ExperimentConfig::default();
        let test = resolve_test_function(&cfg.test_function, None).unwrap();
        let ctx = RiskContext::new(&cfg, test.clone(), 51).unwrap();
        let theta_hat = ctx.draw_coefficients(NoiseSpec::Gaussian, 1, 0);
        let (_, lambda) = &ctx.family[5];
        let (e, c) = ctx.losses(lambda, &theta_hat);
        let grid = DesignGrid::new(51).unwrap();
        let coeffs = FourierCoeffs::new(theta_hat.clone());
        let est = crate::basis::synthesize_on_grid(lambda, &coeffs, &grid).unwrap();
        let direct: f64 = est
            .values()
            .iter()
            .zip(grid.points())
            .map(|(v, &x)| (v - test.function.eval(x)).powi(2))
            .sum::<f64>()
            / 51.0;
        assert!((e - direct).abs() < 1e-10);
        let cont = crate::theory::step_extension_loss(est.values(), test.function.as_ref());
        assert!((c - cont).abs() < 1e-9);
    }

    #[test]
    fn adaptive_beats_projection_on_smooth_signal() {
        let cfg = ExperimentConfig { reps: 100, ..Default::default() };
        let test = resolve_test_function(&cfg.test_function, None).unwrap();
        let ctx = RiskContext::new(&cfg, test, 301).unwrap();
        let inst = ctx.instances(&[EstimatorSpec::Adaptive, EstimatorSpec::Projection]).unwrap();
        let r = ctx.run(&inst, NoiseSpec::Gaussian, cfg.reps, 9).unwrap();
        assert!(r[0].risk.empiric >= 0.0);
        assert!(r[0].risk.empiric < r[1].risk.empiric);
    }
}
