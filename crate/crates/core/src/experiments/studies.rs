use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{EstimatorSpec, ExperimentConfig};
use super::presets::resolve_test_function;
use super::risk::{ReplicateLoss, RiskContext, RiskRow};
use crate::basis::{BasisTable, DesignGrid, FourierCoeffs};
use crate::error::{Error, Result};
use crate::function::Zero;
use crate::lowerbound::{
    bayes_risk_mc, check_conditions_a, least_favorable_prior, lower_bound_target, van_trees_bound, ConditionsReport,
};
use crate::models::{NoiseSpec, ScaleModel};
use crate::selection::{select, select_index, varsigma_hat};
use crate::theory::{oracle_index, pinsker_constant, pinsker_constant_as_printed};
use crate::weights::{pinsker_weights, weight_family, TuningSequences, WeightVector};

/// Label of the rows taking the maximum over the noise menu; a lower
/// envelope of the supremum over all admissible noise laws.
pub const MENU_MAX: &str = "max_menu";

/// Risk table for every configured estimator, `n` and noise law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskStudy {
    pub test_function: String,
    pub rows: Vec<RiskRow>,
    #[serde(skip)]
    pub replicates: Vec<ReplicateLoss>,
}

fn menu_max(rows: &[RiskRow]) -> Vec<RiskRow> {
    let mut out: Vec<RiskRow> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|r| r.estimator == row.estimator && r.n == row.n) {
            None => out.push(RiskRow { noise: MENU_MAX.into(), ..row.clone() }),
            Some(best) => {
                if row.risk_empiric > best.risk_empiric {
                    best.risk_empiric = row.risk_empiric;
                    best.se_empiric = row.se_empiric;
                    best.normalized_ratio = row.normalized_ratio;
                }
                if row.risk_l2 > best.risk_l2 {
                    best.risk_l2 = row.risk_l2;
                    best.se_l2 = row.se_l2;
                }
            }
        }
    }
    out
}

fn run_grid(cfg: &ExperimentConfig, estimators: &[EstimatorSpec], noises: &[NoiseSpec]) -> Result<(String, Vec<RiskRow>, Vec<ReplicateLoss>)> {
    let test = resolve_test_function(&cfg.test_function, cfg.ball)?;
    let name = test.name.clone();
    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    let keep = cfg.replicates_path.is_some();
    for &n in &cfg.n_grid {
        let ctx = RiskContext::new(cfg, test.clone(), n)?;
        let inst = ctx.instances(estimators)?;
        let mut block = Vec::new();
        for noise in noises {
            let label = noise.label();
            for r in cfg.install(|| ctx.run(&inst, *noise, cfg.reps, cfg.seed))?? {
                block.push(ctx.row(&r, &label, cfg.seed));
                if keep {
                    replicates.extend(r.losses.iter().enumerate().map(|(i, l)| ReplicateLoss {
                        estimator: r.label.clone(),
                        noise: label.clone(),
                        n,
                        replicate: i as u64,
                        loss_empiric: l.0,
                        loss_l2: l.1,
                    }));
                }
            }
        }
        if noises.len() > 1 {
            let maxima = menu_max(&block);
            block.extend(maxima);
        }
        rows.extend(block);
    }
    Ok((name, rows, replicates))
}

pub fn risk_study(cfg: &ExperimentConfig) -> Result<RiskStudy> {
    cfg.validate()?;
    let (test_function, rows, replicates) = run_grid(cfg, &cfg.estimators, &cfg.noise_menu)?;
    Ok(RiskStudy { test_function, rows, replicates })
}

/// `(1 + 3ρ − 2ρ²)/(1 − 3ρ)`.
pub fn oracle_coefficient(rho: f64) -> f64 {
    (1.0 + 3.0 * rho - 2.0 * rho * rho) / (1.0 - 3.0 * rho)
}

/// Slope of `ln y` against `ln x` by least squares.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub noise: String,
    pub n: usize,
    pub rho: f64,
    pub coefficient: f64,
    pub risk_adaptive: f64,
    pub se_adaptive: f64,
    pub risk_min_family: f64,
    pub se_min_family: f64,
    pub min_family_member: String,
    /// `R̂(Ŝ*)/min_λ R̂(Ŝ_λ)` and its delta-method standard error.
    pub ratio: f64,
    pub ratio_se: f64,
    /// `R̂(Ŝ*) − coefficient · min_λ R̂(Ŝ_λ)`.
    pub slack: f64,
    pub n_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTrend {
    pub noise: String,
    /// Log-log slope of `n · max(slack, 0)` over the points where it is positive.
    pub slope: Option<f64>,
    pub positive_points: usize,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub test_function: String,
    pub summary: Vec<OracleRow>,
    pub trends: Vec<OracleTrend>,
    pub rows: Vec<RiskRow>,
}

/// Adaptive risk against the best family member at each `n`.
///
/// A trend passes when fewer than two grid points have positive slack or
/// the log-log slope of `n · slack` is below `1/2`.
pub fn oracle_study(cfg: &ExperimentConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let specs = [EstimatorSpec::Adaptive, EstimatorSpec::PerFamily];
    let (test_function, rows, _) = run_grid(cfg, &specs, &cfg.noise_menu)?;
    let mut summary = Vec::new();
    let noises: Vec<String> = cfg.noise_menu.iter().map(|n| n.label()).collect();
    for noise in &noises {
        for &n in &cfg.n_grid {
            let here: Vec<&RiskRow> = rows.iter().filter(|r| &r.noise == noise && r.n == n).collect();
            let adaptive = here.iter().find(|r| r.estimator == "adaptive").ok_or(Error::EmptyFamily)?;
            let best = here
                .iter()
                .filter(|r| r.estimator != "adaptive")
                .min_by(|a, b| a.risk_empiric.total_cmp(&b.risk_empiric))
                .ok_or(Error::EmptyFamily)?;
            let rho = TuningSequences::new(n, &cfg.tuning)?.rho;
            let coefficient = oracle_coefficient(rho);
            let ratio = adaptive.risk_empiric / best.risk_empiric;
            let ratio_se = ratio
                * ((adaptive.se_empiric / adaptive.risk_empiric).powi(2) + (best.se_empiric / best.risk_empiric).powi(2))
                    .sqrt();
            let slack = adaptive.risk_empiric - coefficient * best.risk_empiric;
            summary.push(OracleRow {
                noise: noise.clone(),
                n,
                rho,
                coefficient,
                risk_adaptive: adaptive.risk_empiric,
                se_adaptive: adaptive.se_empiric,
                risk_min_family: best.risk_empiric,
                se_min_family: best.se_empiric,
                min_family_member: best.estimator.clone(),
                ratio,
                ratio_se,
                slack,
                n_slack: n as f64 * slack,
            });
        }
    }
    let trends = noises
        .iter()
        .map(|noise| {
            let pts: Vec<(f64, f64)> = summary
                .iter()
                .filter(|r| &r.noise == noise && r.n_slack > 0.0)
                .map(|r| (r.n as f64, r.n_slack))
                .collect();
            let slope = log_log_slope(&pts);
            OracleTrend {
                noise: noise.clone(),
                slope,
                positive_points: pts.len(),
                passes: slope.map_or(true, |s| s < 0.5),
            }
        })
        .collect();
    Ok(OracleReport { test_function, summary, trends, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTrend {
    pub estimator: String,
    pub noise: String,
    pub n: Vec<usize>,
    pub ratio: Vec<f64>,
    pub ratio_se: Vec<f64>,
    /// Each step up the grid raises the ratio by at most two standard errors.
    pub nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub test_function: String,
    pub k: u32,
    pub r: f64,
    pub varsigma: f64,
    pub gamma_k: f64,
    /// Only filled on request; not a valid normalization.
    pub gamma_k_as_printed: Option<f64>,
    pub membership_margin: f64,
    pub trends: Vec<EfficiencyTrend>,
    /// `adaptive ratio ≥ oracle ratio − 3 s.e.` at every `(n, noise)`.
    pub adaptive_not_below_oracle: bool,
    pub rows: Vec<RiskRow>,
}

/// Normalized risks of the adaptive and oracle-weight estimators.
pub fn efficiency_study(cfg: &ExperimentConfig, as_printed: bool) -> Result<EfficiencyReport> {
    cfg.validate()?;
    let test = resolve_test_function(&cfg.test_function, cfg.ball)?;
    test.require_membership()?;
    let mut specs = cfg.estimators.clone();
    for s in [EstimatorSpec::Adaptive, EstimatorSpec::OracleWeight] {
        if !specs.contains(&s) {
            specs.push(s);
        }
    }
    let (test_function, rows, _) = run_grid(cfg, &specs, &cfg.noise_menu)?;
    let varsigma = cfg.scale.varsigma(test.function.as_ref());
    let (k, r) = (test.ball.k, test.ball.r);
    let mut noises: Vec<String> = cfg.noise_menu.iter().map(|n| n.label()).collect();
    if noises.len() > 1 {
        noises.push(MENU_MAX.into());
    }
    let mut trends = Vec::new();
    let mut adaptive_ok = true;
    for noise in &noises {
        let pick = |est: &str| -> Vec<&RiskRow> {
            cfg.n_grid
                .iter()
                .filter_map(|&n| rows.iter().find(|r| r.estimator == est && &r.noise == noise && r.n == n))
                .collect()
        };
        for est in ["oracle_weight", "adaptive"] {
            let sel = pick(est);
            let ratio: Vec<f64> = sel.iter().map(|r| r.normalized_ratio).collect();
            let ratio_se: Vec<f64> = sel.iter().map(|r| r.se_empiric * r.normalized_ratio / r.risk_empiric).collect();
            let nonincreasing = (1..ratio.len())
                .all(|i| ratio[i] <= ratio[i - 1] + 2.0 * (ratio_se[i].powi(2) + ratio_se[i - 1].powi(2)).sqrt());
            trends.push(EfficiencyTrend {
                estimator: est.into(),
                noise: noise.clone(),
                n: sel.iter().map(|r| r.n).collect(),
                ratio,
                ratio_se,
                nonincreasing,
            });
        }
        let (a, o) = (pick("adaptive"), pick("oracle_weight"));
        adaptive_ok &= a.iter().zip(&o).all(|(a, o)| {
            let se = o.se_empiric * o.normalized_ratio / o.risk_empiric;
            a.normalized_ratio >= o.normalized_ratio - 3.0 * se
        });
    }
    Ok(EfficiencyReport {
        test_function,
        k,
        r,
        varsigma,
        gamma_k: pinsker_constant(k, r, varsigma)?,
        gamma_k_as_printed: if as_printed {
            Some(pinsker_constant_as_printed(k, r, varsigma)?)
        } else {
            None
        },
        membership_margin: test.membership.margin,
        trends,
        adaptive_not_below_oracle: adaptive_ok,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub n: usize,
    pub blocks: usize,
    pub freqs: usize,
    pub h: f64,
    pub bound: f64,
    /// `n^{2k/(2k+1)} · bound / γ_κ`.
    pub corridor_ratio: f64,
    pub target: f64,
    pub estimator: String,
    pub bayes_risk: f64,
    pub bayes_se: f64,
    /// Bayes risk is not significantly below the bound (5 s.e., one-sided).
    pub above_bound: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub k: u32,
    pub r: f64,
    pub varsigma0: f64,
    pub eps: f64,
    pub target: f64,
    pub conditions: Vec<ConditionsReport>,
    pub dropped_frequencies: Vec<(usize, Vec<usize>)>,
    pub rows: Vec<LowerBoundRow>,
}

type Estimator = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

fn coefficient_estimator(
    spec: EstimatorSpec,
    n: usize,
    cfg: &ExperimentConfig,
    ball: &crate::theory::SobolevBall,
    varsigma0: f64,
) -> Result<Option<Estimator>> {
    let grid = DesignGrid::new(n)?;
    let table = Arc::new(BasisTable::new(&grid));
    let seqs = TuningSequences::new(n, &cfg.tuning)?;
    let apply = |lambda: WeightVector| -> Estimator {
        let table = table.clone();
        Arc::new(move |y: &[f64]| {
            let t = table.transform(y);
            Ok(lambda[..lambda.support()].iter().zip(&t).map(|(l, t)| l * t).collect())
        })
    };
    Ok(match spec {
        EstimatorSpec::Adaptive => {
            let family = Arc::new(weight_family(n, &seqs)?);
            let table = table.clone();
            Some(Arc::new(move |y: &[f64]| {
                let coeffs = FourierCoeffs::new(table.transform(y));
                let vs = varsigma_hat(&coeffs, seqs.l_n)?;
                let (best, _) = select_index(&family, &coeffs, vs, seqs.rho)?;
                let l = &family[best].1;
                Ok(l[..l.support()].iter().zip(coeffs.as_slice()).map(|(l, t)| l * t).collect())
            }))
        }
        EstimatorSpec::OracleWeight => {
            let alpha = oracle_index(ball, varsigma0, &seqs)?;
            Some(apply(pinsker_weights(&alpha, n, &seqs)?))
        }
        EstimatorSpec::Projection => Some(apply(WeightVector::ones(n))),
        EstimatorSpec::Zero => Some(Arc::new(|_: &[f64]| Ok(Vec::new()))),
        EstimatorSpec::PerFamily => None,
    })
}

/// van Trees bound for the least favorable prior and Monte Carlo Bayes
/// risks of the configured estimators, under Gaussian noise.
pub fn lower_bound_study(cfg: &ExperimentConfig) -> Result<LowerBoundReport> {
    cfg.validate()?;
    let test = resolve_test_function(&cfg.test_function, cfg.ball)?;
    let ball = test.ball;
    let varsigma0 = cfg.scale.varsigma(&Zero);
    let target = lower_bound_target(ball.k, ball.r, varsigma0, cfg.prior.eps)?;
    let kf = ball.k as f64;
    let mut conditions = Vec::new();
    let mut dropped = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let prior = least_favorable_prior(ball.k, ball.r, n, &cfg.prior, &cfg.scale)?;
        conditions.push(check_conditions_a(&prior));
        if !prior.dropped.is_empty() {
            dropped.push((n, prior.dropped.clone()));
        }
        let vt = cfg.install(|| van_trees_bound(&prior.family, &prior.t, &cfg.scale, n, cfg.fisher_reps, cfg.seed))??;
        let corridor_ratio = (n as f64).powf(2.0 * kf / (2.0 * kf + 1.0)) * vt.bound / target;
        for &spec in &cfg.estimators {
            let Some(est) = coefficient_estimator(spec, n, cfg, &ball, varsigma0)? else {
                continue;
            };
            let (mean, se) = cfg.install(|| {
                bayes_risk_mc(|y| est(y), &prior.family, &prior.t, &cfg.scale, n, cfg.reps.max(2), cfg.seed)
            })??;
            rows.push(LowerBoundRow {
                n,
                blocks: prior.family.blocks(),
                freqs: prior.family.freqs(),
                h: prior.family.h(),
                bound: vt.bound,
                corridor_ratio,
                target,
                estimator: spec.label().into(),
                bayes_risk: mean,
                bayes_se: se,
                above_bound: mean >= vt.bound - 5.0 * se,
                seed: cfg.seed,
            });
        }
    }
    Ok(LowerBoundReport {
        k: ball.k,
        r: ball.r,
        varsigma0,
        eps: cfg.prior.eps,
        target,
        conditions,
        dropped_frequencies: dropped,
        rows,
    })
}

/// Selection on one dataset.
pub fn estimate_dataset(y: &[f64], cfg: &ExperimentConfig) -> Result<crate::selection::EstimatorOutput> {
    let n = y.len();
    let grid = DesignGrid::new(n)?;
    let seqs = TuningSequences::new(n, &cfg.tuning)?;
    let coeffs = crate::basis::discrete_fourier(y, &grid)?;
    let family = weight_family(n, &seqs)?;
    select(&family, &coeffs, &seqs)
}
