use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::kernel::KernelFamily;
use crate::error::{invalid, Error, Result};
use crate::function::Zero;
use crate::models::ScaleModel;
use crate::rng::{substream, tag};
use crate::theory::pinsker_constant;

/// How many frequencies `N_n` each block carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencySchedule {
    /// `⌊√ln n⌋ ∨ 1`.
    SqrtLog,
    /// `⌊ln⁴ n⌋ + 1`.
    LogPow4,
    Fixed { n: usize },
}

impl FrequencySchedule {
    pub fn frequencies(&self, n: usize) -> usize {
        let ln = (n as f64).ln();
        match *self {
            Self::SqrtLog => (ln.sqrt().floor() as usize).max(1),
            Self::LogPow4 => ln.powi(4).floor() as usize + 1,
            Self::Fixed { n } => n.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    /// Slack `ε ∈ (0, 1)` in the ball constraint.
    pub eps: f64,
    /// Mollifier bandwidth `η`.
    pub eta: f64,
    pub schedule: FrequencySchedule,
    /// Exponent slack `ε₀` in the fourth-moment condition.
    pub eps0: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            eps: 0.2,
            eta: 0.05,
            schedule: FrequencySchedule::SqrtLog,
            eps0: 0.5,
        }
    }
}

/// The Gaussian prior `ϑ_{m,j} = t_{m,j} ζ_{m,j}` on the kernel family.
#[derive(Debug, Clone)]
pub struct LeastFavorablePrior {
    pub family: KernelFamily,
    pub k: u32,
    pub r: f64,
    pub n: usize,
    pub eps: f64,
    pub eps0: f64,
    /// Row-major `M × N`.
    pub t: Vec<f64>,
    pub r_star: f64,
    pub h_star: f64,
    pub a_star: f64,
    pub y_star: Vec<f64>,
    /// Truncation level `d_n = √N`.
    pub d_n: f64,
    /// `ĝ₀ = 2h Σ_m g₀²(x̃_m)`.
    pub g0_hat: f64,
    /// `ς(S₀) = ∫ g²(x, 0) dx`.
    pub varsigma0: f64,
    /// `N` before any reduction.
    pub requested_freqs: usize,
    /// Frequencies removed because `y*_j(R*) < 0`.
    pub dropped: Vec<usize>,
}

impl LeastFavorablePrior {
    /// `t*_n = max_m Σ_j t_{m,j}`.
    pub fn t_star(&self) -> f64 {
        let n = self.family.freqs();
        self.t
            .chunks(n)
            .map(|row| row.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    fn weighted_sum(&self, power: i32, exponent: i32) -> f64 {
        let n = self.family.freqs();
        self.t
            .iter()
            .enumerate()
            .map(|(i, t)| t.powi(power) * ((i % n + 1) as f64).powi(exponent))
            .sum()
    }
}

fn c_star(k: u32, r: f64, eps: f64, varsigma0: f64) -> f64 {
    let kf = k as f64;
    2f64.powf(2.0 * kf + 1.0) * (1.0 - eps) * r / (PI.powf(2.0 * kf) * varsigma0)
}

/// `h_* = (υ*_ε)^{1/(2k+1)}` with `υ*_ε = (1+ε)k / (c*_ε (k+1)(2k+1))`.
pub fn h_star(k: u32, r: f64, eps: f64, varsigma0: f64) -> f64 {
    let kf = k as f64;
    let upsilon = (1.0 + eps) * kf / (c_star(k, r, eps, varsigma0) * (kf + 1.0) * (2.0 * kf + 1.0));
    upsilon.powf(1.0 / (2.0 * kf + 1.0))
}

/// `(1+ε′)((1−ε)/(1+ε))^{1/(2k+1)} γ_k(S₀)` with `ε′ = ε/(2k+εk+1)`.
pub fn lower_bound_target(k: u32, r: f64, varsigma0: f64, eps: f64) -> Result<f64> {
    let kf = k as f64;
    let eps_prime = eps / (2.0 * kf + eps * kf + 1.0);
    let p = 1.0 / (2.0 * kf + 1.0);
    Ok((1.0 + eps_prime) * ((1.0 - eps) / (1.0 + eps)).powf(p) * pinsker_constant(k, r, varsigma0)?)
}

fn y_star(a: f64, k: u32, freqs: usize) -> Vec<f64> {
    (1..=freqs).map(|j| a * (j as f64).powi(-(k as i32)) - 1.0).collect()
}

fn a_star(r: f64, k: u32, freqs: usize) -> f64 {
    let (s1, s2) = (1..=freqs).fold((0.0, 0.0), |(a, b), i| {
        let p = (i as f64).powi(k as i32);
        (a + p, b + p * p)
    });
    (r + s2) / s1
}

/// Builds `h_n = h_* n^{−1/(2k+1)} N_n`, `R*_n`, `y*_j(R*_n)` and
/// `t_{m,j} = g₀(x̃_m) √y*_j / √(n h)`.
///
/// `N_n` is lowered until at least one block fits; frequencies with
/// negative `y*_j` are then dropped from the top.
pub fn least_favorable_prior(
    k: u32,
    r: f64,
    n: usize,
    cfg: &PriorConfig,
    scale: &dyn ScaleModel,
) -> Result<LeastFavorablePrior> {
    if k < 1 || !(r > 0.0) {
        return Err(invalid("need k >= 1 and r > 0"));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {}", cfg.eps)));
    }
    if n < 3 {
        return Err(invalid("need n >= 3"));
    }
    let kf = k as f64;
    let varsigma0 = scale.varsigma(&Zero);
    let hs = h_star(k, r, cfg.eps, varsigma0);
    let requested = cfg.schedule.frequencies(n);
    let base = hs * (n as f64).powf(-1.0 / (2.0 * kf + 1.0));
    let mut freqs = requested;
    while freqs > 1 && (1.0 / (2.0 * base * freqs as f64)).floor() < 2.0 {
        freqs -= 1;
    }
    let h = base * freqs as f64;
    let probe = KernelFamily::new(h, 1, cfg.eta)?;
    let g0sq: Vec<f64> = probe.centers().iter().map(|&x| scale.g2(x, &Zero)).collect();
    let g0_hat = 2.0 * h * g0sq.iter().sum::<f64>();
    let r_star = 2f64.powf(2.0 * kf + 1.0) * (1.0 - cfg.eps) * r * n as f64 * h.powf(2.0 * kf + 1.0)
        / (PI.powf(2.0 * kf) * g0_hat);

    let mut dropped = Vec::new();
    let (a, ys) = loop {
        let a = a_star(r_star, k, freqs);
        let ys = y_star(a, k, freqs);
        if ys[freqs - 1] >= 0.0 {
            break (a, ys);
        }
        if freqs == 1 {
            return Err(Error::InfeasiblePrior(format!("y*_1 = {} < 0 at n = {n}", ys[0])));
        }
        dropped.push(freqs);
        freqs -= 1;
    };
    let family = KernelFamily::new(h, freqs, cfg.eta)?;
    let norm = (n as f64 * h).sqrt();
    let t = g0sq
        .iter()
        .flat_map(|g2| ys.iter().map(move |y| g2.sqrt() * y.sqrt() / norm))
        .collect();
    Ok(LeastFavorablePrior {
        family,
        k,
        r,
        n,
        eps: cfg.eps,
        eps0: cfg.eps0,
        t,
        r_star,
        h_star: hs,
        a_star: a,
        y_star: ys,
        d_n: (freqs as f64).sqrt(),
        g0_hat,
        varsigma0,
        requested_freqs: requested,
        dropped,
    })
}

/// One prior draw and whether it lies in `Ξ_n = {max ζ² ≤ d_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorDraw {
    pub theta: Vec<f64>,
    pub xi_event: bool,
}

pub fn sample_prior(prior: &LeastFavorablePrior, seed: u64, replicate: u64) -> PriorDraw {
    let mut rng = substream(seed, &[tag::PRIOR, prior.n as u64], replicate);
    let mut xi_event = true;
    let theta = prior
        .t
        .iter()
        .map(|t| {
            let z: f64 = StandardNormal.sample(&mut rng);
            xi_event &= z * z <= prior.d_n;
            t * z
        })
        .collect();
    PriorDraw { theta, xi_event }
}

/// Finite-`n` values of the quantities in conditions A1 to A4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub n: usize,
    pub h: f64,
    pub blocks: usize,
    pub freqs: usize,
    /// `d_n h^{−(2k−1)} ΣΣ t² j^{2(k−1)}`.
    pub a2_sum: f64,
    /// `√d_n t*_n`.
    pub a2_sup: f64,
    /// `exp(−d_n/2)`.
    pub a2_tail: f64,
    /// `h^{−(2k−1)} ΣΣ t² j^{2k}`.
    pub a3: f64,
    /// `(1−ε) r (2/π)^{2k}`.
    pub a3_target: f64,
    /// `h^{−(4k−2+ε₀)} ΣΣ t⁴ j^{4k}`.
    pub a4: f64,
    pub min_y_star: f64,
}

pub fn check_conditions_a(prior: &LeastFavorablePrior) -> ConditionsReport {
    let k = prior.k as i32;
    let kf = prior.k as f64;
    let h = prior.family.h();
    ConditionsReport {
        n: prior.n,
        h,
        blocks: prior.family.blocks(),
        freqs: prior.family.freqs(),
        a2_sum: prior.d_n * prior.weighted_sum(2, 2 * (k - 1)) / h.powi(2 * k - 1),
        a2_sup: prior.d_n.sqrt() * prior.t_star(),
        a2_tail: (-prior.d_n / 2.0).exp(),
        a3: prior.weighted_sum(2, 2 * k) / h.powi(2 * k - 1),
        a3_target: (1.0 - prior.eps) * prior.r * (2.0 / PI).powf(2.0 * kf),
        a4: prior.weighted_sum(4, 4 * k) / h.powf(4.0 * kf - 2.0 + prior.eps0),
        min_y_star: prior.y_star.iter().cloned().fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::RegressionFunction;
    use crate::lowerbound::KernelFunction;
    use crate::models::EconometricScale;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn unit() -> EconometricScale {
        EconometricScale::homogeneous(1.0).unwrap()
    }

    #[test]
    fn a_star_boundary_gives_zero_top_weight() {
        for k in 1..=3u32 {
            for big_n in 1..=6usize {
                let s1: f64 = (1..=big_n).map(|i| (i as f64).powi(k as i32)).sum();
                let s2: f64 = (1..=big_n).map(|i| (i as f64).powi(2 * k as i32)).sum();
                let r = (big_n as f64).powi(k as i32) * s1 - s2;
                let y = y_star(a_star(r, k, big_n), k, big_n);
                assert!(y[big_n - 1].abs() < 1e-9 * s2, "k {k} N {big_n}: {y:?}");
                assert!(y.windows(2).all(|w| w[1] <= w[0]));
                let weighted: f64 = y.iter().enumerate().map(|(j, y)| y * ((j + 1) as f64).powi(2 * k as i32)).sum();
                assert!((weighted - r).abs() < 1e-9 * r.abs().max(1.0));
            }
        }
    }

    #[test]
    fn h_star_reference_value() {
        let hs = h_star(1, 1.0, 0.2, 1.0);
        assert!((hs - 0.6757).abs() < 1e-4);
        let target = lower_bound_target(1, 1.0, 1.0, 0.2).unwrap();
        assert!((target - 0.3931).abs() < 1e-4);
    }

    #[test]
    fn schedules() {
        assert_eq!(FrequencySchedule::SqrtLog.frequencies(100_000), 3);
        assert_eq!(FrequencySchedule::SqrtLog.frequencies(51), 1);
        assert_eq!(FrequencySchedule::LogPow4.frequencies(1000), 2277);
        assert_eq!(FrequencySchedule::Fixed { n: 4 }.frequencies(10), 4);
    }

    #[test]
    fn prior_construction_at_large_n() {
        let p = least_favorable_prior(1, 1.0, 100_000, &PriorConfig::default(), &unit()).unwrap();
        assert_eq!(p.family.freqs(), 3);
        assert_eq!(p.family.blocks(), 10);
        assert!(p.dropped.is_empty());
        assert!(p.y_star.iter().all(|&y| y >= 0.0));
        let rep = check_conditions_a(&p);
        assert!((rep.a3 / rep.a3_target - 1.0).abs() < 1e-10);
        let t0 = p.t[0];
        assert!((t0 - p.y_star[0].sqrt() / (p.n as f64 * p.family.h()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log_pow4_schedule_is_reduced() {
        let p = least_favorable_prior(1, 1.0, 1001, &PriorConfig { schedule: FrequencySchedule::LogPow4, ..Default::default() }, &unit()).unwrap();
        assert!(p.requested_freqs > 1000);
        assert!(p.family.blocks() >= 1);
        assert!(p.family.freqs() < 10);
    }

    #[test]
    fn small_n_priors_exist() {
        for n in [51, 101] {
            let p = least_favorable_prior(1, 1.0, n, &PriorConfig::default(), &unit()).unwrap();
            assert!(p.family.blocks() >= 1);
            assert!(p.y_star.iter().all(|&y| y >= 0.0));
        }
    }

    #[test]
    fn zero_scale_gives_zero_draw() {
        let mut p = least_favorable_prior(1, 1.0, 101, &PriorConfig::default(), &unit()).unwrap();
        p.t.iter_mut().for_each(|t| *t = 0.0);
        let d = sample_prior(&p, 1, 0);
        assert!(d.theta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn xi_event_frequency_and_sup_bound() {
        let p = least_favorable_prior(1, 1.0, 1001, &PriorConfig::default(), &unit()).unwrap();
        let reps = 4000;
        let misses = (0..reps).filter(|&r| !sample_prior(&p, 3, r).xi_event).count();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let bound = (p.dim() as f64 * 2.0 * (1.0 - normal.cdf(p.d_n.sqrt()))).min(1.0);
        let freq = misses as f64 / reps as f64;
        let se = (bound * (1.0 - bound) / reps as f64).sqrt();
        assert!(freq <= bound + 4.0 * se, "{freq} vs {bound}");

        let cap = p.d_n.sqrt() * p.t_star();
        for r in 0..50 {
            let d = sample_prior(&p, 4, r);
            if !d.xi_event {
                continue;
            }
            let s = KernelFunction::new(p.family.clone(), d.theta).unwrap();
            let sup = (0..=4000).map(|i| s.eval(i as f64 / 4000.0).abs()).fold(0.0, f64::max);
            assert!(sup <= cap + 1e-12);
        }
    }
}
