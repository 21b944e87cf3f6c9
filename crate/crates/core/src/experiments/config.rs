use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::PriorConfig;
use crate::models::{default_l_star, default_noise_menu, EconometricScale, NoiseSpec};
use crate::theory::SobolevBall;
use crate::weights::TuningOptions;

/// Built-in test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `2φ₂ + φ₅`.
    S1,
    /// A compactly supported `C^∞` bump centred at `1/2`.
    S2,
    /// `S ≡ 0`.
    S3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionSpec {
    Preset { name: Preset },
    /// `Σ c_j φ_j` from `(j, c_j)` pairs.
    Trig { terms: Vec<(usize, f64)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSpec {
    /// The model-selection estimator `Ŝ*`.
    Adaptive,
    /// The family member `λ_α̃` built from the true ball and `ς(S)`.
    OracleWeight,
    /// Every member `λ_α` of the family, one row each.
    PerFamily,
    /// `λ ≡ 1`.
    Projection,
    /// `λ ≡ 0`.
    Zero,
}

impl EstimatorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Adaptive => "adaptive",
            Self::OracleWeight => "oracle_weight",
            Self::PerFamily => "per_family",
            Self::Projection => "projection",
            Self::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub test_function: TestFunctionSpec,
    /// Defaults to the preset's ball, or `k = 1` with the smallest integer
    /// radius containing a custom polynomial.
    pub ball: Option<SobolevBall>,
    pub scale: EconometricScale,
    pub noise_menu: Vec<NoiseSpec>,
    pub estimators: Vec<EstimatorSpec>,
    pub tuning: TuningOptions,
    pub prior: PriorConfig,
    /// Prior draws for the expectations inside the van Trees bound.
    pub fisher_reps: usize,
    /// Thread count; `None` uses every core.
    pub workers: Option<usize>,
    /// Write per-replicate losses here when set.
    pub replicates_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![101, 301, 1001, 3001],
            reps: 200,
            seed: 20_240_601,
            test_function: TestFunctionSpec::Preset { name: Preset::S1 },
            ball: None,
            scale: EconometricScale {
                c0: 1.0,
                c1: 1.0,
                c2: 0.5,
                c3: 0.5,
            },
            noise_menu: default_noise_menu(),
            estimators: vec![EstimatorSpec::Adaptive, EstimatorSpec::OracleWeight],
            tuning: TuningOptions::default(),
            prior: PriorConfig::default(),
            fisher_reps: 500,
            workers: None,
            replicates_path: None,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_grid.is_empty() {
            return fail("n_grid is empty".into());
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 3 || n % 2 == 0) {
            return fail(format!("every n must be odd and at least 3, got {n}"));
        }
        if self.reps < 1 {
            return fail("reps must be at least 1".into());
        }
        if self.noise_menu.is_empty() {
            return fail("noise_menu is empty".into());
        }
        if self.estimators.is_empty() {
            return fail("no estimators configured".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be positive".into());
        }
        EconometricScale::new(self.scale.c0, self.scale.c1, self.scale.c2, self.scale.c3)?;
        if let Some(b) = &self.ball {
            SobolevBall::new(b.k, b.r)?;
        }
        let n_min = *self.n_grid.iter().min().unwrap_or(&3);
        for noise in &self.noise_menu {
            noise.validate()?;
            noise.check_moment(default_l_star(n_min))?;
        }
        Ok(())
    }

    /// Runs `f` on a pool with the configured number of workers.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            builder = builder.num_threads(w);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}
