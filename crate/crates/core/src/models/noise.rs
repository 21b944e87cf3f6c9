use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Centered, unit-variance noise laws with finite fourth moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Gaussian,
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    UniformNormalized,
    /// Student-t scaled by `√((df−2)/df)`.
    StudentTNormalized { df: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if let Self::StudentTNormalized { df } = self {
            if !(*df >= 5.0) || !df.is_finite() {
                return Err(invalid(format!("student-t noise needs df >= 5, got {df}")));
            }
        }
        Ok(())
    }

    /// `E ξ⁴`.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            Self::Gaussian => 3.0,
            Self::Rademacher => 1.0,
            Self::UniformNormalized => 1.8,
            Self::StudentTNormalized { df } => 3.0 * (df - 2.0) / (df - 4.0),
        }
    }

    /// Fails when `E ξ⁴ > l*`.
    pub fn check_moment(&self, l_star: f64) -> Result<()> {
        self.validate()?;
        let m = self.fourth_moment();
        if m > l_star {
            return Err(invalid(format!(
                "{} has fourth moment {m} above l* = {l_star}",
                self.label()
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Self::Gaussian => "gaussian".into(),
            Self::Rademacher => "rademacher".into(),
            Self::UniformNormalized => "uniform".into(),
            Self::StudentTNormalized { df } => format!("student_t{df}"),
        }
    }

    /// Fill `out` with i.i.d. draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            Self::Gaussian => out.iter_mut().for_each(|v| *v = StandardNormal.sample(rng)),
            Self::Rademacher => out
                .iter_mut()
                .for_each(|v| *v = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            Self::UniformNormalized => {
                let a = 3f64.sqrt();
                out.iter_mut().for_each(|v| *v = rng.random_range(-a..=a));
            }
            Self::StudentTNormalized { df } => {
                let t = StudentT::new(df).expect("df validated");
                let scale = ((df - 2.0) / df).sqrt();
                out.iter_mut().for_each(|v| *v = scale * t.sample(rng));
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut v = [0.0];
        self.fill(rng, &mut v);
        v[0]
    }
}

/// `l*_n = 3 + √ln n`.
pub fn default_l_star(n: usize) -> f64 {
    3.0 + (n as f64).ln().max(0.0).sqrt()
}

/// Gaussian, Rademacher, uniform and Student-t with 10 degrees of freedom.
pub fn default_noise_menu() -> Vec<NoiseSpec> {
    vec![
        NoiseSpec::Gaussian,
        NoiseSpec::Rademacher,
        NoiseSpec::UniformNormalized,
        NoiseSpec::StudentTNormalized { df: 10.0 },
    ]
}
