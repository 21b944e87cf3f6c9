use std::sync::{Arc, OnceLock};

use super::config::{Preset, TestFunctionSpec};
use crate::error::{Error, Result};
use crate::function::{FnFunction, RegressionFunction, TrigPolynomial, Zero};
use crate::theory::{ellipsoid_coeff, ellipsoid_membership, Membership, SobolevBall};

/// Coefficients beyond this index are treated as zero for quadrature-based
/// membership checks.
const MEMBERSHIP_TERMS: usize = 256;

const BUMP_CENTER: f64 = 0.5;
const BUMP_HALF_WIDTH: f64 = 0.3;

/// `exp(1 − 1/(1 − u²))` with `u = (x − 1/2)/0.3`, peak value 1.
pub fn bump(x: f64) -> f64 {
    let u = (x - BUMP_CENTER) / BUMP_HALF_WIDTH;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// A resolved test function with its ball and membership margin.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: String,
    pub function: Arc<dyn RegressionFunction>,
    pub ball: SobolevBall,
    pub membership: Membership,
}

impl TestFunction {
    pub fn require_membership(&self) -> Result<()> {
        if self.membership.inside {
            Ok(())
        } else {
            Err(Error::OutsideBall {
                k: self.ball.k,
                r: self.ball.r,
                margin: self.membership.margin,
            })
        }
    }
}

fn coefficients(f: &dyn RegressionFunction) -> Vec<f64> {
    if let Some(p) = f.as_any().downcast_ref::<TrigPolynomial>() {
        return (1..=p.max_index()).map(|j| p.coefficient(j)).collect();
    }
    (1..=MEMBERSHIP_TERMS).map(|j| f.fourier_coefficient(j)).collect()
}

/// `Σ a_j θ_j²` for the ball of order `k`.
pub fn sobolev_energy(f: &dyn RegressionFunction, k: u32) -> f64 {
    coefficients(f)
        .iter()
        .enumerate()
        .map(|(i, t)| ellipsoid_coeff(i + 1, k) * t * t)
        .sum()
}

fn bump_radius() -> f64 {
    static R: OnceLock<f64> = OnceLock::new();
    *R.get_or_init(|| (1.05 * sobolev_energy(&FnFunction::new("s2", bump), 2)).ceil())
}

pub fn preset_function(p: Preset) -> Arc<dyn RegressionFunction> {
    match p {
        Preset::S1 => Arc::new(TrigPolynomial::new([(2, 2.0), (5, 1.0)])),
        Preset::S2 => Arc::new(FnFunction::new("s2", bump)),
        Preset::S3 => Arc::new(Zero),
    }
}

/// `S₁ ∈ W¹_{321}`, `S₂ ∈ W²_r` with `r` 5% above its energy, `S₃ ∈ W¹_1`.
pub fn preset_ball(p: Preset) -> SobolevBall {
    match p {
        Preset::S1 => SobolevBall { k: 1, r: 321.0 },
        Preset::S2 => SobolevBall { k: 2, r: bump_radius() },
        Preset::S3 => SobolevBall { k: 1, r: 1.0 },
    }
}

pub fn resolve_test_function(spec: &TestFunctionSpec, ball: Option<SobolevBall>) -> Result<TestFunction> {
    let (name, function, default_ball) = match spec {
        TestFunctionSpec::Preset { name } => {
            let label = match name {
                Preset::S1 => "s1",
                Preset::S2 => "s2",
                Preset::S3 => "s3",
            };
            (label.to_string(), preset_function(*name), preset_ball(*name))
        }
        TestFunctionSpec::Trig { terms } => {
            if terms.iter().any(|(j, _)| *j == 0) {
                return Err(Error::Config("trigonometric indices start at 1".into()));
            }
            let p = TrigPolynomial::new(terms.iter().copied());
            let r = sobolev_energy(&p, 1).ceil().max(1.0);
            ("trig".to_string(), Arc::new(p) as Arc<dyn RegressionFunction>, SobolevBall { k: 1, r })
        }
    };
    let ball = ball.unwrap_or(default_ball);
    let membership = ellipsoid_membership(&coefficients(function.as_ref()), &ball);
    Ok(TestFunction {
        name,
        function,
        ball,
        membership,
    })
}
