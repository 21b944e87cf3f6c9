use std::any::Any;
use std::sync::OnceLock;

use crate::error::{invalid, Result};
use crate::function::RegressionFunction;
use crate::quadrature::gauss_legendre5;

const CELLS: usize = 1 << 14;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

struct CdfTable {
    scale: f64,
    /// `cum[i] = ∫_{-1}^{-1 + i·dz} bump`, unnormalized.
    cum: Vec<f64>,
}

fn table() -> &'static CdfTable {
    static TABLE: OnceLock<CdfTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let dz = 2.0 / CELLS as f64;
        let mut cum = Vec::with_capacity(CELLS + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..CELLS {
            let a = -1.0 + i as f64 * dz;
            acc += gauss_legendre5(bump, a, a + dz);
            cum.push(acc);
        }
        CdfTable { scale: 1.0 / acc, cum }
    })
}

/// `V(u) = c·exp(−1/(1−u²))` on `|u| < 1`, normalized to unit mass.
pub fn mollifier_kernel(u: f64) -> f64 {
    table().scale * bump(u)
}

/// `∫_{-∞}^{z} V`.
pub fn mollifier_cdf(z: f64) -> f64 {
    if z <= -1.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let t = table();
    let dz = 2.0 / CELLS as f64;
    let i = (((z + 1.0) / dz).floor() as usize).min(CELLS - 1);
    let left = -1.0 + i as f64 * dz;
    ((t.cum[i] + gauss_legendre5(bump, left, z)) * t.scale).clamp(0.0, 1.0)
}

pub(crate) fn chi_eta(eta: f64, x: f64) -> f64 {
    let edge = 1.0 - eta;
    (mollifier_cdf((edge - x) / eta) - mollifier_cdf((-edge - x) / eta)).clamp(0.0, 1.0)
}

/// `χ_η(x) = η⁻¹ ∫ 1{|u| ≤ 1−η} V((u−x)/η) du`: one on `|x| ≤ 1−2η`,
/// zero on `|x| ≥ 1`.
pub fn mollified_indicator(eta: f64, x: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(invalid(format!("eta must lie in (0, 1/2), got {eta}")));
    }
    Ok(chi_eta(eta, x))
}

/// Smooth periodic cutoff: `1` on `[a, b]`, `0` near `0` and `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCutoff {
    pub a: f64,
    pub b: f64,
    lo: f64,
    hi: f64,
    eta: f64,
}

impl SmoothCutoff {
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl RegressionFunction for SmoothCutoff {
    fn eval(&self, x: f64) -> f64 {
        (mollifier_cdf((x - self.lo) / self.eta) - mollifier_cdf((x - self.hi) / self.eta)).clamp(0.0, 1.0)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `1_{[a', b']}` convolved with `V` at bandwidth `η = min(a, 1−b)/4`,
/// where `a' = a/2` and `b' = b/2 + 1/2`.
pub fn smooth_cutoff(a: f64, b: f64) -> Result<SmoothCutoff> {
    if !(0.0 < a && a < b && b < 1.0) {
        return Err(invalid(format!("need 0 < a < b < 1, got a = {a}, b = {b}")));
    }
    Ok(SmoothCutoff {
        a,
        b,
        lo: a / 2.0,
        hi: b / 2.0 + 0.5,
        eta: a.min(1.0 - b) / 4.0,
    })
}
