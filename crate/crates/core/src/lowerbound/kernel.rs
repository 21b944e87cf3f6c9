use std::any::Any;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use crate::basis::phi;
use crate::error::{invalid, Error, Result};
use crate::function::RegressionFunction;
use crate::models::mollifier_cdf;
use crate::quadrature::{simpson_n, simpson_nodes};

/// Trigonometric basis of `L₂[−1, 1]`: `e₁ = 1/√2`, `e_j(x) = cos(π[j/2]x)`
/// for even `j` and `sin(π[j/2]x)` for odd `j ≥ 3`.
pub fn local_basis(j: usize, x: f64) -> f64 {
    if j <= 1 {
        return FRAC_1_SQRT_2;
    }
    let w = PI * (j / 2) as f64 * x;
    if j % 2 == 0 {
        w.cos()
    } else {
        w.sin()
    }
}

fn chi(eta: f64, v: f64) -> f64 {
    if v.abs() >= 1.0 {
        return 0.0;
    }
    if v.abs() <= 1.0 - 2.0 * eta {
        return 1.0;
    }
    let edge = 1.0 - eta;
    (mollifier_cdf((edge - v) / eta) - mollifier_cdf((-edge - v) / eta)).clamp(0.0, 1.0)
}

/// `M` disjoint blocks of half-width `h` centred at `x̃_m = 2mh`, each
/// carrying `N` functions `D_{m,j}(x) = e_j(v) χ_η(v)`, `v = (x − x̃_m)/h`.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    h: f64,
    blocks: usize,
    freqs: usize,
    eta: f64,
    /// `∫ e_i e_j χ_η` over `[−1, 1]`, row-major `N × N`.
    g1: Arc<Vec<f64>>,
    /// `∫ e_i e_j χ_η²`.
    g2: Arc<Vec<f64>>,
}

impl KernelFamily {
    /// `M = ⌊1/(2h)⌋ − 1` must be at least one.
    pub fn new(h: f64, freqs: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(invalid(format!("eta must lie in (0, 1/2), got {eta}")));
        }
        if freqs < 1 {
            return Err(invalid("need at least one frequency per block"));
        }
        if !(h > 0.0) {
            return Err(invalid(format!("half-width must be positive, got {h}")));
        }
        let blocks = (1.0 / (2.0 * h)).floor() as i64 - 1;
        if blocks < 1 {
            return Err(Error::InfeasiblePrior(format!("half-width {h} leaves no block")));
        }
        let (xs, ws) = simpson_nodes(-1.0, 1.0);
        let chis: Vec<f64> = xs.iter().map(|&v| chi(eta, v)).collect();
        let basis: Vec<Vec<f64>> = (1..=freqs)
            .map(|j| xs.iter().map(|&v| local_basis(j, v)).collect())
            .collect();
        let mut g1 = vec![0.0; freqs * freqs];
        let mut g2 = vec![0.0; freqs * freqs];
        for i in 0..freqs {
            for j in i..freqs {
                let (mut a, mut b) = (0.0, 0.0);
                for q in 0..xs.len() {
                    let p = ws[q] * basis[i][q] * basis[j][q] * chis[q];
                    a += p;
                    b += p * chis[q];
                }
                g1[i * freqs + j] = a;
                g1[j * freqs + i] = a;
                g2[i * freqs + j] = b;
                g2[j * freqs + i] = b;
            }
        }
        Ok(Self {
            h,
            blocks: blocks as usize,
            freqs,
            eta,
            g1: Arc::new(g1),
            g2: Arc::new(g2),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `M`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// `N`.
    pub fn freqs(&self) -> usize {
        self.freqs
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.blocks * self.freqs
    }

    /// `x̃_m = 2mh`, `m = 1..M`.
    pub fn center(&self, m: usize) -> f64 {
        2.0 * m as f64 * self.h
    }

    pub fn centers(&self) -> Vec<f64> {
        (1..=self.blocks).map(|m| self.center(m)).collect()
    }

    /// Flat index of `(m, j)`, both 1-based.
    pub fn index(&self, m: usize, j: usize) -> usize {
        (m - 1) * self.freqs + (j - 1)
    }

    /// `∫_{−1}^{1} e_i e_j χ_η`.
    pub fn gram_chi(&self, i: usize, j: usize) -> f64 {
        self.g1[(i - 1) * self.freqs + (j - 1)]
    }

    /// `∫_{−1}^{1} e_i e_j χ_η²`.
    pub fn gram_chi2(&self, i: usize, j: usize) -> f64 {
        self.g2[(i - 1) * self.freqs + (j - 1)]
    }

    /// `ē_j(χ_η) = ∫ e_j² χ_η`.
    pub fn e_bar_chi(&self, j: usize) -> f64 {
        self.gram_chi(j, j)
    }

    /// `ē_j(χ_η²)`.
    pub fn e_bar_chi2(&self, j: usize) -> f64 {
        self.gram_chi2(j, j)
    }

    /// Block containing `x` and the local coordinate `v`, if `|v| < 1`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let m = (x / (2.0 * self.h)).round();
        if m < 1.0 || m > self.blocks as f64 {
            return None;
        }
        let m = m as usize;
        let v = (x - self.center(m)) / self.h;
        (v.abs() < 1.0).then_some((m, v))
    }

    /// `D_{m,j}(x)`.
    pub fn atom(&self, m: usize, j: usize, x: f64) -> f64 {
        let v = (x - self.center(m)) / self.h;
        if v.abs() >= 1.0 {
            return 0.0;
        }
        local_basis(j, v) * chi(self.eta, v)
    }

    /// `∫ D_{m,i} D_{m',j}`: zero across blocks, `h ∫ e_i e_j χ_η²` within.
    pub fn atom_inner(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        if a.0 != b.0 {
            return 0.0;
        }
        self.h * self.gram_chi2(a.1, b.1)
    }
}

fn check_dims(family: &KernelFamily, z: &[f64]) -> Result<()> {
    if z.len() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: z.len(),
        });
    }
    Ok(())
}

/// `S_{z,n}(x) = Σ_m Σ_j z_{m,j} D_{m,j}(x)`; `z` is row-major `M × N`.
pub fn kernel_function(z: &[f64], family: &KernelFamily, x: f64) -> Result<f64> {
    check_dims(family, z)?;
    Ok(eval_kernel(family, z, x))
}

fn eval_kernel(family: &KernelFamily, z: &[f64], x: f64) -> f64 {
    match family.locate(x) {
        None => 0.0,
        Some((m, v)) => {
            let c = chi(family.eta, v);
            if c == 0.0 {
                return 0.0;
            }
            let row = &z[(m - 1) * family.freqs..m * family.freqs];
            c * row
                .iter()
                .enumerate()
                .map(|(i, zi)| zi * local_basis(i + 1, v))
                .sum::<f64>()
        }
    }
}

/// `S_{z,n}` as a function, with closed-form norms via the Gram matrices.
#[derive(Debug, Clone)]
pub struct KernelFunction {
    family: KernelFamily,
    z: Vec<f64>,
}

impl KernelFunction {
    pub fn new(family: KernelFamily, z: Vec<f64>) -> Result<Self> {
        check_dims(&family, &z)?;
        Ok(Self { family, z })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.z
    }

    /// `∫ S_z D_{m,j} = h Σ_i z_{m,i} ∫ e_i e_j χ_η²`.
    pub fn inner_atom(&self, m: usize, j: usize) -> f64 {
        let n = self.family.freqs;
        let row = &self.z[(m - 1) * n..m * n];
        self.family.h
            * row
                .iter()
                .enumerate()
                .map(|(i, zi)| zi * self.family.gram_chi2(i + 1, j))
                .sum::<f64>()
    }
}

impl RegressionFunction for KernelFunction {
    fn eval(&self, x: f64) -> f64 {
        eval_kernel(&self.family, &self.z, x)
    }

    fn norm_sq(&self) -> f64 {
        let n = self.family.freqs;
        (1..=self.family.blocks)
            .map(|m| {
                let row = &self.z[(m - 1) * n..m * n];
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += row[i] * row[j] * self.family.gram_chi2(i + 1, j + 1);
                    }
                }
                acc
            })
            .sum::<f64>()
            * self.family.h
    }

    fn inner(&self, other: &dyn RegressionFunction) -> f64 {
        if let Some(a) = other.as_any().downcast_ref::<KernelAtom>() {
            return self.inner_atom(a.m, a.j);
        }
        if let Some(k) = other.as_any().downcast_ref::<KernelFunction>() {
            if k.family.h == self.family.h && k.family.freqs == self.family.freqs && k.family.eta == self.family.eta {
                let n = self.family.freqs;
                let mut acc = 0.0;
                for m in 1..=self.family.blocks {
                    for i in 1..=n {
                        for j in 1..=n {
                            acc += self.z[(m - 1) * n + i - 1] * k.z[(m - 1) * n + j - 1] * self.family.gram_chi2(i, j);
                        }
                    }
                }
                return acc * self.family.h;
            }
        }
        (1..=self.family.blocks)
            .map(|m| {
                let c = self.family.center(m);
                let h = self.family.h;
                simpson_n(|x| self.eval(x) * other.eval(x), c - h, c + h, 4097)
            })
            .sum()
    }

    fn fourier_coefficient(&self, j: usize) -> f64 {
        let n = self.family.freqs;
        (1..=self.family.blocks)
            .flat_map(|m| (1..=n).map(move |i| (m, i)))
            .map(|(m, i)| {
                let zi = self.z[(m - 1) * n + i - 1];
                if zi == 0.0 {
                    0.0
                } else {
                    zi * KernelAtom::new(self.family.clone(), m, i).fourier_coefficient(j)
                }
            })
            .sum()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// A single `D_{m,j}`.
#[derive(Debug, Clone)]
pub struct KernelAtom {
    family: KernelFamily,
    pub m: usize,
    pub j: usize,
}

impl KernelAtom {
    pub fn new(family: KernelFamily, m: usize, j: usize) -> Self {
        assert!((1..=family.blocks).contains(&m) && (1..=family.freqs).contains(&j));
        Self { family, m, j }
    }
}

impl RegressionFunction for KernelAtom {
    fn eval(&self, x: f64) -> f64 {
        self.family.atom(self.m, self.j, x)
    }

    fn norm_sq(&self) -> f64 {
        self.family.h * self.family.gram_chi2(self.j, self.j)
    }

    fn inner(&self, other: &dyn RegressionFunction) -> f64 {
        if let Some(k) = other.as_any().downcast_ref::<KernelFunction>() {
            return k.inner_atom(self.m, self.j);
        }
        if let Some(a) = other.as_any().downcast_ref::<KernelAtom>() {
            return self.family.atom_inner((self.m, self.j), (a.m, a.j));
        }
        let c = self.family.center(self.m);
        let h = self.family.h;
        simpson_n(|x| self.eval(x) * other.eval(x), c - h, c + h, 4097)
    }

    /// Quadrature restricted to the support, with enough nodes per period of `φ_l`.
    fn fourier_coefficient(&self, l: usize) -> f64 {
        let c = self.family.center(self.m);
        let h = self.family.h;
        let cycles = (l / 2) as f64 * 2.0 * h;
        let points = ((cycles * 64.0) as usize).max(2048) | 1;
        simpson_n(|x| self.eval(x) * phi(l, x), c - h, c + h, points)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
