//! The Pinsker-type weight family `Λ = {λ_α : α ∈ {1..k*} × {ε, 2ε, .., mε}}`
//! and the slowly varying tuning sequences that size it.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Grid index `α = (β, t)` with `t = t_index · ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightIndex {
    pub beta: u32,
    /// 1-based position of `t` on the grid `{ε, .., mε}`.
    pub t_index: u32,
    pub t: f64,
}

impl WeightIndex {
    pub fn new(beta: u32, t_index: u32, eps: f64) -> Result<Self> {
        if beta < 1 {
            return Err(invalid("beta must be >= 1"));
        }
        if t_index < 1 {
            return Err(invalid("t index must be >= 1"));
        }
        Ok(Self {
            beta,
            t_index,
            t: t_index as f64 * eps,
        })
    }

    /// Index with an arbitrary positive `t` (off-grid, for theory checks).
    pub fn with_t(beta: u32, t: f64) -> Result<Self> {
        if beta < 1 || !(t > 0.0) {
            return Err(invalid("need beta >= 1 and t > 0"));
        }
        Ok(Self {
            beta,
            t_index: 0,
            t,
        })
    }

    fn key(&self) -> (u32, u32) {
        (self.beta, self.t_index)
    }
}

impl Eq for WeightIndex {}

impl PartialOrd for WeightIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on `(β, t)`; this is also the tie-break order of the selector.
impl Ord for WeightIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key()
            .cmp(&other.key())
            .then_with(|| self.t.total_cmp(&other.t))
    }
}

/// Knobs the theory leaves free. Defaults: `k̄ = ω̄ = 0`, `L_n = √ln n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningOptions {
    pub k_bar: f64,
    pub omega_bar: f64,
    /// Fixed `L_n`; `None` means `√ln n`.
    pub big_l: Option<f64>,
    /// Force the penalty coefficient `ρ` (overrides `L_n`).
    pub rho: Option<f64>,
}

impl Default for TuningOptions {
    fn default() -> Self {
        Self {
            k_bar: 0.0,
            omega_bar: 0.0,
            big_l: None,
            rho: None,
        }
    }
}

/// The sequences `ε_n, k*_n, m, l_n, L_n, ρ, ω̄, k̄` at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningSequences {
    pub n: usize,
    pub eps_n: f64,
    pub k_star: u32,
    pub m: u32,
    pub l_n: usize,
    pub big_l_n: f64,
    pub rho: f64,
    pub omega_bar: f64,
    pub k_bar: f64,
}

impl TuningSequences {
    pub fn new(n: usize, opts: &TuningOptions) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(invalid(format!("tuning needs odd n >= 3, got {n}")));
        }
        if opts.k_bar < 0.0 || opts.omega_bar < 0.0 {
            return Err(invalid("k_bar and omega_bar must be nonnegative"));
        }
        let ln = (n as f64).ln();
        let eps_n = 1.0 / ln;
        let k_star = ((opts.k_bar + ln.sqrt()).floor() as u32).max(1);
        let m = ((1.0 / (eps_n * eps_n)).floor() as u32).max(1);
        let l_n = ((n as f64).cbrt() + 1.0).floor() as usize;
        let big_l_n = opts.big_l.unwrap_or_else(|| ln.sqrt());
        if big_l_n < 0.0 {
            return Err(invalid("L_n must be nonnegative"));
        }
        let rho = opts.rho.unwrap_or(1.0 / (3.0 + big_l_n));
        if !(rho > 0.0 && rho <= 1.0 / 3.0) {
            return Err(invalid(format!("rho must lie in (0, 1/3], got {rho}")));
        }
        Ok(Self {
            n,
            eps_n,
            k_star,
            m,
            l_n,
            big_l_n,
            rho,
            omega_bar: opts.omega_bar,
            k_bar: opts.k_bar,
        })
    }

    /// Number of family members `k*·m`.
    pub fn family_size(&self) -> usize {
        self.k_star as usize * self.m as usize
    }
}

/// Default sequences: `ε = 1/ln n`, `k* = ⌊√ln n⌋`, `L_n = √ln n`.
pub fn default_sequences(n: usize) -> Result<TuningSequences> {
    TuningSequences::new(n, &TuningOptions::default())
}

/// `A_β = (β+1)(2β+1) / (β π^{2β})`.
pub fn a_beta(beta: u32) -> Result<f64> {
    if beta < 1 {
        return Err(invalid("beta must be >= 1"));
    }
    let b = beta as f64;
    Ok((b + 1.0) * (2.0 * b + 1.0) / (b * PI.powf(2.0 * b)))
}

/// Cutoff frequency `ω(α) = ω̄ + (A_β t n)^{1/(2β+1)}`.
pub fn omega(alpha: &WeightIndex, n: usize, seqs: &TuningSequences) -> Result<f64> {
    let a = a_beta(alpha.beta)?;
    let p = 1.0 / (2.0 * alpha.beta as f64 + 1.0);
    Ok(seqs.omega_bar + (a * alpha.t * n as f64).powf(p))
}

/// A length-`n` weight vector with its shape summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    values: Vec<f64>,
    /// Entries `1..=head` equal one.
    head: usize,
    /// Entries past `support` are zero.
    support: usize,
    norm_sq: f64,
}

impl WeightVector {
    /// Wrap arbitrary weights (e.g. `λ ≡ 1` or an indicator).
    pub fn from_values(values: Vec<f64>) -> Self {
        let head = values.iter().take_while(|&&v| v == 1.0).count();
        let support = values.iter().rposition(|&v| v != 0.0).map_or(0, |p| p + 1);
        let norm_sq = values.iter().map(|v| v * v).sum();
        Self {
            values,
            head,
            support,
            norm_sq,
        }
    }

    pub fn ones(n: usize) -> Self {
        Self::from_values(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_values(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn support(&self) -> usize {
        self.support
    }

    /// `|λ|² = Σ λ²(j)`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// `λ_α(j) = 1{j ≤ j₀} + (1 − (j/ω)^β) 1{j₀ < j ≤ ω}` with `j₀ = ⌊ω ε⌋`,
/// truncated to `n` entries.
pub fn pinsker_weights(alpha: &WeightIndex, n: usize, seqs: &TuningSequences) -> Result<WeightVector> {
    if n < 3 || n % 2 == 0 {
        return Err(invalid(format!("weights need odd n >= 3, got {n}")));
    }
    let w = omega(alpha, n, seqs)?;
    let j0 = (w * seqs.eps_n).floor() as usize;
    let beta = alpha.beta as i32;
    let values = (1..=n)
        .map(|j| {
            let jf = j as f64;
            if j <= j0 {
                1.0
            } else if jf <= w {
                1.0 - (jf / w).powi(beta)
            } else {
                0.0
            }
        })
        .collect();
    Ok(WeightVector::from_values(values))
}

/// All `k*·m` members in increasing `(β, t)` order.
pub fn weight_family(n: usize, seqs: &TuningSequences) -> Result<Vec<(WeightIndex, WeightVector)>> {
    let mut out = Vec::with_capacity(seqs.family_size());
    for beta in 1..=seqs.k_star {
        for i in 1..=seqs.m {
            let alpha = WeightIndex::new(beta, i, seqs.eps_n)?;
            let lambda = pinsker_weights(&alpha, n, seqs)?;
            out.push((alpha, lambda));
        }
    }
    Ok(out)
}
