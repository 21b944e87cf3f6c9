use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::noise::NoiseSpec;
use super::scale::{CutoffScale, ScaleModel};
use crate::basis::DesignGrid;
use crate::error::{invalid, Result};
use crate::function::{RegressionFunction, SampledFunction};
use crate::rng::{substream, tag};

/// `S(x_j)` and `g(x_j, S)` precomputed for repeated draws of
/// `y_j = S(x_j) + g(x_j, S) ξ_j`.
#[derive(Debug, Clone)]
pub struct DataGenerator {
    signal: Vec<f64>,
    scale: Vec<f64>,
}

impl DataGenerator {
    pub fn new(s: &dyn RegressionFunction, scale: &dyn ScaleModel, grid: &DesignGrid) -> Self {
        let signal = grid.points().iter().map(|&x| s.eval(x)).collect();
        let scale = scale.g2_profile(s, grid.points()).into_iter().map(f64::sqrt).collect();
        Self { signal, scale }
    }

    pub fn from_sampled(s: &SampledFunction, scale: &dyn ScaleModel) -> Result<Self> {
        let n = s.values().len();
        let grid = DesignGrid::new(n)?;
        Ok(Self {
            signal: s.values().to_vec(),
            scale: scale
                .g2_profile(s.function().as_ref(), grid.points())
                .into_iter()
                .map(f64::sqrt)
                .collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.signal.len()
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    /// `σ_j = g(x_j, S)`.
    pub fn scales(&self) -> &[f64] {
        &self.scale
    }

    /// Observations for replicate `replicate`; the stream depends only on
    /// `(seed, n, replicate)`.
    pub fn draw(&self, noise: NoiseSpec, seed: u64, replicate: u64) -> Vec<f64> {
        let mut rng = substream(seed, &[tag::NOISE, self.n() as u64], replicate);
        let mut xi = vec![0.0; self.n()];
        noise.fill(&mut rng, &mut xi);
        self.signal
            .iter()
            .zip(&self.scale)
            .zip(&xi)
            .map(|((s, g), e)| s + g * e)
            .collect()
    }
}

/// `y_j = S(x_j) + g(x_j, S) ξ_j` with `ξ` i.i.d. from `noise`.
pub fn generate_observations(
    s: &SampledFunction,
    scale: &dyn ScaleModel,
    noise: NoiseSpec,
    seed: u64,
    replicate: u64,
) -> Result<Vec<f64>> {
    noise.validate()?;
    Ok(DataGenerator::from_sampled(s, scale)?.draw(noise, seed, replicate))
}

/// `ỹ_j = y_j χ(x_j) + ε ζ_j` with fresh standard Gaussian `ζ`, together
/// with the induced scale `g̃ = √(g² χ² + ε²)`.
pub fn nonperiodic_transform(
    y: &[f64],
    scale: Arc<dyn ScaleModel>,
    chi: Arc<dyn RegressionFunction>,
    epsilon: f64,
    seed: u64,
    replicate: u64,
) -> Result<(Vec<f64>, CutoffScale)> {
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let grid = DesignGrid::new(y.len())?;
    let mut rng = substream(seed, &[tag::CUTOFF, y.len() as u64], replicate);
    let out = y
        .iter()
        .zip(grid.points())
        .map(|(&v, &x)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v * chi.eval(x) + epsilon * z
        })
        .collect();
    Ok((out, CutoffScale::new(scale, chi, epsilon)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::TrigPolynomial;
    use crate::models::{smooth_cutoff, EconometricScale};

    fn mc_moments(samples: &[Vec<f64>], j: usize) -> ((f64, f64), (f64, f64)) {
        let k = samples.len() as f64;
        let xs: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        let m = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / k;
        let se_var = ((m4 - var * var) / k).sqrt();
        ((m, (var / k).sqrt()), (var, se_var))
    }

    #[test]
    fn mean_and_variance_match_model() {
        let n = 11;
        let grid = DesignGrid::new(n).unwrap();
        let s: Arc<dyn RegressionFunction> = Arc::new(TrigPolynomial::new([(2, 1.0), (3, 0.5)]));
        let sampled = SampledFunction::new(s.clone(), &grid);
        let scale = EconometricScale::new(1.0, 1.0, 0.5, 0.5).unwrap();
        let generator = DataGenerator::new(s.as_ref(), &scale, &grid);
        let draws: Vec<Vec<f64>> = (0..10_000)
            .map(|r| generator.draw(NoiseSpec::Gaussian, 5, r))
            .collect();
        for j in [0, 4, 10] {
            let ((m, se), (v, se_v)) = mc_moments(&draws, j);
            assert!((m - sampled.values()[j]).abs() < 4.0 * se);
            let g2 = scale.g2(grid.points()[j], s.as_ref());
            assert!((v - g2).abs() < 4.0 * se_v, "{v} vs {g2}");
        }
        let y = generate_observations(&sampled, &scale, NoiseSpec::Gaussian, 5, 3).unwrap();
        assert_eq!(y, draws[3]);
    }

    #[test]
    fn rademacher_is_two_point() {
        let n = 15;
        let grid = DesignGrid::new(n).unwrap();
        let s: Arc<dyn RegressionFunction> = Arc::new(TrigPolynomial::new([(1, 0.3), (4, 1.0)]));
        let sampled = SampledFunction::new(s.clone(), &grid);
        let scale = EconometricScale::new(0.5, 1.0, 0.0, 0.2).unwrap();
        let y = generate_observations(&sampled, &scale, NoiseSpec::Rademacher, 1, 0).unwrap();
        for (j, &x) in grid.points().iter().enumerate() {
            let g = scale.g(x, s.as_ref());
            let d = (y[j] - sampled.values()[j]).abs();
            assert!((d - g).abs() < 1e-14);
        }
    }

    #[test]
    fn cutoff_transform() {
        let n = 101;
        let grid = DesignGrid::new(n).unwrap();
        let chi: Arc<dyn RegressionFunction> = Arc::new(smooth_cutoff(0.2, 0.8).unwrap());
        let scale: Arc<dyn ScaleModel> = Arc::new(EconometricScale::new(1.0, 0.0, 0.5, 0.0).unwrap());
        let s: Arc<dyn RegressionFunction> = Arc::new(TrigPolynomial::new([(2, 1.0)]));
        let generator = DataGenerator::new(s.as_ref(), scale.as_ref(), &grid);
        let eps = 0.05;
        let (first, gt) = nonperiodic_transform(&generator.draw(NoiseSpec::Gaussian, 9, 0), scale.clone(), chi.clone(), eps, 9, 0).unwrap();
        // Near x = 0 the cutoff vanishes and only the added noise remains.
        let (z_only, _) = nonperiodic_transform(&vec![0.0; n], scale.clone(), chi.clone(), eps, 9, 0).unwrap();
        assert_eq!(chi.eval(grid.points()[0]), 0.0);
        assert_eq!(first[0], z_only[0]);
        for &x in grid.points() {
            assert!(gt.g(x, s.as_ref()) >= eps);
        }
        let draws: Vec<Vec<f64>> = (0..8000)
            .map(|r| nonperiodic_transform(&generator.draw(NoiseSpec::Gaussian, 9, r), scale.clone(), chi.clone(), eps, 9, r).unwrap().0)
            .collect();
        for j in [0, 30, 50, 90] {
            let x = grid.points()[j];
            let ((m, se), (v, se_v)) = mc_moments(&draws, j);
            assert!((m - s.eval(x) * chi.eval(x)).abs() < 4.0 * se);
            assert!((v - gt.g2(x, s.as_ref())).abs() < 4.0 * se_v);
        }
        assert!(nonperiodic_transform(&vec![0.0; n], scale, chi, 0.0, 1, 0).is_err());
    }
}
