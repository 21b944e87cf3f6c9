//! Heteroscedastic data generation: scale operators `g(x, S)`, the noise
//! menu, the mollifier used for smooth cutoffs, and the non-periodic wrapper.

mod data;
mod mollifier;
mod noise;
mod scale;

pub use data::{generate_observations, nonperiodic_transform, DataGenerator};
pub use mollifier::{mollified_indicator, mollifier_cdf, mollifier_kernel, smooth_cutoff, SmoothCutoff};
pub use noise::{default_l_star, default_noise_menu, NoiseSpec};
pub use scale::{CutoffScale, EconometricScale, ScaleModel};
