//! Minimax lower-bound machinery: a block-local kernel family built from
//! mollified trigonometric functions, the least favorable Gaussian prior on
//! its coefficients, a van Trees bound for the heteroscedastic model, and
//! Monte Carlo Bayes risk.

mod kernel;
mod prior;
mod van_trees;

pub use kernel::{kernel_function, local_basis, KernelAtom, KernelFamily, KernelFunction};
pub use prior::{
    check_conditions_a, h_star, least_favorable_prior, lower_bound_target, sample_prior, ConditionsReport,
    FrequencySchedule, LeastFavorablePrior, PriorConfig, PriorDraw,
};
pub use van_trees::{bayes_risk_mc, van_trees_bound, ConstantFamily, ParametricFamily, VanTreesBound, VanTreesTerm};
