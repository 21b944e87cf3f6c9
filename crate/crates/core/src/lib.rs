//! Adaptive efficient estimation of a periodic regression function under
//! heteroscedastic noise with an unknown, possibly state-dependent scale.
//!
//! The estimator is a weighted least squares projection onto the
//! trigonometric basis, with weights chosen from a finite family by a
//! penalized empirical cost. [`lowerbound`] builds the matching minimax
//! lower bound and [`experiments`] runs the simulation studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod function;
pub mod quadrature;
pub mod rng;
pub mod weights;
pub mod models;
pub mod selection;
pub mod theory;
pub mod lowerbound;
pub mod experiments;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/estimator.md")]
    mod estimator {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/lower-bound.md")]
    mod lower_bound {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
