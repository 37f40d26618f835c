//! Variation indexes for multivariate continuous distributions on the
//! positive orthant.
//!
//! The univariate variation index of a positive random variable is
//! `VI = Var(Y) / E(Y)^2`, with the exponential distribution as the
//! reference (`VI = 1`). This crate provides the two multivariate
//! generalizations built from the mean vector `m` and covariance `Σ`:
//!
//! * the generalized variation index `GVI = (mᵀ Σ m) / (mᵀ m)²`, and
//! * the marginal variation index `MVI = (mᵀ diag(Σ) m) / (mᵀ m)²`,
//!
//! together with relative forms (ratios against a reference
//! distribution or a modelled variance function), delta-method
//! asymptotics and Wald tests, bootstrap resampling, closed-form
//! results for several parametric families on `[0, ∞)^k`, and a
//! Gaussian-copula (NORTA) generator for simulating datasets with
//! prescribed marginals and correlation structure.
//!
//! Both indexes compare against the uncorrelated exponential benchmark:
//! values above 1 indicate over-variation, values near 1
//! equi-variation, values below 1 under-variation.

pub mod asymptotics;
pub mod data;
pub mod error;
pub mod families;
pub mod indexes;
pub mod normal;
pub mod norta;
pub mod resampling;
pub mod rng;
pub mod stats;

pub use data::{load_csv, summarize, Dataset, MomentSummary};
pub use error::{Error, Result};
pub use indexes::{gvi, mvi, IndexKind, IndexValue, VariationClass, VariationLabel};
