//! Parametric families on the positive orthant with closed-form or
//! simulated variation indexes.
//!
//! Each submodule pairs moment formulas with a sampler where one exists,
//! so closed forms can be cross-checked against Monte Carlo estimates:
//!
//! * [`exponential`]: correlated exponential margins (mean/covariance
//!   specified directly through rates and a correlation matrix);
//! * [`marshall_olkin`]: bivariate exponentials coupled through a common
//!   shock;
//! * [`arnold_ng`]: bivariate beta built from five independent gammas;
//! * [`teimouri_gupta`]: bivariate Weibull with a polynomial copula
//!   perturbation;
//! * [`mst`]: multivariate Tweedie-type variance functions;
//! * [`tweedie`]: admissible correlation bounds for exponential-margin
//!   Tweedie constructions.

pub mod arnold_ng;
pub mod exponential;
pub mod marshall_olkin;
pub mod mst;
pub mod teimouri_gupta;
pub mod tweedie;

/// Mean and variation index of one margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginStats {
    pub mean: f64,
    pub vi: f64,
}
