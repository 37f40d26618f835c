//! Marshall–Olkin multivariate exponential.
//!
//! Independent exponentials `X_j ~ Exp(μ_j)` are hit by a common shock
//! `Z ~ Exp(μ₀)`; the observed vector couples them through coordinatewise
//! minima `Y_j = min(X_j, Z)`. Each margin is exponential with rate
//! `μ_j + μ₀`, and the shared shock induces nonnegative dependence:
//!
//! `Cov(Y_j, Y_ℓ) = μ₀ / {(μ_j+μ₀)(μ_ℓ+μ₀)(μ_j+μ_ℓ+μ₀)}`, `j ≠ ℓ`,
//!
//! with correlation `μ₀ / (μ_j+μ_ℓ+μ₀) ∈ [0, 1]`. `μ₀ = 0` recovers
//! independence. Margins have unit variation index, so the MVI is the
//! pure mean-geometry factor `Σ m_j⁴ / (mᵀ m)² < 1` for `k ≥ 2` and the
//! GVI exceeds the MVI by the correlation mass.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Open01;

use crate::data::{Dataset, MomentSummary};
use crate::error::{Error, Result};
use crate::indexes::{gvi, mvi, IndexKind, IndexValue};
use crate::rng::stream_rng;

/// Rates `μ₁..μ_k` of the idiosyncratic exponentials plus the
/// common-shock rate `μ₀`.
#[derive(Debug, Clone)]
pub struct MarshallOlkinParams {
    mu: DVector<f64>,
    mu0: f64,
}

impl MarshallOlkinParams {
    /// `μ_j > 0` for every coordinate; `μ₀ ≥ 0`.
    pub fn new(mu: DVector<f64>, mu0: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidParameter("empty rate vector".into()));
        }
        for (j, &m) in mu.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "rate {} is {m}, must be positive",
                    j + 1
                )));
            }
        }
        if !mu0.is_finite() || mu0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "common-shock rate is {mu0}, must be nonnegative"
            )));
        }
        Ok(Self { mu, mu0 })
    }

    /// Convenience constructor for the bivariate case.
    pub fn bivariate(mu1: f64, mu2: f64, mu0: f64) -> Result<Self> {
        Self::new(DVector::from_vec(vec![mu1, mu2]), mu0)
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }
}

/// Exact mean and covariance of the coupled vector.
pub fn mo_moments(params: &MarshallOlkinParams) -> Result<MomentSummary> {
    let k = params.k();
    let mu0 = params.mu0;
    let rate = |j: usize| params.mu[j] + mu0;
    let mean = DVector::from_fn(k, |j, _| 1.0 / rate(j));
    let cov = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0 / (rate(i) * rate(i))
        } else {
            mu0 / (rate(i) * rate(j) * (params.mu[i] + params.mu[j] + mu0))
        }
    });
    MomentSummary::new(mean, cov, None)
}

/// Closed-form indexes of the family.
#[derive(Debug, Clone, Copy)]
pub struct MoIndexes {
    pub gvi: IndexValue,
    pub mvi: IndexValue,
    /// GVI in excess form `1 + Σ_{j≠ℓ} m_j m_ℓ cov_jℓ / (mᵀ m)²`;
    /// identical in value to `1 + gvi − mvi`, and 1 exactly when `μ₀ = 0`.
    pub excess_gvi: IndexValue,
}

pub fn mo_indexes(params: &MarshallOlkinParams) -> Result<MoIndexes> {
    let s = mo_moments(params)?;
    let g = gvi(&s)?;
    let v = mvi(&s)?;
    let m = s.mean();
    let norm2 = m.dot(m);
    let mut mass = 0.0;
    for j in 0..params.k() {
        for l in 0..params.k() {
            if j != l {
                mass += m[j] * m[l] * s.cov()[(j, l)];
            }
        }
    }
    let excess = IndexValue::new(1.0 + mass / (norm2 * norm2), IndexKind::ExcessGvi)?;
    Ok(MoIndexes {
        gvi: g,
        mvi: v,
        excess_gvi: excess,
    })
}

/// Samples `n` vectors using the min-with-common-shock coupling.
pub fn mo_sample(params: &MarshallOlkinParams, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, found: n });
    }
    let k = params.k();
    let mu0 = params.mu0;
    let mut rng = stream_rng(seed, 0);
    // Open01 keeps draws strictly inside (0, 1), so −ln u / rate > 0.
    let mut exp_draw = |rate: f64| -> f64 {
        let u: f64 = rng.sample(Open01);
        -u.ln() / rate
    };
    let mut values = DMatrix::zeros(n, k);
    for i in 0..n {
        let z = if mu0 > 0.0 { exp_draw(mu0) } else { f64::INFINITY };
        for j in 0..k {
            values[(i, j)] = exp_draw(params.mu[j]).min(z);
        }
    }
    Dataset::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{correlation_from_cov, summarize};
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_unit_case_hand_values() {
        // μ = (1, 1), μ₀ = 1: margins Exp(2), Cov₁₂ = 1/12, ρ = 1/3,
        // GVI = 2/3, MVI = 1/2, excess = 7/6.
        let p = MarshallOlkinParams::bivariate(1.0, 1.0, 1.0).unwrap();
        let s = mo_moments(&p).unwrap();
        assert_abs_diff_eq!(s.mean()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cov()[(0, 0)], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cov()[(0, 1)], 1.0 / 12.0, epsilon = 1e-15);
        let rho = correlation_from_cov(&s).unwrap()[(0, 1)];
        assert_abs_diff_eq!(rho, 1.0 / 3.0, epsilon = 1e-14);
        let idx = mo_indexes(&p).unwrap();
        assert_abs_diff_eq!(idx.gvi.value(), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(idx.mvi.value(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(idx.excess_gvi.value(), 7.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_shock_rate_gives_independence() {
        let p = MarshallOlkinParams::bivariate(1.0, 1.0, 0.0).unwrap();
        let s = mo_moments(&p).unwrap();
        assert_eq!(s.cov()[(0, 1)], 0.0);
        let idx = mo_indexes(&p).unwrap();
        // Equal unit means: GVI = MVI = Σm⁴/(Σm²)² = 0.5; excess exactly 1.
        assert_abs_diff_eq!(idx.gvi.value(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(idx.mvi.value(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(idx.excess_gvi.value(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn excess_identity_and_mvi_bound_across_parameters() {
        let cases: [(&[f64], f64); 4] = [
            (&[1.0, 2.0], 0.5),
            (&[0.3, 0.3], 2.0),
            (&[5.0, 1.0, 0.7], 1.0),
            (&[2.0, 2.0, 2.0, 2.0], 0.1),
        ];
        for (mu, mu0) in cases {
            let p = MarshallOlkinParams::new(DVector::from_column_slice(mu), mu0).unwrap();
            let idx = mo_indexes(&p).unwrap();
            assert!(idx.mvi.value() < 1.0, "mvi must stay below 1 for k >= 2");
            assert!(idx.excess_gvi.value() >= 1.0 - 1e-14);
            assert_abs_diff_eq!(
                idx.excess_gvi.value(),
                1.0 + idx.gvi.value() - idx.mvi.value(),
                epsilon = 1e-14
            );
            let s = mo_moments(&p).unwrap();
            let corr = correlation_from_cov(&s).unwrap();
            for i in 0..p.k() {
                for j in 0..p.k() {
                    assert!(corr[(i, j)] >= -1e-15 && corr[(i, j)] <= 1.0 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn sampler_matches_closed_form_moments() {
        let p = MarshallOlkinParams::bivariate(1.0, 1.0, 1.0).unwrap();
        let ds = mo_sample(&p, 100_000, 31).unwrap();
        let s = summarize(&ds).unwrap();
        assert_abs_diff_eq!(s.mean()[0], 0.5, epsilon = 0.01);
        assert_abs_diff_eq!(s.mean()[1], 0.5, epsilon = 0.01);
        let rho = correlation_from_cov(&s).unwrap()[(0, 1)];
        assert_abs_diff_eq!(rho, 1.0 / 3.0, epsilon = 0.02);
    }

    #[test]
    fn independent_sampler_has_vanishing_correlation() {
        let p = MarshallOlkinParams::bivariate(1.0, 2.0, 0.0).unwrap();
        let ds = mo_sample(&p, 100_000, 8).unwrap();
        let s = summarize(&ds).unwrap();
        let rho = correlation_from_cov(&s).unwrap()[(0, 1)];
        assert_abs_diff_eq!(rho, 0.0, epsilon = 0.02);
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = MarshallOlkinParams::new(DVector::from_vec(vec![1.0, 2.0, 0.5]), 0.5).unwrap();
        let a = mo_sample(&p, 50, 9).unwrap();
        let b = mo_sample(&p, 50, 9).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(MarshallOlkinParams::bivariate(0.0, 1.0, 1.0).is_err());
        assert!(MarshallOlkinParams::bivariate(1.0, -1.0, 1.0).is_err());
        assert!(MarshallOlkinParams::bivariate(1.0, 1.0, -0.1).is_err());
        assert!(MarshallOlkinParams::new(DVector::zeros(0), 1.0).is_err());
    }
}
