//! Delta-method asymptotics for the variation indexes.
//!
//! With `θ̂ = (m̂, vech Σ̂)` the sample index is a smooth function of
//! sample moments, so `√n (ĝ − g)` is asymptotically normal with variance
//! `∇gᵀ Cov(θ̂) ∇g`. The moment covariance is estimated by the unbiased
//! sample covariance of the augmented observation vectors (see
//! [`crate::data::augmented_moments`]): `Γ` for the GVI (coordinates plus
//! upper-triangle products), `Π` for the MVI (coordinates plus squares).
//!
//! Gradient layout matches the augmentation: first the k mean
//! derivatives, then the covariance derivatives in
//! [`crate::data::pair_indices`] order (for GVI) or the k variance
//! derivatives (for MVI).

use nalgebra::{DMatrix, DVector};

use crate::data::{augmented_moments, pair_indices, summarize, Dataset, MomentSummary};
use crate::error::{Error, Result};
use crate::indexes::{gvi, mvi};
use crate::normal::standard_normal_quantile;

/// GVI delta-method output: gradient, augmented covariance, variance.
#[derive(Debug, Clone)]
pub struct GviAsymptotics {
    pub estimate: f64,
    pub delta: DVector<f64>,
    pub gamma: DMatrix<f64>,
    pub sigma2: f64,
}

/// MVI delta-method output.
#[derive(Debug, Clone)]
pub struct MviAsymptotics {
    pub estimate: f64,
    pub lambda: DVector<f64>,
    pub pi: DMatrix<f64>,
    pub sigma2: f64,
}

/// Two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Wald test of equi-variation `H₀: GVI = null_value`.
#[derive(Debug, Clone, Copy)]
pub struct WaldTest {
    pub statistic: f64,
    pub critical: f64,
    pub reject: bool,
}

/// Gradient of the GVI in `(m, vech Σ)`:
///
/// * mean part: `{2 (Σ m)_j − 4 m_j (mᵀm) GVI} / (mᵀm)²`,
/// * diagonal part: `m_j² / (mᵀm)²`,
/// * off-diagonal part `(j, ℓ)`: `2 m_j m_ℓ / (mᵀm)²`.
pub fn delta_gvi(summary: &MomentSummary) -> Result<DVector<f64>> {
    let k = summary.k();
    let m = summary.mean();
    let norm2 = m.dot(m);
    let den = norm2 * norm2;
    let g = gvi(summary)?.value();
    let sigma_m = summary.cov() * m;
    let pairs = pair_indices(k);
    let mut grad = DVector::zeros(k + pairs.len());
    for j in 0..k {
        grad[j] = (2.0 * sigma_m[j] - 4.0 * m[j] * norm2 * g) / den;
    }
    for (p, &(a, b)) in pairs.iter().enumerate() {
        grad[k + p] = if a == b {
            m[a] * m[a] / den
        } else {
            2.0 * m[a] * m[b] / den
        };
    }
    Ok(grad)
}

/// Gradient of the MVI in `(m, diag Σ)`:
///
/// * mean part: `{2 m_j Σ_jj − 4 m_j (mᵀm) MVI} / (mᵀm)²`,
/// * variance part: `m_j² / (mᵀm)²`.
pub fn lambda_mvi(summary: &MomentSummary) -> Result<DVector<f64>> {
    let k = summary.k();
    let m = summary.mean();
    let norm2 = m.dot(m);
    let den = norm2 * norm2;
    let v = mvi(summary)?.value();
    let mut grad = DVector::zeros(2 * k);
    for j in 0..k {
        grad[j] = (2.0 * m[j] * summary.cov()[(j, j)] - 4.0 * m[j] * norm2 * v) / den;
        grad[k + j] = m[j] * m[j] / den;
    }
    Ok(grad)
}

/// Estimated asymptotic variance of `√n (GVÎ − GVI)`.
///
/// A negative quadratic form (possible in ill-conditioned samples) is
/// clamped to zero with a warning.
pub fn sigma2_gvi(data: &Dataset) -> Result<GviAsymptotics> {
    let summary = summarize(data)?;
    let aug = augmented_moments(data)?;
    let delta = delta_gvi(&summary)?;
    let sigma2 = clamp_variance(delta.dot(&(&aug.gamma * &delta)), "GVI");
    Ok(GviAsymptotics {
        estimate: gvi(&summary)?.value(),
        delta,
        gamma: aug.gamma,
        sigma2,
    })
}

/// Estimated asymptotic variance of `√n (MVÎ − MVI)`.
pub fn sigma2_mvi(data: &Dataset) -> Result<MviAsymptotics> {
    let summary = summarize(data)?;
    let aug = augmented_moments(data)?;
    let lambda = lambda_mvi(&summary)?;
    let sigma2 = clamp_variance(lambda.dot(&(&aug.pi * &lambda)), "MVI");
    Ok(MviAsymptotics {
        estimate: mvi(&summary)?.value(),
        lambda,
        pi: aug.pi,
        sigma2,
    })
}

fn clamp_variance(sigma2: f64, which: &str) -> f64 {
    if sigma2 < 0.0 {
        log::warn!(
            "estimated asymptotic {which} variance {sigma2:.3e} is negative; clamping to 0"
        );
        0.0
    } else {
        sigma2
    }
}

/// Univariate asymptotic variance of `√n (VÎ − VI)` from the first four
/// raw moments `m1..m4`:
///
/// `σ² = {m4 m1² − 4 σ² m1 m3 + 4 σ² m2 m1² − (m1 m2)² + 4 σ⁶} / m1⁶`
/// with `σ² = m2 − m1²`.
pub fn univariate_sigma2(m1: f64, m2: f64, m3: f64, m4: f64) -> Result<f64> {
    if !(m1 > 0.0) || !m1.is_finite() {
        return Err(Error::InvalidMoments(format!(
            "first moment must be positive, got {m1}"
        )));
    }
    for (name, v) in [("m2", m2), ("m3", m3), ("m4", m4)] {
        if !v.is_finite() {
            return Err(Error::InvalidMoments(format!("{name} is not finite")));
        }
    }
    let var = m2 - m1 * m1;
    if var < 0.0 {
        return Err(Error::InvalidMoments(format!(
            "implied variance {var} is negative"
        )));
    }
    let num = m4 * m1 * m1 - 4.0 * var * m1 * m3 + 4.0 * var * m2 * m1 * m1
        - (m1 * m2) * (m1 * m2)
        + 4.0 * var * var * var;
    Ok(num / m1.powi(6))
}

/// Univariate asymptotic variance computed from data, with the raw
/// moments reconstructed from the same unbiased augmented covariances the
/// multivariate route uses, so for k = 1 this agrees with
/// [`sigma2_gvi`]/[`sigma2_mvi`] to rounding.
pub fn univariate_sigma2_from_data(data: &Dataset) -> Result<f64> {
    if data.k() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "univariate variance needs k = 1, got k = {}",
            data.k()
        )));
    }
    let summary = summarize(data)?;
    let aug = augmented_moments(data)?;
    let m1 = summary.mean()[0];
    let m2 = aug.gamma[(0, 0)] + m1 * m1;
    let m3 = aug.gamma[(0, 1)] + m1 * m2;
    let m4 = aug.gamma[(1, 1)] + m2 * m2;
    univariate_sigma2(m1, m2, m3, m4)
}

/// Normal-approximation interval `estimate ± Φ⁻¹((1+level)/2) √(σ²/n)`.
pub fn asymptotic_ci(
    estimate: f64,
    sigma2: f64,
    n: usize,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    if n == 0 {
        return Err(Error::InsufficientSample { needed: 1, found: 0 });
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotic variance must be nonnegative, got {sigma2}"
        )));
    }
    let u = standard_normal_quantile(0.5 + level / 2.0)?;
    let half = u * (sigma2 / n as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: estimate - half,
        upper: estimate + half,
        level,
    })
}

/// Wald test of `H₀: GVI = null_value` at the given level.
pub fn wald_equivariation_test(data: &Dataset, null_value: f64, level: f64) -> Result<WaldTest> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let asy = sigma2_gvi(data)?;
    if asy.sigma2 <= 0.0 {
        return Err(Error::DegenerateTest);
    }
    let statistic = (data.n() as f64).sqrt() * (asy.estimate - null_value) / asy.sigma2.sqrt();
    let critical = standard_normal_quantile(0.5 + level / 2.0)?;
    Ok(WaldTest {
        statistic,
        critical,
        reject: statistic.abs() > critical,
    })
}
