//! Correlated exponential margins.
//!
//! Margin j is exponential with rate `μ_j` (mean `1/μ_j`, variance equal
//! to the squared mean), coupled through a correlation matrix `ρ`, so
//! the covariance is `Σ = diag(m) ρ diag(m)`. The excess form
//!
//! `1 + Σ_{i≠j} ρ_ij m_i² m_j² / (mᵀ m)²  =  1 + GVI − MVI`
//!
//! is driven entirely by the correlations: positive total correlation
//! mass means over-variation, zero means exact equi-variation, negative
//! means under-variation. The raw GVI and MVI both carry an additional
//! mean-profile factor `Σ m_i⁴ / (mᵀ m)²` and are *not* 1 at
//! independence once `k > 1`; the excess form strips that factor out.

use nalgebra::{DMatrix, DVector};

use crate::data::MomentSummary;
use crate::error::{Error, Result};
use crate::indexes::{IndexKind, IndexValue};

/// Rates and margin correlation matrix of a correlated exponential vector.
#[derive(Debug, Clone)]
pub struct ExpFamilyParams {
    mu: DVector<f64>,
    rho: DMatrix<f64>,
}

impl ExpFamilyParams {
    /// Validates rates (positive, finite) and the correlation matrix
    /// (symmetric, unit diagonal, entries in [−1, 1], positive
    /// semidefinite within numerical slack).
    pub fn new(mu: DVector<f64>, rho: DMatrix<f64>) -> Result<Self> {
        let k = mu.len();
        if k == 0 {
            return Err(Error::InvalidParameter("empty rate vector".into()));
        }
        if rho.nrows() != k || rho.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "{k} rates but {}x{} correlation matrix",
                rho.nrows(),
                rho.ncols()
            )));
        }
        for (j, &m) in mu.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "rate {} is {m}, must be positive",
                    j + 1
                )));
            }
        }
        validate_correlation(&rho)?;
        Ok(Self { mu, rho })
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.mu.map(|m| 1.0 / m)
    }

    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }
}

/// Shared correlation-matrix validation for family parameters.
pub(crate) fn validate_correlation(rho: &DMatrix<f64>) -> Result<()> {
    let k = rho.nrows();
    for i in 0..k {
        if (rho[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "correlation diagonal entry {} is {}, must be 1",
                i + 1,
                rho[(i, i)]
            )));
        }
        for j in (i + 1)..k {
            if (rho[(i, j)] - rho[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "correlation matrix not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if rho[(i, j)].abs() > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "correlation entry ({}, {}) is {}, outside [-1, 1]",
                    i + 1,
                    j + 1,
                    rho[(i, j)]
                )));
            }
        }
    }
    let eigs = nalgebra::SymmetricEigen::new(rho.clone()).eigenvalues;
    let max_abs = eigs.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    let min = eigs.iter().fold(f64::INFINITY, |a, &e| a.min(e));
    if min < -1e-10 * max_abs {
        return Err(Error::InvalidParameter(format!(
            "correlation matrix not positive semidefinite (eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

/// Mean vector and covariance `diag(m) ρ diag(m)` of the family.
pub fn exp_moments(params: &ExpFamilyParams) -> Result<MomentSummary> {
    let mean = params.mean();
    let k = params.k();
    let cov = DMatrix::from_fn(k, k, |i, j| params.rho[(i, j)] * mean[i] * mean[j]);
    MomentSummary::new(mean, cov, None)
}

/// GVI in excess form: `1 + Σ_{i≠j} ρ_ij m_i² m_j² / (mᵀ m)²`.
///
/// The off-diagonal sum is evaluated directly, so an identity correlation
/// matrix yields exactly 1.
pub fn exp_excess_gvi(params: &ExpFamilyParams) -> Result<IndexValue> {
    let mean = params.mean();
    let norm2 = mean.dot(&mean);
    let mut excess = 0.0;
    for i in 0..params.k() {
        for j in 0..params.k() {
            if i != j {
                excess += params.rho[(i, j)] * mean[i] * mean[i] * mean[j] * mean[j];
            }
        }
    }
    IndexValue::new(1.0 + excess / (norm2 * norm2), IndexKind::ExcessGvi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexes::{gvi, mvi};
    use approx::assert_abs_diff_eq;

    #[test]
    fn uncorrelated_family_is_exactly_equi_varied() {
        let p = ExpFamilyParams::new(
            DVector::from_vec(vec![0.5, 2.0, 3.0]),
            DMatrix::identity(3, 3),
        )
        .unwrap();
        // Exactly 1, not approximately: the off-diagonal sum is empty.
        assert_eq!(exp_excess_gvi(&p).unwrap().value(), 1.0);
        // Raw GVI and MVI coincide (no cross terms) but equal the
        // mean-profile factor Σ m⁴ / (Σ m²)², not 1.
        let m = p.mean();
        let profile =
            m.iter().map(|v| v.powi(4)).sum::<f64>() / m.dot(&m).powi(2);
        let s = exp_moments(&p).unwrap();
        assert_abs_diff_eq!(gvi(&s).unwrap().value(), profile, epsilon = 1e-14);
        assert_abs_diff_eq!(mvi(&s).unwrap().value(), profile, epsilon = 1e-14);
        assert!(profile < 1.0);
    }

    #[test]
    fn excess_form_is_one_plus_gvi_minus_mvi() {
        let rho = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let p = ExpFamilyParams::new(DVector::from_vec(vec![1.0, 0.5]), rho).unwrap();
        let s = exp_moments(&p).unwrap();
        let g = gvi(&s).unwrap().value();
        let m = mvi(&s).unwrap().value();
        assert_abs_diff_eq!(
            exp_excess_gvi(&p).unwrap().value(),
            1.0 + g - m,
            epsilon = 1e-14
        );
        // Hand value: m = (1, 2), excess = 1 + 2·0.4·1·4/25 = 1.128.
        assert_abs_diff_eq!(exp_excess_gvi(&p).unwrap().value(), 1.128, epsilon = 1e-14);
    }

    #[test]
    fn negative_correlation_under_varies() {
        let rho = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        let p = ExpFamilyParams::new(DVector::from_vec(vec![1.0, 1.0]), rho).unwrap();
        let e = exp_excess_gvi(&p).unwrap().value();
        assert!(e < 1.0);
        assert_abs_diff_eq!(e, 1.0 - 0.25, epsilon = 1e-14);
        // Equal unit means: mvi = 2/4, cross = −0.25, gvi = 0.25.
        let s = exp_moments(&p).unwrap();
        assert_abs_diff_eq!(mvi(&s).unwrap().value(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(gvi(&s).unwrap().value(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn excess_is_scale_invariant_in_the_rates() {
        let rho = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let a = ExpFamilyParams::new(DVector::from_vec(vec![1.0, 2.0]), rho.clone()).unwrap();
        let b = ExpFamilyParams::new(DVector::from_vec(vec![10.0, 20.0]), rho).unwrap();
        assert_abs_diff_eq!(
            exp_excess_gvi(&a).unwrap().value(),
            exp_excess_gvi(&b).unwrap().value(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ExpFamilyParams::new(
            DVector::from_vec(vec![1.0, -1.0]),
            DMatrix::identity(2, 2)
        )
        .is_err());
        let bad_diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.9]);
        assert!(ExpFamilyParams::new(DVector::from_vec(vec![1.0, 1.0]), bad_diag).is_err());
        let not_psd = DMatrix::from_row_slice(3, 3, &[
            1.0, 0.9, -0.9, //
            0.9, 1.0, 0.9, //
            -0.9, 0.9, 1.0,
        ]);
        assert!(ExpFamilyParams::new(DVector::from_vec(vec![1.0, 1.0, 1.0]), not_psd).is_err());
    }
}
