//! Admissible correlation bounds for exponential-margin Tweedie
//! constructions.
//!
//! A symmetric variation matrix `Λ` with positive diagonal and
//! nonnegative off-diagonal entries encodes common-shock mass between
//! coordinates. The implied pairwise correlation `ρ_ij = λ_ij/√(λ_ii λ_jj)`
//! is admissible only below the construction bound
//!
//! `bound(i,j) = min{R(i,j), R(j,i)}`,
//! `R(i,j) = √(λ_ii/λ_jj) · (1 − λ_ii⁻¹ Σ_{ℓ≠i,j} λ_iℓ)`,
//!
//! which fails entirely (an error, not a flag) when some row's
//! off-diagonal mass reaches its diagonal entry.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric nonnegative shock-mass matrix with positive diagonal.
#[derive(Debug, Clone)]
pub struct VariationMatrix {
    lam: DMatrix<f64>,
}

impl VariationMatrix {
    /// Validates shape, symmetry (1e-12 relative), sign constraints.
    pub fn new(lam: DMatrix<f64>) -> Result<Self> {
        let k = lam.nrows();
        if k == 0 || lam.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "variation matrix must be square and nonempty, got {}x{}",
                lam.nrows(),
                lam.ncols()
            )));
        }
        let scale = lam.amax().max(1.0);
        for i in 0..k {
            if !lam[(i, i)].is_finite() || lam[(i, i)] <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {} is {}, must be positive",
                    i + 1,
                    lam[(i, i)]
                )));
            }
            for j in (i + 1)..k {
                if (lam[(i, j)] - lam[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "variation matrix not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if !lam[(i, j)].is_finite() || lam[(i, j)] < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "off-diagonal entry ({}, {}) is {}, must be nonnegative",
                        i + 1,
                        j + 1,
                        lam[(i, j)]
                    )));
                }
            }
        }
        Ok(Self { lam })
    }

    pub fn k(&self) -> usize {
        self.lam.nrows()
    }

    pub fn lam(&self) -> &DMatrix<f64> {
        &self.lam
    }
}

/// Pairwise bounds, implied correlations, and admissibility flags.
/// Diagonal entries are the trivial values (bound 1, correlation 1,
/// valid).
#[derive(Debug, Clone)]
pub struct TweedieCorrBounds {
    pub bound: DMatrix<f64>,
    pub implied_rho: DMatrix<f64>,
    pub valid: Vec<Vec<bool>>,
}

/// Computes the admissible upper bound and validity of each implied
/// pairwise correlation.
///
/// Errors when any `R(i,j) ≤ 0`: that row carries more off-diagonal mass
/// than its diagonal admits, so no correlation for those pairs exists.
pub fn tweedie_exp_corr_bounds(vm: &VariationMatrix) -> Result<TweedieCorrBounds> {
    let k = vm.k();
    let lam = vm.lam();
    let mut r = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let off_mass: f64 = (0..k)
                .filter(|&l| l != i && l != j)
                .map(|l| lam[(i, l)])
                .sum();
            let value = (lam[(i, i)] / lam[(j, j)]).sqrt() * (1.0 - off_mass / lam[(i, i)]);
            if value <= 0.0 {
                return Err(Error::InvalidVariationMatrix { i: i + 1, j: j + 1 });
            }
            r[(i, j)] = value;
        }
    }
    let mut bound = DMatrix::zeros(k, k);
    let mut implied = DMatrix::zeros(k, k);
    let mut valid = vec![vec![true; k]; k];
    for i in 0..k {
        bound[(i, i)] = 1.0;
        implied[(i, i)] = 1.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let b = r[(i, j)].min(r[(j, i)]);
            let rho = lam[(i, j)] / (lam[(i, i)] * lam[(j, j)]).sqrt();
            bound[(i, j)] = b;
            implied[(i, j)] = rho;
            valid[i][j] = (0.0..b).contains(&rho);
        }
    }
    Ok(TweedieCorrBounds {
        bound,
        implied_rho: implied,
        valid,
    })
}
