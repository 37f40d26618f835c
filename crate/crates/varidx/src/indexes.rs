//! Variation indexes and their relative forms.
//!
//! All indexes are ratios of quadratic forms in the mean vector `m` and
//! covariance `Σ`, normalized so the uncorrelated exponential
//! distribution sits at 1:
//!
//! * `gvi`: `(mᵀ Σ m) / (mᵀ m)²`, sensitive to correlation;
//! * `mvi`: `(mᵀ diag(Σ) m) / (mᵀ m)²`, the correlation-free part;
//! * `rvi`: ratio of two GVIs at (numerically) equal means;
//! * `rwi`: `tr(Σ W⁺(m))` against a modelled variance function `W`,
//!   which reduces to `gvi` when `W(m) = m mᵀ`.
//!
//! Both `gvi` and `mvi` are invariant under positive rescaling of the
//! data and under permutation of coordinates.

use nalgebra::{DMatrix, DVector};

use crate::data::MomentSummary;
use crate::error::{Error, Result};

/// Relative eigenvalue cutoff for [`pseudo_inverse`].
pub const DEFAULT_PINV_RTOL: f64 = 1e-10;
/// Half-width of the equi-variation band used by [`classify`].
pub const DEFAULT_EQUI_TOL: f64 = 0.05;
/// Maximum relative mean discrepancy accepted by [`rvi`].
pub const DEFAULT_MEAN_TOL: f64 = 1e-6;

/// Which index a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Gvi,
    Mvi,
    Rvi,
    Rwi,
    ExcessGvi,
    MarginalVi,
}

/// A computed index: a finite nonnegative number tagged with its kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValue {
    value: f64,
    kind: IndexKind,
}

impl IndexValue {
    /// Accepts finite nonnegative values; tiny negative rounding noise
    /// (within 1e-12) is clamped to zero.
    pub fn new(value: f64, kind: IndexKind) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NumericFailure(format!(
                "index evaluated to non-finite value {value}"
            )));
        }
        let value = if value < 0.0 && value >= -1e-12 {
            0.0
        } else {
            value
        };
        if value < 0.0 {
            return Err(Error::NumericFailure(format!(
                "index evaluated to negative value {value}"
            )));
        }
        Ok(Self { value, kind })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }
}

/// Position of an index value relative to the exponential reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationLabel {
    Over,
    Equi,
    Under,
}

impl VariationLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariationLabel::Over => "over",
            VariationLabel::Equi => "equi",
            VariationLabel::Under => "under",
        }
    }
}

/// Classification outcome with the band half-width that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationClass {
    pub label: VariationLabel,
    pub tolerance: f64,
}

/// A modelled variance function `m ↦ V(m)` with an explicit domain.
pub struct VarianceFunction {
    eval: Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>,
    accepts: Box<dyn Fn(&DVector<f64>) -> bool + Send + Sync>,
}

impl VarianceFunction {
    pub fn new(
        eval: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        accepts: impl Fn(&DVector<f64>) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Box::new(eval),
            accepts: Box::new(accepts),
        }
    }

    pub fn accepts(&self, mean: &DVector<f64>) -> bool {
        (self.accepts)(mean)
    }

    /// Evaluates `V(m)`, checking domain membership and symmetry of the
    /// result.
    pub fn eval(&self, mean: &DVector<f64>) -> Result<DMatrix<f64>> {
        if !self.accepts(mean) {
            return Err(Error::OutsideMeanDomain);
        }
        let v = (self.eval)(mean);
        if v.nrows() != mean.len() || v.ncols() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "variance function returned {}x{} for a {}-vector",
                v.nrows(),
                v.ncols(),
                mean.len()
            )));
        }
        let scale = v.amax().max(1.0);
        for i in 0..v.nrows() {
            for j in (i + 1)..v.ncols() {
                if (v[(i, j)] - v[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::NumericFailure(
                        "variance function returned an asymmetric matrix".into(),
                    ));
                }
            }
        }
        Ok(v)
    }
}

fn squared_norm(m: &DVector<f64>) -> f64 {
    m.dot(m)
}

/// Generalized variation index `(mᵀ Σ m) / (mᵀ m)²`.
pub fn gvi(summary: &MomentSummary) -> Result<IndexValue> {
    let m = summary.mean();
    let num = m.dot(&(summary.cov() * m));
    let den = squared_norm(m).powi(2);
    IndexValue::new(num / den, IndexKind::Gvi)
}

/// Marginal variation index `(mᵀ diag(Σ) m) / (mᵀ m)²`.
pub fn mvi(summary: &MomentSummary) -> Result<IndexValue> {
    let m = summary.mean();
    let num: f64 = (0..summary.k())
        .map(|j| m[j] * m[j] * summary.cov()[(j, j)])
        .sum();
    let den = squared_norm(m).powi(2);
    IndexValue::new(num / den, IndexKind::Mvi)
}

/// The bivariate split `gvi = mvi + cross`, with the cross term equal to
/// `ρ · 2 m₁² m₂² √(VI₁ VI₂) / (m₁² + m₂²)²` (simplified to
/// `2 m₁ m₂ σ₁₂ / (m₁² + m₂²)²`, which also covers zero-variance margins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateDecomposition {
    pub mvi: f64,
    pub cross: f64,
    pub gvi: f64,
}

pub fn bivariate_decomposition(summary: &MomentSummary) -> Result<BivariateDecomposition> {
    if summary.k() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "bivariate decomposition needs k = 2, got k = {}",
            summary.k()
        )));
    }
    let m = summary.mean();
    let den = squared_norm(m).powi(2);
    let mvi_val = mvi(summary)?.value();
    let cross = 2.0 * m[0] * m[1] * summary.cov()[(0, 1)] / den;
    Ok(BivariateDecomposition {
        mvi: mvi_val,
        cross,
        gvi: mvi_val + cross,
    })
}

/// Relative variation index: GVI of `num` over GVI of `den`, defined only
/// when the two mean vectors agree within `mean_tol` (relative,
/// coordinatewise).
pub fn rvi(num: &MomentSummary, den: &MomentSummary, mean_tol: f64) -> Result<IndexValue> {
    if num.k() != den.k() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare k = {} with k = {}",
            num.k(),
            den.k()
        )));
    }
    if !(mean_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean tolerance must be positive, got {mean_tol}"
        )));
    }
    let max_rel = num
        .mean()
        .iter()
        .zip(den.mean().iter())
        .map(|(&a, &b)| (a - b).abs() / a.abs().max(b.abs()))
        .fold(0.0f64, f64::max);
    if max_rel > mean_tol {
        return Err(Error::MeanMismatch {
            max_rel,
            tol: mean_tol,
        });
    }
    let reference = gvi(den)?.value();
    if reference == 0.0 {
        return Err(Error::ZeroReferenceIndex);
    }
    IndexValue::new(gvi(num)?.value() / reference, IndexKind::Rvi)
}

/// GVI of a modelled variance function at a mean: `(mᵀ V(m) m) / (mᵀ m)²`.
pub fn gvi_function(vf: &VarianceFunction, mean: &DVector<f64>) -> Result<IndexValue> {
    let v = vf.eval(mean)?;
    let num = mean.dot(&(&v * mean));
    IndexValue::new(num / squared_norm(mean).powi(2), IndexKind::Gvi)
}

/// MVI of a modelled variance function at a mean.
pub fn mvi_function(vf: &VarianceFunction, mean: &DVector<f64>) -> Result<IndexValue> {
    let v = vf.eval(mean)?;
    let num: f64 = (0..mean.len())
        .map(|j| mean[j] * mean[j] * v[(j, j)])
        .sum();
    IndexValue::new(num / squared_norm(mean).powi(2), IndexKind::Mvi)
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix via its
/// eigendecomposition. Eigenvalues of magnitude at most
/// `rel_tol · max|λ|` are treated as zero.
pub fn pseudo_inverse(matrix: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    symmetric_pinv(matrix, rel_tol, false)
}

fn symmetric_pinv(
    matrix: &DMatrix<f64>,
    rel_tol: f64,
    require_psd: bool,
) -> Result<DMatrix<f64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "pseudo-inverse needs a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pseudo-inverse cutoff must lie in (0, 1), got {rel_tol}"
        )));
    }
    let scale = matrix.amax();
    if !scale.is_finite() {
        return Err(Error::NumericFailure(
            "pseudo-inverse input has non-finite entries".into(),
        ));
    }
    for i in 0..matrix.nrows() {
        for j in (i + 1)..matrix.ncols() {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidParameter(
                    "pseudo-inverse input is not symmetric".into(),
                ));
            }
        }
    }
    if scale == 0.0 {
        return Ok(DMatrix::zeros(matrix.nrows(), matrix.ncols()));
    }
    let eig = nalgebra::SymmetricEigen::new(matrix.clone());
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    if require_psd {
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &e| a.min(e));
        if min < -1e-10 * max_abs {
            return Err(Error::InvalidParameter(format!(
                "matrix is not positive semidefinite (eigenvalue {min:.3e})"
            )));
        }
    }
    let cutoff = rel_tol * max_abs;
    let inv_eigs = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&e| if e.abs() <= cutoff { 0.0 } else { 1.0 / e }),
    );
    let q = &eig.eigenvectors;
    let result = q * DMatrix::from_diagonal(&inv_eigs) * q.transpose();
    // Symmetrize away the rounding from the triple product.
    Ok(0.5 * (&result + result.transpose()))
}

/// Relative index against a modelled variance function:
/// `tr(Σ_Y W⁺(m))` with `W(m)` required to be symmetric PSD.
pub fn rwi(
    sigma: &DMatrix<f64>,
    weight: &VarianceFunction,
    mean: &DVector<f64>,
) -> Result<IndexValue> {
    let w = weight.eval(mean)?;
    if sigma.nrows() != w.nrows() || sigma.ncols() != w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{} but weight is {}x{}",
            sigma.nrows(),
            sigma.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    let w_pinv = symmetric_pinv(&w, DEFAULT_PINV_RTOL, true)?;
    IndexValue::new((sigma * w_pinv).trace(), IndexKind::Rwi)
}

/// Places an index relative to 1 with an equi-variation band of
/// half-width `tolerance`.
pub fn classify(index: &IndexValue, tolerance: f64) -> Result<VariationClass> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "classification tolerance must lie in (0, 1), got {tolerance}"
        )));
    }
    let label = if index.value() > 1.0 + tolerance {
        VariationLabel::Over
    } else if index.value() < 1.0 - tolerance {
        VariationLabel::Under
    } else {
        VariationLabel::Equi
    };
    Ok(VariationClass { label, tolerance })
}
