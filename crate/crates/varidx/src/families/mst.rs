//! Multivariate Tweedie-type variance functions.
//!
//! The family is parameterized by a power vector `p` with `p₁ ≥ 1` and
//! `p_j ∈ {0} ∪ [1, ∞)` for `j ≥ 2`, plus a dispersion weight `λ > 0`.
//! Its variance function on strictly positive means is
//!
//! `V(m) = λ^{1−p₁} m₁^{p₁−2} · m mᵀ + diag(0, m₁^{1−p₂} m₂^{p₂}, …,
//! m₁^{1−p_k} m_k^{p_k})`,
//!
//! a rank-one component steered by the first coordinate plus independent
//! power-variance terms for the rest. For `p = (2, 2, …)` and `λ = 1`
//! the GVI of the function exceeds 1 for every positive mean.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::indexes::VarianceFunction;

/// Power vector and dispersion weight.
#[derive(Debug, Clone)]
pub struct MstParams {
    p: Vec<f64>,
    lambda: f64,
}

impl MstParams {
    /// `p₁ ≥ 1`; each later power is 0 (degenerate direction) or ≥ 1;
    /// `λ > 0`.
    pub fn new(p: Vec<f64>, lambda: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidParameter("empty power vector".into()));
        }
        if !p[0].is_finite() || p[0] < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "leading power is {}, must be at least 1",
                p[0]
            )));
        }
        for (j, &pj) in p.iter().enumerate().skip(1) {
            if !pj.is_finite() || (pj != 0.0 && pj < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "power {} is {pj}, must be 0 or at least 1",
                    j + 1
                )));
            }
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dispersion weight is {lambda}, must be positive"
            )));
        }
        Ok(Self { p, lambda })
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }
}

/// The variance function of the family; the domain is the strictly
/// positive orthant of matching dimension.
pub fn mst_variance_function(params: &MstParams) -> VarianceFunction {
    let MstParams { p, lambda } = params.clone();
    let k = p.len();
    let accepts = move |m: &DVector<f64>| m.len() == k && m.iter().all(|&v| v > 0.0 && v.is_finite());
    let p_eval = p;
    let eval = move |m: &DVector<f64>| {
        let scale = lambda.powf(1.0 - p_eval[0]) * m[0].powf(p_eval[0] - 2.0);
        let mut v = DMatrix::from_fn(m.len(), m.len(), |i, j| scale * m[i] * m[j]);
        for j in 1..m.len() {
            v[(j, j)] += m[0].powf(1.0 - p_eval[j]) * m[j].powf(p_eval[j]);
        }
        v
    };
    VarianceFunction::new(eval, accepts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexes::{gvi_function, mvi_function};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    #[test]
    fn quadratic_case_hand_matrix() {
        // p = (2, 2), λ = 1, m = (1, 1): V = mmᵀ + diag(0, 1).
        let params = MstParams::new(vec![2.0, 2.0], 1.0).unwrap();
        let vf = mst_variance_function(&params);
        let m = DVector::from_vec(vec![1.0, 1.0]);
        let v = vf.eval(&m).unwrap();
        assert_abs_diff_eq!(v[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(0, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(1, 1)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gvi_function(&vf, &m).unwrap().value(), 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(mvi_function(&vf, &m).unwrap().value(), 0.75, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_powers_always_over_vary() {
        // p₁ = 2, λ = 1, pⱼ > 1: the rank-one part alone contributes
        // (mᵀm)²/(m₁(mᵀm)²)·…; GVI stays above 1 on fuzzed means.
        let params = MstParams::new(vec![2.0, 1.5, 3.0], 1.0).unwrap();
        let vf = mst_variance_function(&params);
        let mut rng = crate::rng::stream_rng(5, 0);
        use rand::Rng;
        for _ in 0..200 {
            let m = DVector::from_fn(3, |_, _| 0.1 + rng.random::<f64>() * 4.0);
            let g = gvi_function(&vf, &m).unwrap().value();
            assert!(g > 1.0, "gvi {g} at mean {m:?}");
        }
    }

    #[test]
    fn zero_power_coordinate_has_constant_diagonal_term() {
        // p₂ = 0: additive term m₁·m₂⁰ = m₁, Gaussian-like in coordinate 2.
        let params = MstParams::new(vec![2.0, 0.0], 1.0).unwrap();
        let vf = mst_variance_function(&params);
        let m = DVector::from_vec(vec![3.0, 2.0]);
        let v = vf.eval(&m).unwrap();
        // Rank-one part m₂² = 4 plus additive term m₁ = 3.
        assert_abs_diff_eq!(v[(1, 1)], 7.0, epsilon = 1e-12);
    }

    #[test]
    fn domain_rejects_nonpositive_means() {
        let params = MstParams::new(vec![2.0, 2.0], 1.0).unwrap();
        let vf = mst_variance_function(&params);
        assert!(!vf.accepts(&DVector::from_vec(vec![1.0, 0.0])));
        assert!(!vf.accepts(&DVector::from_vec(vec![-1.0, 1.0])));
        assert!(vf.eval(&DVector::from_vec(vec![1.0, -2.0])).is_err());
        // Dimension mismatch is also outside the domain.
        assert!(!vf.accepts(&DVector::from_vec(vec![1.0, 1.0, 1.0])));
    }

    #[test]
    fn rejects_invalid_powers() {
        assert!(MstParams::new(vec![], 1.0).is_err());
        assert!(MstParams::new(vec![0.5, 2.0], 1.0).is_err());
        assert!(MstParams::new(vec![2.0, 0.5], 1.0).is_err());
        assert!(MstParams::new(vec![2.0, 2.0], 0.0).is_err());
    }
}
