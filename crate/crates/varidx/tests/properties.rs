//! Property-based checks of the index algebra: invariances, identities,
//! and classification behavior under randomized inputs.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use varidx::data::MomentSummary;
use varidx::indexes::{
    bivariate_decomposition, classify, gvi, gvi_function, mvi, pseudo_inverse, rvi, rwi,
    IndexKind, IndexValue, VarianceFunction, VariationLabel, DEFAULT_PINV_RTOL,
};

const REL_TOL: f64 = 1e-12;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Mean in [0.1, 10)^k and covariance A'A + positive diagonal, so the
/// summary always passes validation with a safely positive definite cov.
fn summary_strategy(k: usize) -> impl Strategy<Value = MomentSummary> {
    (
        prop::collection::vec(0.1f64..10.0, k),
        prop::collection::vec(-1.0f64..1.0, k * k),
        prop::collection::vec(0.05f64..1.0, k),
    )
        .prop_map(move |(mean, a, diag)| {
            let a = DMatrix::from_vec(k, k, a);
            let mut cov = a.transpose() * &a;
            for j in 0..k {
                cov[(j, j)] += diag[j];
            }
            MomentSummary::new(DVector::from_vec(mean), cov, None).unwrap()
        })
}

fn any_summary() -> impl Strategy<Value = MomentSummary> {
    (1usize..=5).prop_flat_map(summary_strategy)
}

proptest! {
    #[test]
    fn indexes_are_scale_invariant(summary in any_summary(), c in 0.01f64..100.0) {
        let scaled = MomentSummary::new(
            summary.mean() * c,
            summary.cov() * (c * c),
            None,
        ).unwrap();
        prop_assert!(rel_err(gvi(&summary).unwrap().value(), gvi(&scaled).unwrap().value()) <= REL_TOL);
        prop_assert!(rel_err(mvi(&summary).unwrap().value(), mvi(&scaled).unwrap().value()) <= REL_TOL);
    }

    #[test]
    fn indexes_are_permutation_invariant(
        summary in any_summary(),
        shuffle_seed in any::<u64>(),
    ) {
        let k = summary.k();
        // Fisher-Yates driven by a splitmix step; proptest supplies the seed.
        let mut perm: Vec<usize> = (0..k).collect();
        let mut state = shuffle_seed;
        for i in (1..k).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            perm.swap(i, j);
        }
        let mean = DVector::from_fn(k, |i, _| summary.mean()[perm[i]]);
        let cov = DMatrix::from_fn(k, k, |i, j| summary.cov()[(perm[i], perm[j])]);
        let permuted = MomentSummary::new(mean, cov, None).unwrap();
        prop_assert!(rel_err(gvi(&summary).unwrap().value(), gvi(&permuted).unwrap().value()) <= REL_TOL);
        prop_assert!(rel_err(mvi(&summary).unwrap().value(), mvi(&permuted).unwrap().value()) <= REL_TOL);
    }

    #[test]
    fn decomposition_reassembles_gvi(summary in summary_strategy(2)) {
        let d = bivariate_decomposition(&summary).unwrap();
        let g = gvi(&summary).unwrap().value();
        let m = mvi(&summary).unwrap().value();
        prop_assert!(rel_err(d.gvi, g) <= REL_TOL);
        prop_assert!(rel_err(d.mvi, m) <= REL_TOL);
        let scale = d.mvi.abs().max(d.cross.abs()).max(1.0);
        prop_assert!((d.mvi + d.cross - g).abs() <= REL_TOL * scale);
    }

    #[test]
    fn diagonal_covariance_collapses_cross_term(summary in any_summary()) {
        let k = summary.k();
        let diag = DMatrix::from_fn(k, k, |i, j| {
            if i == j { summary.cov()[(i, i)] } else { 0.0 }
        });
        let diag_summary = MomentSummary::new(summary.mean().clone(), diag, None).unwrap();
        if k == 2 {
            let d = bivariate_decomposition(&diag_summary).unwrap();
            prop_assert!(d.cross.abs() <= REL_TOL * d.mvi.max(1.0));
        }
        prop_assert!(rel_err(
            gvi(&diag_summary).unwrap().value(),
            mvi(&diag_summary).unwrap().value(),
        ) <= REL_TOL);
    }

    #[test]
    fn rank_one_pseudo_inverse_is_closed_form(mean in prop::collection::vec(0.1f64..10.0, 1..=5)) {
        let m = DVector::from_vec(mean);
        let outer = &m * m.transpose();
        let pinv = pseudo_inverse(&outer, DEFAULT_PINV_RTOL).unwrap();
        let denom = m.norm_squared().powi(2);
        let closed = &outer / denom;
        for i in 0..m.len() {
            for j in 0..m.len() {
                prop_assert!((pinv[(i, j)] - closed[(i, j)]).abs() <= 1e-10 * closed.amax().max(1.0));
            }
        }
    }

    #[test]
    fn rwi_with_squared_mean_weight_matches_gvi(summary in any_summary()) {
        let weight = VarianceFunction::new(
            |m: &DVector<f64>| m * m.transpose(),
            |_| true,
        );
        let via_rwi = rwi(summary.cov(), &weight, summary.mean()).unwrap().value();
        let direct = gvi(&summary).unwrap().value();
        prop_assert!(rel_err(via_rwi, direct) <= 1e-9, "rwi {via_rwi} vs gvi {direct}");
    }

    #[test]
    fn constant_variance_function_routes_agree(summary in any_summary()) {
        let cov = summary.cov().clone();
        let vf = VarianceFunction::new(move |_| cov.clone(), |_| true);
        let g1 = gvi_function(&vf, summary.mean()).unwrap().value();
        let g2 = gvi(&summary).unwrap().value();
        prop_assert!(rel_err(g1, g2) <= REL_TOL);
        let m1 = varidx::indexes::mvi_function(&vf, summary.mean()).unwrap().value();
        let m2 = mvi(&summary).unwrap().value();
        prop_assert!(rel_err(m1, m2) <= REL_TOL);
    }

    #[test]
    fn indexes_are_nonnegative(summary in any_summary()) {
        prop_assert!(gvi(&summary).unwrap().value() >= 0.0);
        prop_assert!(mvi(&summary).unwrap().value() >= 0.0);
    }

    #[test]
    fn univariate_indexes_reduce_to_vi(mean in 0.1f64..10.0, var in 0.01f64..5.0) {
        let summary = MomentSummary::new(
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, var),
            None,
        ).unwrap();
        let vi = var / (mean * mean);
        prop_assert!(rel_err(gvi(&summary).unwrap().value(), vi) <= REL_TOL);
        prop_assert!(rel_err(mvi(&summary).unwrap().value(), vi) <= REL_TOL);
    }

    #[test]
    fn relative_index_is_reciprocal_and_unit_on_self(summary in any_summary()) {
        let on_self = rvi(&summary, &summary, 1e-9).unwrap().value();
        prop_assert!((on_self - 1.0).abs() <= REL_TOL);

        // Same mean, different covariance: rvi(a, b) * rvi(b, a) = 1.
        let k = summary.k();
        let bumped = MomentSummary::new(
            summary.mean().clone(),
            summary.cov() * 2.0 + DMatrix::identity(k, k) * 0.1,
            None,
        ).unwrap();
        let forward = rvi(&summary, &bumped, 1e-9).unwrap().value();
        let backward = rvi(&bumped, &summary, 1e-9).unwrap().value();
        prop_assert!(rel_err(forward * backward, 1.0) <= 1e-11);
    }

    #[test]
    fn classification_respects_the_band(value in 0.001f64..3.0, tol in 0.01f64..0.5) {
        let index = IndexValue::new(value, IndexKind::Gvi).unwrap();
        let class = classify(&index, tol).unwrap();
        let expected = if value > 1.0 + tol {
            VariationLabel::Over
        } else if value < 1.0 - tol {
            VariationLabel::Under
        } else {
            VariationLabel::Equi
        };
        prop_assert_eq!(class.label, expected);
    }
}
