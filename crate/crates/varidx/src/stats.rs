//! Small order-statistics helpers shared across modules.

/// Linear-interpolation quantile (type 7) of an ascending-sorted slice.
///
/// `sorted` must be nonempty and sorted; `p` is clamped to [0, 1].
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Unbiased sample standard deviation (divisor n − 1); 0 for n < 2.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (ss / (n - 1) as f64).sqrt()
}

/// Median of an ascending-sorted slice.
pub fn median_sorted(sorted: &[f64]) -> f64 {
    quantile_type7(sorted, 0.5)
}

/// One-sample Kolmogorov–Smirnov statistic of an ascending-sorted sample
/// against a continuous CDF: `sup_x |F_n(x) − F(x)|`, taking both sides
/// of each jump of the empirical CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(quantile_type7(&xs, 0.0), 1.0);
        assert_abs_diff_eq!(quantile_type7(&xs, 1.0), 4.0);
        assert_abs_diff_eq!(quantile_type7(&xs, 0.5), 2.5);
        assert_abs_diff_eq!(quantile_type7(&xs, 0.25), 1.75);
    }

    #[test]
    fn quantile_single_element() {
        assert_abs_diff_eq!(quantile_type7(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn sd_matches_hand_value() {
        // Sample {2, 4, 4, 4, 5, 5, 7, 9}: variance 32/7.
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_abs_diff_eq!(sample_sd(&xs), (32.0f64 / 7.0).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn sd_degenerate_inputs() {
        assert_eq!(sample_sd(&[]), 0.0);
        assert_eq!(sample_sd(&[3.0]), 0.0);
        assert_eq!(sample_sd(&[3.0, 3.0, 3.0]), 0.0);
    }

    #[test]
    fn ks_statistic_hand_values() {
        // Midpoint grid against the uniform CDF: every jump straddles F
        // symmetrically, so D = 1/(2n).
        let xs = [0.125, 0.375, 0.625, 0.875];
        assert_abs_diff_eq!(ks_statistic(&xs, |x| x), 0.125, epsilon = 1e-15);
        // Single point at 0.9: sup = max(0.9 − 0, 1 − 0.9) = 0.9.
        assert_abs_diff_eq!(ks_statistic(&[0.9], |x| x), 0.9, epsilon = 1e-15);
    }
}
