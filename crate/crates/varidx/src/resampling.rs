//! Nonparametric bootstrap for the variation indexes.
//!
//! Rows are resampled with replacement; each replicate's GVI and MVI are
//! computed by the same code path as the point estimates. Replicates run
//! in parallel but each one draws from its own seed substream, so results
//! are identical for any thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::asymptotics::ConfidenceInterval;
use crate::data::{summarize, Dataset};
use crate::error::{Error, Result};
use crate::indexes::{gvi, mvi};
use crate::normal::standard_normal_quantile;
use crate::rng::stream_rng;
use crate::stats::{quantile_type7, sample_sd};

/// Default number of bootstrap resamples.
pub const DEFAULT_REPLICATES: usize = 1000;

/// Bootstrap standard errors and intervals for GVI and MVI.
///
/// Both interval constructions are reported: `normal_*` uses the
/// replicate standard error around the point estimate, `percentile_*`
/// uses replicate quantiles.
#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub gvi_estimate: f64,
    pub mvi_estimate: f64,
    pub se_gvi: f64,
    pub se_mvi: f64,
    pub normal_ci_gvi: ConfidenceInterval,
    pub normal_ci_mvi: ConfidenceInterval,
    pub percentile_ci_gvi: ConfidenceInterval,
    pub percentile_ci_mvi: ConfidenceInterval,
    pub replicates: usize,
    pub seed: u64,
    /// Resamples whose covariance matrix was exactly zero; these
    /// contribute index value 0.
    pub degenerate_resamples: usize,
    pub gvi_replicates: Vec<f64>,
    pub mvi_replicates: Vec<f64>,
}

/// Runs `replicates` bootstrap resamples of `data` at the given seed and
/// confidence level.
///
/// Errors if more than 10% of resamples are degenerate while the input
/// itself is not (a degenerate input flows through with zero standard
/// errors rather than erroring).
pub fn bootstrap_indexes(
    data: &Dataset,
    replicates: usize,
    seed: u64,
    level: f64,
) -> Result<BootstrapResult> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bootstrap replicates, got {replicates}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let summary = summarize(data)?;
    let gvi_hat = gvi(&summary)?.value();
    let mvi_hat = mvi(&summary)?.value();
    let input_degenerate = summary.cov().amax() == 0.0;
    let n = data.n();

    let draws: Vec<Result<(f64, f64, bool)>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let resample = data.select_rows(&indices)?;
            let s = summarize(&resample)?;
            let degenerate = s.cov().amax() == 0.0;
            Ok((gvi(&s)?.value(), mvi(&s)?.value(), degenerate))
        })
        .collect();

    let mut gvi_vals = Vec::with_capacity(replicates);
    let mut mvi_vals = Vec::with_capacity(replicates);
    let mut degenerate = 0usize;
    for d in draws {
        let (g, m, is_degenerate) = d?;
        gvi_vals.push(g);
        mvi_vals.push(m);
        if is_degenerate {
            degenerate += 1;
        }
    }
    if !input_degenerate && degenerate * 10 > replicates {
        return Err(Error::DegenerateBootstrap {
            degenerate,
            total: replicates,
        });
    }

    let se_gvi = sample_sd(&gvi_vals);
    let se_mvi = sample_sd(&mvi_vals);
    let u = standard_normal_quantile(0.5 + level / 2.0)?;
    let normal_ci = |estimate: f64, se: f64| ConfidenceInterval {
        lower: estimate - u * se,
        upper: estimate + u * se,
        level,
    };
    let percentile_ci = |values: &[f64]| {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        ConfidenceInterval {
            lower: quantile_type7(&sorted, (1.0 - level) / 2.0),
            upper: quantile_type7(&sorted, (1.0 + level) / 2.0),
            level,
        }
    };

    Ok(BootstrapResult {
        gvi_estimate: gvi_hat,
        mvi_estimate: mvi_hat,
        se_gvi,
        se_mvi,
        normal_ci_gvi: normal_ci(gvi_hat, se_gvi),
        normal_ci_mvi: normal_ci(mvi_hat, se_mvi),
        percentile_ci_gvi: percentile_ci(&gvi_vals),
        percentile_ci_mvi: percentile_ci(&mvi_vals),
        replicates,
        seed,
        degenerate_resamples: degenerate,
        gvi_replicates: gvi_vals,
        mvi_replicates: mvi_vals,
    })
}
