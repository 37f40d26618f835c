//! Datasets, moment summaries, and the augmented second-moment machinery.
//!
//! A [`Dataset`] is an n × k matrix of strictly positive observations.
//! [`summarize`] reduces it to a [`MomentSummary`] (sample mean and
//! unbiased covariance), the common currency of every index computation.
//! [`augmented_moments`] extends the same two-pass covariance pass to the
//! augmented vectors needed by the delta-method variances: `Z` stacks the
//! observation with the upper triangle of its outer product, `W` stacks it
//! with its elementwise square. The top-left k × k block of either
//! augmented covariance is computed by the same code path as the plain
//! covariance, so the blocks agree bitwise.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly positive n × k observation matrix with optional column names.
#[derive(Debug, Clone)]
pub struct Dataset {
    values: DMatrix<f64>,
    names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates entries (finite, strictly positive) and shape (n ≥ 2, k ≥ 1).
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "dataset must have at least one column".into(),
            ));
        }
        if values.nrows() < 2 {
            return Err(Error::InsufficientSample {
                needed: 2,
                found: values.nrows(),
            });
        }
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: i + 1,
                        column: j + 1,
                        message: format!("value {v} is not finite"),
                    });
                }
                if v <= 0.0 {
                    return Err(Error::NonpositiveValue {
                        line: i + 1,
                        column: j + 1,
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            values,
            names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                self.values.ncols()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of coordinates.
    pub fn k(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.values.row(i).transpose()
    }

    /// New dataset built from the given row indices (bootstrap resampling).
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut out = DMatrix::zeros(indices.len(), k);
        for (r, &i) in indices.iter().enumerate() {
            if i >= self.n() {
                return Err(Error::DimensionMismatch(format!(
                    "row index {i} out of range for {} rows",
                    self.n()
                )));
            }
            for j in 0..k {
                out[(r, j)] = self.values[(i, j)];
            }
        }
        Dataset::new(out)
    }
}

/// Mean vector and covariance matrix, with the sample size when the
/// summary came from data (`None` for analytic summaries).
#[derive(Debug, Clone)]
pub struct MomentSummary {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    n: Option<usize>,
}

/// Relative asymmetry allowed in covariance input.
const SYMMETRY_RTOL: f64 = 1e-12;
/// Relative eigenvalue droop allowed before a covariance is rejected as
/// not positive semidefinite.
const PSD_RTOL: f64 = 1e-10;

impl MomentSummary {
    /// Validates positivity of the mean, symmetry and positive
    /// semidefiniteness of the covariance (within numerical slack).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, n: Option<usize>) -> Result<Self> {
        let k = mean.len();
        if k == 0 {
            return Err(Error::InvalidMoments("empty mean vector".into()));
        }
        if cov.nrows() != k || cov.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "mean has {} entries but covariance is {}x{}",
                k,
                cov.nrows(),
                cov.ncols()
            )));
        }
        if let Some(n) = n {
            if n < 2 {
                return Err(Error::InsufficientSample { needed: 2, found: n });
            }
        }
        for (j, &m) in mean.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidMoments(format!(
                    "mean coordinate {} is {m}, must be finite and positive",
                    j + 1
                )));
            }
        }
        let scale = cov.amax();
        if !scale.is_finite() {
            return Err(Error::InvalidMoments("covariance has non-finite entries".into()));
        }
        for i in 0..k {
            if cov[(i, i)] < 0.0 {
                return Err(Error::InvalidMoments(format!(
                    "negative variance {} in coordinate {}",
                    cov[(i, i)],
                    i + 1
                )));
            }
            for j in (i + 1)..k {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_RTOL * scale.max(1.0) {
                    return Err(Error::InvalidMoments(format!(
                        "covariance not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if scale > 0.0 {
            let eigs = nalgebra::SymmetricEigen::new(cov.clone()).eigenvalues;
            let max_abs = eigs.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
            let min = eigs.iter().fold(f64::INFINITY, |a, &e| a.min(e));
            if min < -PSD_RTOL * max_abs {
                return Err(Error::InvalidMoments(format!(
                    "covariance not positive semidefinite (eigenvalue {min:.3e})"
                )));
            }
        }
        Ok(Self { mean, cov, n })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn n(&self) -> Option<usize> {
        self.n
    }

    pub fn k(&self) -> usize {
        self.mean.len()
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = MomentSummaryRaw {
            mean: self.mean.iter().copied().collect(),
            cov: (0..self.k())
                .map(|i| (0..self.k()).map(|j| self.cov[(i, j)]).collect())
                .collect(),
            n: self.n,
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: MomentSummaryRaw = serde_json::from_str(json)?;
        let k = raw.mean.len();
        if raw.cov.len() != k || raw.cov.iter().any(|row| row.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "covariance rows do not form a {k}x{k} matrix"
            )));
        }
        let mean = DVector::from_vec(raw.mean);
        let cov = DMatrix::from_fn(k, k, |i, j| raw.cov[i][j]);
        MomentSummary::new(mean, cov, raw.n)
    }
}

#[derive(Serialize, Deserialize)]
struct MomentSummaryRaw {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
}

/// Unbiased covariances of the two delta-method augmentations.
///
/// `gamma` is the covariance of `Z = (Y₁..Y_k, Y₁Y₁, Y₁Y₂, .., Y_kY_k)`
/// with product pairs in [`pair_indices`] order; `pi` is the covariance of
/// `W = (Y₁..Y_k, Y₁², .., Y_k²)`.
#[derive(Debug, Clone)]
pub struct AugmentedMoments {
    pub gamma: DMatrix<f64>,
    pub pi: DMatrix<f64>,
}

/// Upper-triangle pair ordering `(0,0), (0,1), .., (0,k−1), (1,1), ..`
/// used for the product block of the `Z` augmentation and for the
/// covariance half of delta-method gradients.
pub fn pair_indices(k: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Loads a comma-separated file of positive decimals into a [`Dataset`].
///
/// With `has_header` the first line supplies column names. Errors name the
/// offending 1-based file line and column.
pub fn load_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, has_header)
}

fn parse_csv(text: &str, has_header: bool) -> Result<Dataset> {
    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut data_line_of: Vec<usize> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if has_header && names.is_none() && rows.is_empty() {
            names = Some(cells.iter().map(|c| c.trim().to_string()).collect());
            width = Some(cells.len());
            continue;
        }
        if let Some(w) = width {
            if cells.len() != w {
                return Err(Error::RaggedRow {
                    line: line_no,
                    expected: w,
                    found: cells.len(),
                });
            }
        } else {
            width = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            let trimmed = cell.trim();
            let value: f64 = trimmed.parse().map_err(|_| Error::Parse {
                line: line_no,
                column: j + 1,
                message: format!("cannot parse {trimmed:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    column: j + 1,
                    message: format!("value {trimmed:?} is not finite"),
                });
            }
            if value <= 0.0 {
                return Err(Error::NonpositiveValue {
                    line: line_no,
                    column: j + 1,
                    value,
                });
            }
            row.push(value);
        }
        data_line_of.push(line_no);
        rows.push(row);
    }

    let k = width.ok_or_else(|| Error::InsufficientSample { needed: 2, found: 0 })?;
    if rows.len() < 2 {
        return Err(Error::InsufficientSample {
            needed: 2,
            found: rows.len(),
        });
    }
    let n = rows.len();
    let values = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let ds = Dataset::new(values)?;
    match names {
        Some(names) => ds.with_names(names),
        None => Ok(ds),
    }
}

/// Sample mean and unbiased covariance of the dataset.
pub fn summarize(data: &Dataset) -> Result<MomentSummary> {
    let (mean, cov) = mean_and_cov(data.values());
    MomentSummary::new(mean, cov, Some(data.n()))
}

/// Two-pass mean and unbiased covariance of a column-variable matrix.
///
/// Shared by [`summarize`] and [`augmented_moments`]: identical code path
/// guarantees the augmented covariances' top-left blocks match the plain
/// covariance bitwise.
fn mean_and_cov(x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.nrows();
    let d = x.ncols();
    let nf = n as f64;
    let mut mean = DVector::zeros(d);
    for j in 0..d {
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[(i, j)];
        }
        mean[j] = acc / nf;
    }
    let mut cov = DMatrix::zeros(d, d);
    let denom = nf - 1.0;
    for a in 0..d {
        for b in a..d {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (x[(i, a)] - mean[a]) * (x[(i, b)] - mean[b]);
            }
            let v = acc / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// Correlation matrix from a moment summary.
///
/// Errors if any coordinate has zero variance. Entries are clamped to
/// [−1, 1] only when the overshoot is at most 1e-12; larger overshoots are
/// left in place so inconsistent input stays visible.
pub fn correlation_from_cov(summary: &MomentSummary) -> Result<DMatrix<f64>> {
    let k = summary.k();
    let cov = summary.cov();
    let mut sd = Vec::with_capacity(k);
    for j in 0..k {
        let v = cov[(j, j)];
        if v <= 0.0 {
            return Err(Error::DegenerateMarginal { coord: j + 1 });
        }
        sd.push(v.sqrt());
    }
    let mut corr = DMatrix::zeros(k, k);
    for i in 0..k {
        corr[(i, i)] = 1.0;
        for j in (i + 1)..k {
            let mut r = cov[(i, j)] / (sd[i] * sd[j]);
            if r.abs() > 1.0 && r.abs() <= 1.0 + 1e-12 {
                r = r.signum();
            }
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }
    Ok(corr)
}

/// Augmented-moment covariances `Γ` (products) and `Π` (squares) for the
/// delta-method variances, estimated as unbiased sample covariances of the
/// augmented observation vectors.
pub fn augmented_moments(data: &Dataset) -> Result<AugmentedMoments> {
    let n = data.n();
    let k = data.k();
    let x = data.values();
    let pairs = pair_indices(k);

    // Z block: original coordinates followed by upper-triangle products.
    let mut z = DMatrix::zeros(n, k + pairs.len());
    // W block: original coordinates followed by elementwise squares.
    let mut w = DMatrix::zeros(n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            z[(i, j)] = x[(i, j)];
            w[(i, j)] = x[(i, j)];
            w[(i, k + j)] = x[(i, j)] * x[(i, j)];
        }
        for (p, &(a, b)) in pairs.iter().enumerate() {
            z[(i, k + p)] = x[(i, a)] * x[(i, b)];
        }
    }
    for m in [&z, &w] {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::MagnitudeOverflow);
        }
    }

    let (_, gamma) = mean_and_cov(&z);
    let (_, pi) = mean_and_cov(&w);
    if !gamma.iter().all(|v| v.is_finite()) || !pi.iter().all(|v| v.is_finite()) {
        return Err(Error::MagnitudeOverflow);
    }
    Ok(AugmentedMoments { gamma, pi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy_dataset() -> Dataset {
        // Hand-checkable 4 x 2 sample.
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 5.0, 4.0, 9.0]);
        Dataset::new(m).unwrap()
    }

    #[test]
    fn summarize_matches_hand_computation() {
        let s = summarize(&toy_dataset()).unwrap();
        assert_abs_diff_eq!(s.mean()[0], 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean()[1], 5.0, epsilon = 1e-15);
        // Centered sums: Sxx = 5, Syy = 26, Sxy = 11; divisor 3.
        assert_abs_diff_eq!(s.cov()[(0, 0)], 5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov()[(1, 1)], 26.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov()[(0, 1)], 11.0 / 3.0, epsilon = 1e-14);
        assert_eq!(s.n(), Some(4));
    }

    #[test]
    fn dataset_rejects_nonpositive_and_short_input() {
        let zero = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        assert!(matches!(
            Dataset::new(zero),
            Err(Error::NonpositiveValue { line: 2, column: 1, .. })
        ));
        let short = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(
            Dataset::new(short),
            Err(Error::InsufficientSample { found: 1, .. })
        ));
    }

    #[test]
    fn csv_parses_with_and_without_header(){
        let with = "a,b\n1.0,2.0\n3.5,4.5\n";
        let ds = parse_csv(with, true).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.names().unwrap(), ["a".to_string(), "b".to_string()]);
        let without = "1.0,2.0\n3.5,4.5\n";
        let ds = parse_csv(without, false).unwrap();
        assert_eq!(ds.n(), 2);
        assert!(ds.names().is_none());
        assert_abs_diff_eq!(ds.values()[(1, 0)], 3.5);
    }

    #[test]
    fn csv_names_offending_cells() {
        assert!(matches!(
            parse_csv("1.0,2.0\n3.0\n", false),
            Err(Error::RaggedRow { line: 2, expected: 2, found: 1 })
        ));
        assert!(matches!(
            parse_csv("1.0,2.0\n3.0,oops\n", false),
            Err(Error::Parse { line: 2, column: 2, .. })
        ));
        assert!(matches!(
            parse_csv("1.0,2.0\n3.0,-4.0\n", false),
            Err(Error::NonpositiveValue { line: 2, column: 2, .. })
        ));
        // "inf" parses as f64 infinity but is not admissible data.
        assert!(matches!(
            parse_csv("1.0,inf\n3.0,4.0\n", false),
            Err(Error::Parse { line: 1, column: 2, .. })
        ));
    }

    #[test]
    fn csv_single_row_is_insufficient() {
        assert!(matches!(
            parse_csv("1.0,2.0\n", false),
            Err(Error::InsufficientSample { found: 1, .. })
        ));
    }

    #[test]
    fn pair_ordering_is_row_major_upper_triangle() {
        assert_eq!(
            pair_indices(3),
            vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
        );
    }

    #[test]
    fn augmented_blocks_match_covariance_bitwise() {
        let ds = toy_dataset();
        let s = summarize(&ds).unwrap();
        let aug = augmented_moments(&ds).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                // Bitwise, not approximate: same code path must produce both.
                assert_eq!(s.cov()[(i, j)].to_bits(), aug.gamma[(i, j)].to_bits());
                assert_eq!(s.cov()[(i, j)].to_bits(), aug.pi[(i, j)].to_bits());
            }
        }
        assert_eq!(aug.gamma.nrows(), 2 + 3);
        assert_eq!(aug.pi.nrows(), 4);
    }

    #[test]
    fn augmented_univariate_matches_raw_moment_identities() {
        // For k = 1 the Γ entries are the unbiased covariances of (Y, Y²).
        let m = DMatrix::from_row_slice(5, 1, &[1.0, 2.0, 3.0, 4.0, 10.0]);
        let ds = Dataset::new(m).unwrap();
        let aug = augmented_moments(&ds).unwrap();
        let ys = [1.0, 2.0, 3.0, 4.0, 10.0];
        let y2: Vec<f64> = ys.iter().map(|y| y * y).collect();
        let my = ys.iter().sum::<f64>() / 5.0;
        let my2 = y2.iter().sum::<f64>() / 5.0;
        let cov = ys
            .iter()
            .zip(&y2)
            .map(|(a, b)| (a - my) * (b - my2))
            .sum::<f64>()
            / 4.0;
        assert_abs_diff_eq!(aug.gamma[(0, 1)], cov, epsilon = 1e-10);
        assert_abs_diff_eq!(aug.pi[(0, 1)], cov, epsilon = 1e-10);
    }

    #[test]
    fn augmented_overflow_is_reported() {
        let m = DMatrix::from_row_slice(2, 1, &[1e200, 2e200]);
        let ds = Dataset::new(m).unwrap();
        assert!(matches!(
            augmented_moments(&ds),
            Err(Error::MagnitudeOverflow)
        ));
    }

    #[test]
    fn correlation_round_trip_and_clamping() {
        let s = summarize(&toy_dataset()).unwrap();
        let corr = correlation_from_cov(&s).unwrap();
        assert_abs_diff_eq!(corr[(0, 0)], 1.0);
        let expected = 11.0 / (5.0f64 * 26.0).sqrt();
        assert_abs_diff_eq!(corr[(0, 1)], expected, epsilon = 1e-14);
        assert_abs_diff_eq!(corr[(1, 0)], expected, epsilon = 1e-14);
    }

    #[test]
    fn correlation_rejects_zero_variance() {
        let mean = DVector::from_vec(vec![1.0, 2.0]);
        let cov = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 4.0]);
        let s = MomentSummary::new(mean, cov, None).unwrap();
        assert!(matches!(
            correlation_from_cov(&s),
            Err(Error::DegenerateMarginal { coord: 1 })
        ));
    }

    #[test]
    fn moment_summary_validation() {
        let mean = DVector::from_vec(vec![1.0, 2.0]);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(MomentSummary::new(mean.clone(), asym, None).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(MomentSummary::new(mean.clone(), indefinite, None).is_err());
        let negative_mean = DVector::from_vec(vec![-1.0, 2.0]);
        let ok_cov = DMatrix::identity(2, 2);
        assert!(MomentSummary::new(negative_mean, ok_cov.clone(), None).is_err());
        assert!(MomentSummary::new(mean, ok_cov, None).is_ok());
    }

    #[test]
    fn moment_summary_json_round_trip() {
        let mean = DVector::from_vec(vec![1.5, 2.5]);
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = MomentSummary::new(mean, cov, Some(42)).unwrap();
        let json = s.to_json().unwrap();
        let back = MomentSummary::from_json(&json).unwrap();
        assert_eq!(back.n(), Some(42));
        assert_abs_diff_eq!(back.mean()[1], 2.5);
        assert_abs_diff_eq!(back.cov()[(0, 1)], 0.5);
        // Analytic summaries omit n entirely.
        let s2 = MomentSummary::new(
            DVector::from_vec(vec![1.0]),
            DMatrix::from_element(1, 1, 1.0),
            None,
        )
        .unwrap();
        assert!(!s2.to_json().unwrap().contains("\"n\""));
    }

    #[test]
    fn select_rows_resamples() {
        let ds = toy_dataset();
        let sub = ds.select_rows(&[3, 3, 0]).unwrap();
        assert_eq!(sub.n(), 3);
        assert_abs_diff_eq!(sub.values()[(0, 1)], 9.0);
        assert_abs_diff_eq!(sub.values()[(2, 0)], 1.0);
        assert!(ds.select_rows(&[9]).is_err());
    }
}
