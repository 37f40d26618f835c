//! Dataset analysis report: assembly, JSON schema, and text rendering.
//!
//! The JSON form carries full-precision numbers under a versioned
//! schema; the text form prints the same numbers rounded to a chosen
//! count of significant digits. Rounding happens only at display time,
//! so a value shown in text always equals its JSON counterpart pushed
//! through [`fmt_sig`].

use serde::Serialize;
use varidx::asymptotics::{asymptotic_ci, sigma2_gvi, sigma2_mvi, ConfidenceInterval};
use varidx::data::correlation_from_cov;
use varidx::indexes::{classify, IndexKind, IndexValue, VariationClass};
use varidx::resampling::{bootstrap_indexes, BootstrapResult};
use varidx::{summarize, Dataset, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to `digits` significant decimal digits (half away from zero).
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits as i32 - 1 - mag);
    (x * scale).round() / scale
}

/// Shortest decimal rendering after significant-digit rounding.
pub fn fmt_sig(x: f64, digits: u32) -> String {
    format!("{}", round_sig(x, digits))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CiReport {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl From<ConfidenceInterval> for CiReport {
    fn from(ci: ConfidenceInterval) -> Self {
        Self {
            lower: ci.lower,
            upper: ci.upper,
            level: ci.level,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassReport {
    pub label: &'static str,
    pub tolerance: f64,
}

impl From<VariationClass> for ClassReport {
    fn from(c: VariationClass) -> Self {
        Self {
            label: c.label.as_str(),
            tolerance: c.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginReport {
    pub name: String,
    pub mean: f64,
    pub variance: f64,
    pub vi: f64,
    pub class: ClassReport,
}

/// Bootstrap block of the report; replicate vectors are summarized
/// away, only the derived quantities are published.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapReport {
    pub replicates: usize,
    pub seed: u64,
    pub degenerate_resamples: usize,
    pub se_gvi: f64,
    pub se_mvi: f64,
    pub normal_ci_gvi: CiReport,
    pub normal_ci_mvi: CiReport,
    pub percentile_ci_gvi: CiReport,
    pub percentile_ci_mvi: CiReport,
}

impl From<&BootstrapResult> for BootstrapReport {
    fn from(b: &BootstrapResult) -> Self {
        Self {
            replicates: b.replicates,
            seed: b.seed,
            degenerate_resamples: b.degenerate_resamples,
            se_gvi: b.se_gvi,
            se_mvi: b.se_mvi,
            normal_ci_gvi: b.normal_ci_gvi.into(),
            normal_ci_mvi: b.normal_ci_mvi.into(),
            percentile_ci_gvi: b.percentile_ci_gvi.into(),
            percentile_ci_mvi: b.percentile_ci_mvi.into(),
        }
    }
}

/// Full analysis of one dataset: moments, correlation structure, both
/// indexes with delta-method uncertainty, optional bootstrap, and
/// per-margin classifications.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub schema_version: u32,
    pub n: usize,
    pub k: usize,
    pub mean: Vec<f64>,
    pub corr: Vec<Vec<f64>>,
    pub det_corr: f64,
    pub gvi: f64,
    pub mvi: f64,
    pub se_gvi: f64,
    pub se_mvi: f64,
    pub ci_gvi: CiReport,
    pub ci_mvi: CiReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapReport>,
    pub per_margin: Vec<MarginReport>,
    pub classification_gvi: ClassReport,
    pub classification_mvi: ClassReport,
}

impl IndexReport {
    /// Builds the report. `bootstrap` carries `(replicates, seed)` when
    /// resampling was requested.
    pub fn from_dataset(
        data: &Dataset,
        level: f64,
        tol: f64,
        bootstrap: Option<(usize, u64)>,
    ) -> Result<Self> {
        let n = data.n();
        let k = data.k();
        let summary = summarize(data)?;
        let corr = correlation_from_cov(&summary)?;
        let det_corr = corr.clone().lu().determinant();

        let g = sigma2_gvi(data)?;
        let m = sigma2_mvi(data)?;
        let ci_g = asymptotic_ci(g.estimate, g.sigma2, n, level)?;
        let ci_m = asymptotic_ci(m.estimate, m.sigma2, n, level)?;

        let names: Vec<String> = match data.names() {
            Some(names) => names.to_vec(),
            None => (1..=k).map(|j| format!("y{j}")).collect(),
        };
        let mut per_margin = Vec::with_capacity(k);
        for j in 0..k {
            let mean_j = summary.mean()[j];
            let var_j = summary.cov()[(j, j)];
            let vi_j = var_j / (mean_j * mean_j);
            let class = classify(&IndexValue::new(vi_j, IndexKind::MarginalVi)?, tol)?;
            per_margin.push(MarginReport {
                name: names[j].clone(),
                mean: mean_j,
                variance: var_j,
                vi: vi_j,
                class: class.into(),
            });
        }

        let boot = match bootstrap {
            Some((replicates, seed)) => {
                Some((&bootstrap_indexes(data, replicates, seed, level)?).into())
            }
            None => None,
        };

        Ok(Self {
            schema_version: SCHEMA_VERSION,
            n,
            k,
            mean: summary.mean().iter().copied().collect(),
            corr: (0..k)
                .map(|i| (0..k).map(|j| corr[(i, j)]).collect())
                .collect(),
            det_corr,
            gvi: g.estimate,
            mvi: m.estimate,
            se_gvi: (g.sigma2 / n as f64).sqrt(),
            se_mvi: (m.sigma2 / n as f64).sqrt(),
            ci_gvi: ci_g.into(),
            ci_mvi: ci_m.into(),
            bootstrap: boot,
            per_margin,
            classification_gvi: classify(&IndexValue::new(g.estimate, IndexKind::Gvi)?, tol)?
                .into(),
            classification_mvi: classify(&IndexValue::new(m.estimate, IndexKind::Mvi)?, tol)?
                .into(),
        })
    }

    /// Tabular text: per-margin summary block, correlation matrix, then
    /// the joint indexes with their uncertainty.
    pub fn render_text(&self, digits: u32) -> String {
        let w = digits as usize + 8;
        let mut out = String::new();
        out.push_str(&format!("n = {}  k = {}\n", self.n, self.k));
        if self.k == 1 {
            out.push_str("note: k = 1, gvi and mvi both reduce to the univariate vi\n");
        }

        let label_w = 12;
        let mut row = |label: &str, cells: Vec<String>| {
            let mut line = format!("{label:label_w$}");
            for c in cells {
                line.push_str(&format!("{c:>w$}"));
            }
            line.push('\n');
            out.push_str(&line);
        };
        row(
            "margin",
            self.per_margin.iter().map(|m| m.name.clone()).collect(),
        );
        row(
            "mean",
            self.per_margin
                .iter()
                .map(|m| fmt_sig(m.mean, digits))
                .collect(),
        );
        row(
            "variance",
            self.per_margin
                .iter()
                .map(|m| fmt_sig(m.variance, digits))
                .collect(),
        );
        row(
            "vi",
            self.per_margin
                .iter()
                .map(|m| fmt_sig(m.vi, digits))
                .collect(),
        );
        row(
            "class",
            self.per_margin
                .iter()
                .map(|m| m.class.label.to_string())
                .collect(),
        );

        out.push_str("correlation\n");
        for i in 0..self.k {
            let mut line = String::from("            ");
            for j in 0..self.k {
                line.push_str(&format!("{:>w$}", fmt_sig(self.corr[i][j], digits)));
            }
            line.push('\n');
            out.push_str(&line);
        }
        out.push_str(&format!("det_corr = {}\n", fmt_sig(self.det_corr, digits)));

        let index_line = |name: &str, value: f64, class: &ClassReport, se: f64, ci: &CiReport| {
            format!(
                "{name} = {}  ({})  se = {}  {}% ci = [{}, {}]\n",
                fmt_sig(value, digits),
                class.label,
                fmt_sig(se, digits),
                fmt_sig(100.0 * ci.level, digits),
                fmt_sig(ci.lower, digits),
                fmt_sig(ci.upper, digits),
            )
        };
        out.push_str(&index_line(
            "gvi",
            self.gvi,
            &self.classification_gvi,
            self.se_gvi,
            &self.ci_gvi,
        ));
        out.push_str(&index_line(
            "mvi",
            self.mvi,
            &self.classification_mvi,
            self.se_mvi,
            &self.ci_mvi,
        ));

        if let Some(b) = &self.bootstrap {
            out.push_str(&format!(
                "bootstrap: B = {}, seed = {}, degenerate = {}\n",
                b.replicates, b.seed, b.degenerate_resamples
            ));
            out.push_str(&format!(
                "  se_gvi = {}  se_mvi = {}\n",
                fmt_sig(b.se_gvi, digits),
                fmt_sig(b.se_mvi, digits)
            ));
            out.push_str(&format!(
                "  normal ci: gvi = [{}, {}]  mvi = [{}, {}]\n",
                fmt_sig(b.normal_ci_gvi.lower, digits),
                fmt_sig(b.normal_ci_gvi.upper, digits),
                fmt_sig(b.normal_ci_mvi.lower, digits),
                fmt_sig(b.normal_ci_mvi.upper, digits)
            ));
            out.push_str(&format!(
                "  percentile ci: gvi = [{}, {}]  mvi = [{}, {}]\n",
                fmt_sig(b.percentile_ci_gvi.lower, digits),
                fmt_sig(b.percentile_ci_gvi.upper, digits),
                fmt_sig(b.percentile_ci_mvi.lower, digits),
                fmt_sig(b.percentile_ci_mvi.upper, digits)
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn rounding_keeps_significant_digits() {
        assert_eq!(round_sig(0.13973100512, 6), 0.139731);
        assert_eq!(round_sig(184755.4, 6), 184755.0);
        assert_eq!(round_sig(-0.000955136, 3), -0.000955);
        assert_eq!(round_sig(0.0, 6), 0.0);
        assert_eq!(fmt_sig(2.0 / 3.0, 4), "0.6667");
    }

    fn toy_dataset() -> Dataset {
        let values = DMatrix::from_row_slice(6, 2, &[
            1.0, 2.0, //
            2.0, 3.0, //
            3.0, 5.0, //
            4.0, 4.0, //
            2.5, 3.5, //
            3.5, 6.0,
        ]);
        Dataset::new(values).unwrap()
    }

    #[test]
    fn report_invariants_hold() {
        let report = IndexReport::from_dataset(&toy_dataset(), 0.95, 0.05, None).unwrap();
        assert_eq!(report.schema_version, 1);
        assert_eq!((report.n, report.k), (6, 2));
        // CI bounds consistent with estimate and se at the 97.5% point.
        let u = 1.959963984540054;
        assert_abs_diff_eq!(report.ci_gvi.lower, report.gvi - u * report.se_gvi, epsilon = 1e-12);
        assert_abs_diff_eq!(report.ci_gvi.upper, report.gvi + u * report.se_gvi, epsilon = 1e-12);
        // det_corr against the 2x2 closed form.
        let r = report.corr[0][1];
        assert_abs_diff_eq!(report.det_corr, 1.0 - r * r, epsilon = 1e-12);
        assert_eq!(report.per_margin.len(), 2);
    }

    #[test]
    fn text_mirrors_json_numbers() {
        let report = IndexReport::from_dataset(&toy_dataset(), 0.95, 0.05, Some((50, 3))).unwrap();
        let text = report.render_text(6);
        assert!(text.contains(&format!("gvi = {}", fmt_sig(report.gvi, 6))));
        assert!(text.contains(&format!("det_corr = {}", fmt_sig(report.det_corr, 6))));
        assert!(text.contains("bootstrap: B = 50, seed = 3"));
        let json = report.to_json().unwrap();
        assert!(json.contains("\"schema_version\": 1"));
    }
}
