//! The four subcommands: analyze, family, simulate, convergence.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::json;

use varidx::asymptotics::{sigma2_gvi, sigma2_mvi};
use varidx::data::correlation_from_cov;
use varidx::families::arnold_ng::{an_indexes_mc, an_margin_stats, ArnoldNgParams};
use varidx::families::exponential::{exp_excess_gvi, exp_moments, ExpFamilyParams};
use varidx::families::marshall_olkin::{mo_indexes, mo_moments, MarshallOlkinParams};
use varidx::families::mst::{mst_variance_function, MstParams};
use varidx::families::teimouri_gupta::{
    tg_indexes, tg_margin_stats, weibull_bathtub_ratio, weibull_vi, weibull_variation_class,
    TeimouriGuptaParams,
};
use varidx::families::tweedie::{tweedie_exp_corr_bounds, VariationMatrix};
use varidx::indexes::{classify, gvi, gvi_function, mvi, mvi_function};
use varidx::normal::standard_normal_quantile;
use varidx::norta::{NortaGenerator, ScenarioSpec};
use varidx::rng::derive_seed;
use varidx::stats::median_sorted;
use varidx::{load_csv, summarize, Dataset, Error, Result};

use crate::cli::{AnalyzeArgs, ConvergenceArgs, FamilyArgs, Format, SimulateArgs};
use crate::report::{fmt_sig, IndexReport, SCHEMA_VERSION};

/// Hard ceiling on `max size × replicates` for convergence studies.
const CONVERGENCE_BUDGET: u64 = 100_000_000;
/// Convergence interval level (the report command exposes `--level`;
/// the study tables are fixed at the conventional two-sided 95%).
const CONVERGENCE_LEVEL: f64 = 0.95;

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let data = load_csv(&args.input, args.has_header)?;
    let bootstrap = args.bootstrap.map(|b| (b, args.seed));
    let report = IndexReport::from_dataset(&data, args.level, args.tol, bootstrap)?;
    match args.format {
        Format::Text => print!("{}", report.render_text(args.precision)),
        Format::Json => println!("{}", report.to_json()?),
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut spec = read_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let generator = NortaGenerator::from_spec(&spec)?;
    let data = generator.sample(spec.n, spec.seed)?;
    write_dataset_csv(&args.output, &data)?;

    let summary = summarize(&data)?;
    let achieved = correlation_from_cov(&summary)?;
    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "scenario": spec,
        "gaussian_corr": matrix_rows(generator.gaussian_corr()),
        "repair_max_change": generator.repair_drift(),
        "achieved_corr": matrix_rows(&achieved),
    });
    let meta_path = sidecar_path(&args.output);
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| {
        Error::Io {
            path: meta_path.clone(),
            source: e,
        }
    })?;
    println!("wrote {} rows to {}", data.n(), args.output.display());
    println!("wrote metadata to {}", meta_path.display());
    Ok(())
}

pub fn convergence(args: &ConvergenceArgs) -> Result<()> {
    if args.sizes.is_empty() {
        return Err(Error::InvalidParameter("no sizes given".into()));
    }
    if args.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sizes must be strictly ascending".into(),
        ));
    }
    if args.replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be positive".into()));
    }
    let max_size = *args.sizes.last().unwrap() as u64;
    if max_size * args.replicates as u64 > CONVERGENCE_BUDGET {
        return Err(Error::InvalidParameter(format!(
            "study budget exceeded: {} x {} > {CONVERGENCE_BUDGET}",
            max_size, args.replicates
        )));
    }
    let spec = read_scenario(&args.scenario)?;
    let generator = NortaGenerator::from_spec(&spec)?;
    let u = standard_normal_quantile(0.5 + CONVERGENCE_LEVEL / 2.0)?;

    let mut summary_csv =
        String::from("n,det_corr,sigma2_gvi,sigma2_mvi,gvi,gvi_halfwidth,mvi,mvi_halfwidth\n");
    let mut long_csv = String::from("n,replicate,index,value\n");
    let mut stdout_rows = Vec::new();
    for (size_idx, &n) in args.sizes.iter().enumerate() {
        // Columns: det, sigma2 gvi/mvi, gvi, gvi halfwidth, mvi, mvi halfwidth.
        let mut cols: [Vec<f64>; 7] = Default::default();
        for r in 0..args.replicates {
            let rep_seed = derive_seed(
                args.seed,
                (size_idx * args.replicates + r) as u64,
            );
            let data = generator.sample(n, rep_seed)?;
            let summary = summarize(&data)?;
            let det = correlation_from_cov(&summary)?.lu().determinant();
            let g = sigma2_gvi(&data)?;
            let m = sigma2_mvi(&data)?;
            let g_half = u * (g.sigma2 / n as f64).sqrt();
            let m_half = u * (m.sigma2 / n as f64).sqrt();
            for (col, v) in cols.iter_mut().zip([
                det, g.sigma2, m.sigma2, g.estimate, g_half, m.estimate, m_half,
            ]) {
                col.push(v);
            }
            long_csv.push_str(&format!("{n},{r},gvi,{}\n", g.estimate));
            long_csv.push_str(&format!("{n},{r},mvi,{}\n", m.estimate));
        }
        let medians: Vec<f64> = cols
            .iter_mut()
            .map(|c| {
                c.sort_by(f64::total_cmp);
                median_sorted(c)
            })
            .collect();
        summary_csv.push_str(&format!(
            "{n},{},{},{},{},{},{},{}\n",
            medians[0], medians[1], medians[2], medians[3], medians[4], medians[5], medians[6]
        ));
        stdout_rows.push((n, medians));
    }

    let summary_path = PathBuf::from(format!("{}_summary.csv", args.output_prefix));
    let long_path = PathBuf::from(format!("{}_replicates.csv", args.output_prefix));
    fs::write(&summary_path, &summary_csv).map_err(|e| Error::Io {
        path: summary_path.clone(),
        source: e,
    })?;
    fs::write(&long_path, &long_csv).map_err(|e| Error::Io {
        path: long_path.clone(),
        source: e,
    })?;

    let digits = args.precision;
    println!(
        "convergence study: {} sizes x {} replicates (medians below)",
        args.sizes.len(),
        args.replicates
    );
    println!("{:>8}  {:>12}  {:>22}  {:>22}", "n", "det_corr", "gvi +- half", "mvi +- half");
    for (n, m) in &stdout_rows {
        println!(
            "{n:>8}  {:>12}  {:>12} +- {:<7}  {:>12} +- {:<7}",
            fmt_sig(m[0], digits),
            fmt_sig(m[3], digits),
            fmt_sig(m[4], digits),
            fmt_sig(m[5], digits),
            fmt_sig(m[6], digits),
        );
    }
    println!("wrote {} and {}", summary_path.display(), long_path.display());
    Ok(())
}

pub fn family(args: &FamilyArgs) -> Result<()> {
    let params_text = read_params_arg(&args.params)?;
    let (value, text) = match args.name.as_str() {
        "exponential" => family_exponential(&params_text, args)?,
        "mo" | "marshall-olkin" => family_mo(&params_text, args)?,
        "arnold-ng" => family_arnold_ng(&params_text, args)?,
        "teimouri-gupta" => family_teimouri_gupta(&params_text, args)?,
        "mst" => family_mst(&params_text, args)?,
        "weibull-margin" => family_weibull_margin(&params_text, args)?,
        "tweedie-bounds" => family_tweedie_bounds(&params_text, args)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown family {other:?}; expected one of exponential, mo, arnold-ng, \
                 teimouri-gupta, mst, weibull-margin, tweedie-bounds"
            )))
        }
    };
    match args.format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value)?),
    }
    Ok(())
}

type FamilyOutput = (serde_json::Value, String);

fn family_exponential(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        mu: Vec<f64>,
        rho: Vec<Vec<f64>>,
    }
    let p: In = serde_json::from_str(params)?;
    let k = p.mu.len();
    if p.rho.len() != k || p.rho.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch(format!("rho must be {k}x{k}")));
    }
    let fam = ExpFamilyParams::new(
        DVector::from_vec(p.mu),
        DMatrix::from_fn(k, k, |i, j| p.rho[i][j]),
    )?;
    let moments = exp_moments(&fam)?;
    let g = gvi(&moments)?;
    let v = mvi(&moments)?;
    let e = exp_excess_gvi(&fam)?;
    let class_excess = classify(&e, args.tol)?;
    let digits = args.precision;
    let text = format!(
        "family = exponential  k = {k}\n\
         mean: {}\n\
         gvi = {}  (canonical form)\n\
         mvi = {}  (canonical form)\n\
         excess_gvi = {}  (excess form)  class = {}\n",
        join_sig(moments.mean().iter(), digits),
        fmt_sig(g.value(), digits),
        fmt_sig(v.value(), digits),
        fmt_sig(e.value(), digits),
        class_excess.label.as_str(),
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "exponential",
        "mean": moments.mean().iter().copied().collect::<Vec<_>>(),
        "cov": matrix_rows(moments.cov()),
        "gvi": { "value": g.value(), "form": "canonical" },
        "mvi": { "value": v.value(), "form": "canonical" },
        "excess_gvi": {
            "value": e.value(),
            "form": "excess",
            "class": class_excess.label.as_str(),
        },
    });
    Ok((value, text))
}

fn family_mo(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        mu: Vec<f64>,
        mu0: f64,
    }
    let p: In = serde_json::from_str(params)?;
    let fam = MarshallOlkinParams::new(DVector::from_vec(p.mu), p.mu0)?;
    let moments = mo_moments(&fam)?;
    let idx = mo_indexes(&fam)?;
    let class_excess = classify(&idx.excess_gvi, args.tol)?;
    let digits = args.precision;
    let text = format!(
        "family = marshall-olkin  k = {}\n\
         mean: {}\n\
         gvi = {}  (canonical form)\n\
         mvi = {}  (canonical form)\n\
         excess_gvi = {}  (excess form)  class = {}\n",
        fam.k(),
        join_sig(moments.mean().iter(), digits),
        fmt_sig(idx.gvi.value(), digits),
        fmt_sig(idx.mvi.value(), digits),
        fmt_sig(idx.excess_gvi.value(), digits),
        class_excess.label.as_str(),
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "marshall-olkin",
        "mean": moments.mean().iter().copied().collect::<Vec<_>>(),
        "cov": matrix_rows(moments.cov()),
        "gvi": { "value": idx.gvi.value(), "form": "canonical" },
        "mvi": { "value": idx.mvi.value(), "form": "canonical" },
        "excess_gvi": {
            "value": idx.excess_gvi.value(),
            "form": "excess",
            "class": class_excess.label.as_str(),
        },
    });
    Ok((value, text))
}

fn family_arnold_ng(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        alpha0: f64,
        alpha1: f64,
        alpha2: f64,
        alpha1p: f64,
        alpha2p: f64,
    }
    let p: In = serde_json::from_str(params)?;
    let fam = ArnoldNgParams::new(p.alpha0, p.alpha1, p.alpha2, p.alpha1p, p.alpha2p)?;
    let margins = an_margin_stats(&fam)?;
    let mc = an_indexes_mc(&fam, args.n, args.seed)?;
    let digits = args.precision;
    let text = format!(
        "family = arnold-ng  k = 2\n\
         margin means (exact beta): {}\n\
         margin vis (exact beta): {}\n\
         gvi = {}  (monte-carlo, se {})\n\
         mvi = {}  (monte-carlo, se {})\n\
         rho = {}  (monte-carlo, n = {}, seed = {})\n",
        join_sig(margins.iter().map(|m| &m.mean), digits),
        join_sig(margins.iter().map(|m| &m.vi), digits),
        fmt_sig(mc.gvi.value(), digits),
        fmt_sig(mc.mc_se_gvi, digits),
        fmt_sig(mc.mvi.value(), digits),
        fmt_sig(mc.mc_se_mvi, digits),
        fmt_sig(mc.rho, digits),
        args.n,
        args.seed,
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "arnold-ng",
        "margin_mean": margins.iter().map(|m| m.mean).collect::<Vec<_>>(),
        "margin_vi": margins.iter().map(|m| m.vi).collect::<Vec<_>>(),
        "gvi": { "value": mc.gvi.value(), "form": "monte-carlo", "se": mc.mc_se_gvi },
        "mvi": { "value": mc.mvi.value(), "form": "monte-carlo", "se": mc.mc_se_mvi },
        "rho": mc.rho,
        "n": args.n,
        "seed": args.seed,
    });
    Ok((value, text))
}

fn family_teimouri_gupta(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        alpha1: f64,
        alpha2: f64,
        beta1: f64,
        beta2: f64,
        gamma: f64,
        delta: f64,
    }
    let p: In = serde_json::from_str(params)?;
    let fam = TeimouriGuptaParams::new(p.alpha1, p.alpha2, p.beta1, p.beta2, p.gamma, p.delta)?;
    let margins = tg_margin_stats(&fam)?;
    let idx = tg_indexes(&fam)?;
    let digits = args.precision;
    let text = format!(
        "family = teimouri-gupta  k = 2\n\
         margin means: {}\n\
         margin vis: {}\n\
         rho = {}\n\
         gvi = {}  (canonical form)\n\
         mvi = {}  (canonical form)\n",
        join_sig(margins.iter().map(|m| &m.mean), digits),
        join_sig(margins.iter().map(|m| &m.vi), digits),
        fmt_sig(idx.rho, digits),
        fmt_sig(idx.gvi.value(), digits),
        fmt_sig(idx.mvi.value(), digits),
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "teimouri-gupta",
        "margin_mean": margins.iter().map(|m| m.mean).collect::<Vec<_>>(),
        "margin_vi": margins.iter().map(|m| m.vi).collect::<Vec<_>>(),
        "rho": idx.rho,
        "gvi": { "value": idx.gvi.value(), "form": "canonical" },
        "mvi": { "value": idx.mvi.value(), "form": "canonical" },
    });
    Ok((value, text))
}

fn family_mst(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        p: Vec<f64>,
        lambda: f64,
    }
    let p: In = serde_json::from_str(params)?;
    let fam = MstParams::new(p.p, p.lambda)?;
    let mean = args
        .mean
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("mst requires --mean".into()))?;
    let mean = parse_mean_list(mean)?;
    let vf = mst_variance_function(&fam);
    let v = vf.eval(&mean)?;
    let g = gvi_function(&vf, &mean)?;
    let m = mvi_function(&vf, &mean)?;
    let digits = args.precision;
    let text = format!(
        "family = mst  k = {}\n\
         mean: {}\n\
         variance function at mean:\n{}\
         gvi = {}  (canonical form)  class = {}\n\
         mvi = {}  (canonical form)  class = {}\n",
        fam.k(),
        join_sig(mean.iter(), digits),
        render_matrix(&v, digits),
        fmt_sig(g.value(), digits),
        classify(&g, args.tol)?.label.as_str(),
        fmt_sig(m.value(), digits),
        classify(&m, args.tol)?.label.as_str(),
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "mst",
        "mean": mean.iter().copied().collect::<Vec<_>>(),
        "variance_function": matrix_rows(&v),
        "gvi": { "value": g.value(), "form": "canonical" },
        "mvi": { "value": m.value(), "form": "canonical" },
    });
    Ok((value, text))
}

fn family_weibull_margin(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        beta: f64,
    }
    let p: In = serde_json::from_str(params)?;
    let vi = weibull_vi(p.beta)?;
    let ratio = weibull_bathtub_ratio(p.beta)?;
    let class = weibull_variation_class(p.beta, args.tol)?;
    let digits = args.precision;
    let text = format!(
        "family = weibull-margin  beta = {}\n\
         vi = {}  class = {}\n\
         gamma_ratio = {}\n",
        fmt_sig(p.beta, digits),
        fmt_sig(vi, digits),
        class.label.as_str(),
        fmt_sig(ratio, digits),
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "weibull-margin",
        "beta": p.beta,
        "vi": vi,
        "gamma_ratio": ratio,
        "class": class.label.as_str(),
    });
    Ok((value, text))
}

fn family_tweedie_bounds(params: &str, args: &FamilyArgs) -> Result<FamilyOutput> {
    #[derive(Deserialize)]
    struct In {
        lam: Vec<Vec<f64>>,
    }
    let p: In = serde_json::from_str(params)?;
    let k = p.lam.len();
    if p.lam.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch(format!("lam must be {k}x{k}")));
    }
    let vm = VariationMatrix::new(DMatrix::from_fn(k, k, |i, j| p.lam[i][j]))?;
    let bounds = tweedie_exp_corr_bounds(&vm)?;
    let digits = args.precision;
    let text = format!(
        "family = tweedie-bounds  k = {k}\n\
         correlation upper bound per pair:\n{}\
         implied correlation per pair:\n{}\
         all implied correlations admissible: {}\n",
        render_matrix(&bounds.bound, digits),
        render_matrix(&bounds.implied_rho, digits),
        bounds
            .valid
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| v || i == j)),
    );
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "family": "tweedie-bounds",
        "bound": matrix_rows(&bounds.bound),
        "implied_rho": matrix_rows(&bounds.implied_rho),
        "valid": bounds.valid,
    });
    Ok((value, text))
}

/// `--params` accepts inline JSON or `@path` to read a file.
fn read_params_arg(raw: &str) -> Result<String> {
    match raw.strip_prefix('@') {
        Some(path) => {
            let path = Path::new(path);
            fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
        None => Ok(raw.to_string()),
    }
}

fn read_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    ScenarioSpec::from_json(&text)
}

fn parse_mean_list(raw: &str) -> Result<DVector<f64>> {
    let parsed: std::result::Result<Vec<f64>, _> =
        raw.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values = parsed.map_err(|e| Error::InvalidParameter(format!("bad mean list: {e}")))?;
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty mean list".into()));
    }
    Ok(DVector::from_vec(values))
}

/// Writes the core CSV dialect: `y1..yk` header, full-precision values.
fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let k = data.k();
    let names: Vec<String> = match data.names() {
        Some(names) => names.to_vec(),
        None => (1..=k).map(|j| format!("y{j}")).collect(),
    };
    let mut out = String::with_capacity(data.n() * k * 20);
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..data.n() {
        for j in 0..k {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", data.values()[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn sidecar_path(output: &Path) -> PathBuf {
    PathBuf::from(format!("{}.meta.json", output.display()))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn render_matrix(m: &DMatrix<f64>, digits: u32) -> String {
    let w = digits as usize + 8;
    let mut out = String::new();
    for i in 0..m.nrows() {
        out.push_str("  ");
        for j in 0..m.ncols() {
            out.push_str(&format!("{:>w$}", fmt_sig(m[(i, j)], digits)));
        }
        out.push('\n');
    }
    out
}

fn join_sig<'a>(values: impl Iterator<Item = &'a f64>, digits: u32) -> String {
    values
        .map(|&v| fmt_sig(v, digits))
        .collect::<Vec<_>>()
        .join(" ")
}

// Referenced from integration tests to keep exit semantics in one place.
pub fn exit_code_for(err: &Error) -> i32 {
    use Error::*;
    match err {
        Io { .. }
        | Parse { .. }
        | NonpositiveValue { .. }
        | RaggedRow { .. }
        | InsufficientSample { .. }
        | InvalidParameter(_)
        | DimensionMismatch(_)
        | Json(_)
        | InvalidLevel(_)
        | DegenerateBetaMargin { .. }
        | InvalidVariationMatrix { .. }
        | OutsideMeanDomain => 2,
        DegenerateMarginal { .. }
        | MagnitudeOverflow
        | InvalidMoments(_)
        | MeanMismatch { .. }
        | ZeroReferenceIndex
        | NumericFailure(_)
        | QuantileDomain(_)
        | DegenerateTest
        | DegenerateBootstrap { .. }
        | InfeasibleCorrelation { .. }
        | IrreparableCorrelation => 3,
    }
}
