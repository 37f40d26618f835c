//! Arnold–Ng bivariate beta from five independent gammas.
//!
//! With `U₁ ~ Γ(α₁)`, `U₂ ~ Γ(α₂)`, `V₁ ~ Γ(α₁′)`, `V₂ ~ Γ(α₂′)`,
//! `W ~ Γ(α₀)`, all unit scale, the pair
//!
//! `Y₁ = (U₁+V₁) / (U₁+V₁+V₂+W)`,
//! `Y₂ = (U₂+V₂) / (U₂+V₁+V₂+W)`
//!
//! has Beta margins `Y_j ~ Beta(a_j, b_j)` with `a_j = α_j + α_j′` and
//! `b_j = α₀ + α₁′ + α₂′ − α_j′`; the shared `(V₁, V₂, W)` block couples
//! the coordinates. Margin moments are exact beta moments
//! (`VI_j = b_j / {a_j (a_j + b_j + 1)}`); the joint indexes have no
//! usable closed form and are estimated by Monte Carlo with a batch-split
//! standard error.

use nalgebra::DMatrix;
use rand_distr::{Distribution, Gamma};

use crate::data::{correlation_from_cov, summarize, Dataset};
use crate::error::{Error, Result};
use crate::families::MarginStats;
use crate::indexes::{gvi, mvi, IndexValue};
use crate::rng::stream_rng;
use crate::stats::sample_sd;

/// Gamma shape parameters `(α₀, α₁, α₂, α₁′, α₂′)`, all nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct ArnoldNgParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha1p: f64,
    pub alpha2p: f64,
}

impl ArnoldNgParams {
    pub fn new(alpha0: f64, alpha1: f64, alpha2: f64, alpha1p: f64, alpha2p: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha0", alpha0),
            ("alpha1", alpha1),
            ("alpha2", alpha2),
            ("alpha1p", alpha1p),
            ("alpha2p", alpha2p),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} is {v}, must be nonnegative"
                )));
            }
        }
        Ok(Self {
            alpha0,
            alpha1,
            alpha2,
            alpha1p,
            alpha2p,
        })
    }

    /// Beta shape pairs `(a_j, b_j)` of the two margins; errors when a
    /// margin degenerates to a constant.
    pub fn beta_shapes(&self) -> Result<[(f64, f64); 2]> {
        let pairs = [
            (self.alpha1 + self.alpha1p, self.alpha0 + self.alpha2p),
            (self.alpha2 + self.alpha2p, self.alpha0 + self.alpha1p),
        ];
        for (j, &(a, b)) in pairs.iter().enumerate() {
            if a <= 0.0 || b <= 0.0 {
                return Err(Error::DegenerateBetaMargin { margin: j + 1, a, b });
            }
        }
        Ok(pairs)
    }
}

/// Exact beta-margin statistics: mean `a/(a+b)`, `VI = b/{a(a+b+1)}`.
pub fn an_margin_stats(params: &ArnoldNgParams) -> Result<[MarginStats; 2]> {
    let shapes = params.beta_shapes()?;
    Ok(shapes.map(|(a, b)| MarginStats {
        mean: a / (a + b),
        vi: b / (a * (a + b + 1.0)),
    }))
}

/// Samples `n` pairs through the gamma construction. A zero shape
/// contributes the constant 0.
pub fn an_sample(params: &ArnoldNgParams, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, found: n });
    }
    params.beta_shapes()?;
    let gamma_draw = make_gamma_draws([
        params.alpha1,
        params.alpha2,
        params.alpha1p,
        params.alpha2p,
        params.alpha0,
    ])?;
    let mut rng = stream_rng(seed, 0);
    let mut values = DMatrix::zeros(n, 2);
    for i in 0..n {
        let [u1, u2, v1, v2, w] = gamma_draw(&mut rng);
        let shared = v1 + v2 + w;
        values[(i, 0)] = (u1 + v1) / (u1 + shared);
        values[(i, 1)] = (u2 + v2) / (u2 + shared);
    }
    Dataset::new(values)
}

type GammaDraw = Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> [f64; 5]>;

fn make_gamma_draws(shapes: [f64; 5]) -> Result<GammaDraw> {
    let dists: Vec<Option<Gamma<f64>>> = shapes
        .iter()
        .map(|&s| {
            if s == 0.0 {
                Ok(None)
            } else {
                Gamma::new(s, 1.0)
                    .map(Some)
                    .map_err(|e| Error::InvalidParameter(format!("gamma shape {s}: {e}")))
            }
        })
        .collect::<Result<_>>()?;
    Ok(Box::new(move |rng| {
        let mut out = [0.0; 5];
        for (slot, dist) in out.iter_mut().zip(&dists) {
            if let Some(d) = dist {
                *slot = d.sample(rng);
            }
        }
        out
    }))
}

/// Monte-Carlo joint indexes with batch-split standard errors.
#[derive(Debug, Clone, Copy)]
pub struct AnMonteCarlo {
    pub gvi: IndexValue,
    pub mvi: IndexValue,
    pub rho: f64,
    pub mc_se_gvi: f64,
    pub mc_se_mvi: f64,
}

const MC_BATCHES: usize = 20;

/// Estimates GVI, MVI, and the margin correlation from `n ≥ 1000`
/// simulated pairs. Standard errors come from splitting the sample into
/// 20 equal batches and taking the spread of per-batch indexes.
pub fn an_indexes_mc(params: &ArnoldNgParams, n: usize, seed: u64) -> Result<AnMonteCarlo> {
    if n < 1000 {
        return Err(Error::InsufficientSample {
            needed: 1000,
            found: n,
        });
    }
    let data = an_sample(params, n, seed)?;
    let summary = summarize(&data)?;
    let g = gvi(&summary)?;
    let v = mvi(&summary)?;
    let rho = correlation_from_cov(&summary)?[(0, 1)];

    let batch = n / MC_BATCHES;
    let mut gvi_batches = Vec::with_capacity(MC_BATCHES);
    let mut mvi_batches = Vec::with_capacity(MC_BATCHES);
    for b in 0..MC_BATCHES {
        let indices: Vec<usize> = (b * batch..(b + 1) * batch).collect();
        let part = summarize(&data.select_rows(&indices)?)?;
        gvi_batches.push(gvi(&part)?.value());
        mvi_batches.push(mvi(&part)?.value());
    }
    let scale = (MC_BATCHES as f64).sqrt();
    Ok(AnMonteCarlo {
        gvi: g,
        mvi: v,
        rho,
        mc_se_gvi: sample_sd(&gvi_batches) / scale,
        mc_se_mvi: sample_sd(&mvi_batches) / scale,
    })
}
