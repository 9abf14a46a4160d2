use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::coefficients::CoefficientDraws;
use crate::linmod::{inverse_link, Family, FitSummary};
use crate::{Error, Result};

/// Pointwise summaries of predictive draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSummary {
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

/// Smallest value whose cumulative weight reaches `q` of the total.
fn weighted_quantile(sorted: &[(f64, f64)], total: f64, q: f64) -> f64 {
    let target = q * total;
    let mut acc = 0.0;
    for &(v, w) in sorted {
        acc += w;
        if acc >= target {
            return v;
        }
    }
    sorted.last().map_or(f64::NAN, |p| p.0)
}

impl PredictiveSummary {
    /// Summaries of a weighted mixture of draw matrices (rows are points,
    /// columns are draws); each matrix's draws share its weight equally.
    pub fn from_mixture(parts: &[(&DMatrix<f64>, f64)], level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain("interval level must lie in (0, 1)"));
        }
        let parts: Vec<(&DMatrix<f64>, f64)> = parts.iter().copied().filter(|(_, w)| *w > 0.0).collect();
        let Some(first) = parts.first() else {
            return Err(Error::Empty("no predictive draws".into()));
        };
        let rows = first.0.nrows();
        if parts.iter().any(|(m, _)| m.nrows() != rows || m.ncols() == 0) {
            return Err(Error::Schema("predictive draws disagree in shape".into()));
        }
        let total: f64 = parts.iter().map(|p| p.1).sum();
        let tail = 0.5 * (1.0 - level);
        let mut out = Self { mean: Vec::new(), median: Vec::new(), lower: Vec::new(), upper: Vec::new(), level };
        for i in 0..rows {
            let mut pool = Vec::new();
            let mut mean = 0.0;
            for (m, w) in &parts {
                let each = w / total / m.ncols() as f64;
                for v in m.row(i).iter() {
                    pool.push((*v, each));
                    mean += each * v;
                }
            }
            pool.sort_by(|a, b| a.0.total_cmp(&b.0));
            out.mean.push(mean);
            out.median.push(weighted_quantile(&pool, 1.0, 0.5));
            out.lower.push(weighted_quantile(&pool, 1.0, tail));
            out.upper.push(weighted_quantile(&pool, 1.0, 1.0 - tail));
        }
        Ok(out)
    }

    pub fn from_draws(draws: &DMatrix<f64>, level: f64) -> Result<Self> {
        Self::from_mixture(&[(draws, 1.0)], level)
    }
}

/// Per-draw means `h(α + xᵀβ)` for raw covariate rows `new_x`; one row per
/// point, one column per draw.
pub fn predict_glm_draws(draws: &CoefficientDraws, new_x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if draws.family == Family::Cox {
        return Err(Error::Unsupported("Cox predictions are survival curves".into()));
    }
    let xc = draws.transform.apply(new_x)?;
    let d = draws.dimension();
    let off = usize::from(draws.has_intercept);
    let mut out = DMatrix::zeros(xc.nrows(), draws.len());
    for s in 0..draws.len() {
        for i in 0..xc.nrows() {
            let mut eta = draws.intercept(s);
            for j in 0..d {
                eta += xc[(i, j)] * draws.draws[(s, off + j)];
            }
            out[(i, s)] = inverse_link(draws.family, eta);
        }
    }
    Ok(out)
}

pub fn predict_glm(draws: &CoefficientDraws, new_x: &DMatrix<f64>, level: f64) -> Result<PredictiveSummary> {
    PredictiveSummary::from_draws(&predict_glm_draws(draws, new_x)?, level)
}

/// Model-averaged predictions: the weighted mixture of each model's draws.
pub fn predict_glm_bma(
    models: &[(&CoefficientDraws, f64)],
    new_x: &DMatrix<f64>,
    level: f64,
) -> Result<PredictiveSummary> {
    let mats = models.iter().map(|(d, w)| Ok((predict_glm_draws(d, new_x)?, *w))).collect::<Result<Vec<_>>>()?;
    let parts: Vec<(&DMatrix<f64>, f64)> = mats.iter().map(|(m, w)| (m, *w)).collect();
    PredictiveSummary::from_mixture(&parts, level)
}

/// Plug-in mean `h(α̂ + E[t] xᵀβ̂)` on raw rows.
pub fn plug_in_predict(fit: &FitSummary, mean_t: f64, new_x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if fit.family == Family::Cox {
        return Err(Error::Unsupported("Cox predictions are survival curves".into()));
    }
    let xc = fit.transform.apply(new_x)?;
    let alpha = fit.intercept.unwrap_or(0.0);
    Ok((0..xc.nrows())
        .map(|i| {
            let lin: f64 = (0..fit.dimension).map(|j| xc[(i, j)] * fit.coefficients[j]).sum();
            inverse_link(fit.family, alpha + mean_t * lin)
        })
        .collect())
}
