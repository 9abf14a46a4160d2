use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::coefficients::CoefficientDraws;
use super::predict::PredictiveSummary;
use crate::linmod::{Dataset, DesignTransform, Family};
use crate::{Error, Result};

/// Right-continuous step function `H₀(t)` jumping at the distinct event times.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineHazard {
    pub times: Vec<f64>,
    pub cumhaz: Vec<f64>,
}

impl BaselineHazard {
    pub fn at(&self, t: f64) -> f64 {
        match self.times.partition_point(|s| *s <= t) {
            0 => 0.0,
            k => self.cumhaz[k - 1],
        }
    }
}

/// Aalen-Breslow cumulative baseline hazard at coefficients `beta` on the
/// model's centered design: `H₀(t) = Σ_{t_i ≤ t} d_i / Σ_{k ∈ R(t_i)} exp(x_kᵀβ)`.
pub fn breslow_baseline(ds: &Dataset, transform: &DesignTransform, beta: &DVector<f64>) -> Result<BaselineHazard> {
    let status = match (ds.family(), ds.status()) {
        (Family::Cox, Some(s)) => s,
        _ => return Err(Error::Unsupported("the Breslow baseline needs survival data".into())),
    };
    if !status.iter().any(|s| *s) {
        return Err(Error::NoEvents);
    }
    let xc = transform.apply(ds.x())?;
    if xc.ncols() != beta.len() {
        return Err(Error::Schema("coefficient length does not match the design".into()));
    }
    let time = ds.time();
    let n = time.len();
    let eta: Vec<f64> = (0..n).map(|i| (0..beta.len()).map(|j| xc[(i, j)] * beta[j]).sum()).collect();
    let offset = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| time[b].total_cmp(&time[a]));

    // sweep from the latest time down, accumulating the risk-set sum
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    let mut risk = 0.0;
    let mut start = 0;
    while start < n {
        let t = time[order[start]];
        let mut end = start;
        while end < n && time[order[end]] == t {
            risk += (eta[order[end]] - offset).exp();
            end += 1;
        }
        let events = order[start..end].iter().filter(|&&i| status[i]).count();
        if events > 0 {
            jumps.push((t, events as f64 * (-offset).exp() / risk));
        }
        start = end;
    }
    jumps.reverse();
    let mut acc = 0.0;
    let (times, cumhaz) = jumps
        .into_iter()
        .map(|(t, h)| {
            acc += h;
            (t, acc)
        })
        .unzip();
    Ok(BaselineHazard { times, cumhaz })
}

/// Survival curves for new subjects, one draw matrix per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurves {
    pub times: Vec<f64>,
    /// `H₀` on `times`, at the mean of the coefficient draws.
    pub baseline: Vec<f64>,
    /// Per subject, `S(t | x)` with one row per time and one column per draw.
    pub survival: Vec<DMatrix<f64>>,
}

impl SurvivalCurves {
    pub fn summary(&self, subject: usize, level: f64) -> Result<PredictiveSummary> {
        let m = self.survival.get(subject).ok_or_else(|| Error::domain("no such subject"))?;
        PredictiveSummary::from_draws(m, level)
    }
}

/// `S(t | x) = exp(-H₀(t) exp(xᵀβ))` for every draw of `β`, with `H₀` the
/// Breslow estimate at the posterior mean of `β`.
pub fn survival_curves(
    draws: &CoefficientDraws,
    ds: &Dataset,
    new_x: &DMatrix<f64>,
    times: &[f64],
) -> Result<SurvivalCurves> {
    if draws.family != Family::Cox {
        return Err(Error::Unsupported("survival curves need a Cox model".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("times must be finite"));
    }
    let beta_mean = draws.mean();
    let base = breslow_baseline(ds, &draws.transform, &beta_mean)?;
    let baseline: Vec<f64> = times.iter().map(|t| base.at(*t)).collect();
    let xc = draws.transform.apply(new_x)?;
    let d = draws.dimension();
    let survival = (0..xc.nrows())
        .map(|i| {
            let mut m = DMatrix::zeros(times.len(), draws.len());
            for s in 0..draws.len() {
                let eta: f64 = (0..d).map(|j| xc[(i, j)] * draws.draws[(s, j)]).sum();
                let rr = eta.exp();
                for (k, h) in baseline.iter().enumerate() {
                    m[(k, s)] = (-h * rr).exp();
                }
            }
            m
        })
        .collect();
    Ok(SurvivalCurves { times: times.to_vec(), baseline, survival })
}
