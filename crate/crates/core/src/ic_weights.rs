//! AIC/BIC-weighted pseudo-posterior model probabilities.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linmod::{fit, Dataset, FitOptions, FitSummary};
use crate::model_space::{enumeration_size, ModelEntry, ModelPosterior, ModelPrior, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Aic,
    Bic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcWeighting {
    pub criterion: Criterion,
    /// `+inf` for flagged (failed) fits.
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `-2 loglik + k · (d + intercept)` with `k = 2` (AIC) or `ln n_eff` (BIC).
pub fn information_criterion(fit: &FitSummary, criterion: Criterion, n_eff: f64) -> Result<f64> {
    let penalty = match criterion {
        Criterion::Aic => 2.0,
        Criterion::Bic => {
            if !(n_eff >= 1.0) {
                return Err(Error::domain("BIC needs n_eff >= 1"));
            }
            n_eff.ln()
        }
    };
    Ok(-2.0 * fit.loglik + penalty * fit.n_params() as f64)
}

/// Weights proportional to `exp(-IC/2)`. `None` entries are failed fits and
/// get weight 0.
pub fn ic_weights(fits: &[Option<&FitSummary>], criterion: Criterion, n_eff: f64) -> Result<IcWeighting> {
    if fits.is_empty() {
        return Err(Error::Empty("no fits to weight".into()));
    }
    let values = fits
        .iter()
        .map(|f| match f {
            Some(f) => information_criterion(f, criterion, n_eff),
            None => Ok(f64::INFINITY),
        })
        .collect::<Result<Vec<f64>>>()?;
    // softmax of -IC/2 through differences from the best criterion
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Numeric("every fit failed".into()));
    }
    let rel: Vec<f64> = values.iter().map(|v| (-0.5 * (v - best)).exp()).collect();
    let total: f64 = rel.iter().sum();
    let weights = rel.iter().map(|r| r / total).collect();
    Ok(IcWeighting { criterion, values, weights })
}

/// All `2^p` variable-selection models weighted by an information criterion,
/// as a [`ModelPosterior`] with a flat model prior. Each entry's `log_tbf`
/// holds `-(IC - IC_null)/2` (relative to the best model if the null failed).
pub fn ic_enumerate(
    ds: &Dataset,
    criterion: Criterion,
    opts: &FitOptions,
    budget: u128,
) -> Result<(IcWeighting, ModelPosterior)> {
    let p = ds.p();
    let total = enumeration_size(&ModelPrior::variable_selection(p), budget)?;
    let n_eff = ds.n_eff();
    let specs: Vec<ModelSpec> = (0..total).map(|m| ModelSpec::from_mask(m, p)).collect();
    let fits: Vec<Result<FitSummary>> = specs.iter().map(|s| fit(ds, s, opts)).collect();
    let flagged: Vec<Option<&FitSummary>> = fits.iter().map(|f| f.as_ref().ok()).collect();
    let weighting = ic_weights(&flagged, criterion, n_eff)?;
    let null_ic = if weighting.values[0].is_finite() {
        weighting.values[0]
    } else {
        weighting.values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let entries = specs
        .into_iter()
        .zip(fits)
        .zip(&weighting.values)
        .map(|((spec, f), ic)| {
            let d = spec.n_included();
            match f {
                Ok(f) => ModelEntry {
                    spec,
                    z: f.deviance,
                    d: f.dimension,
                    log_tbf: -0.5 * (ic - null_ic),
                    log_prior: 0.0,
                    post_prob: 0.0,
                    bf: None,
                    failure: None,
                },
                Err(e) => ModelEntry {
                    spec,
                    z: f64::NAN,
                    d,
                    log_tbf: f64::NEG_INFINITY,
                    log_prior: 0.0,
                    post_prob: 0.0,
                    bf: None,
                    failure: Some(e),
                },
            }
        })
        .collect();
    Ok((weighting, ModelPosterior::from_entries(entries, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmod::fit_null;
    use alloc::vec;
    use nalgebra::DMatrix;

    #[test]
    fn equal_and_shifted_criteria() {
        let ds = Dataset::glm(
            crate::linmod::Family::Gaussian,
            vec![1.0, 2.0, 0.5, 3.0],
            DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]),
        )
        .unwrap();
        let f = fit_null(&ds).unwrap();
        let w = ic_weights(&[Some(&f), Some(&f)], Criterion::Aic, 4.0).unwrap();
        assert_eq!(w.weights, vec![0.5, 0.5]);
        let mut g = f.clone();
        g.loglik -= 1.0; // AIC up by 2
        let w = ic_weights(&[Some(&f), Some(&g)], Criterion::Aic, 4.0).unwrap();
        assert!((w.weights[0] / w.weights[1] - core::f64::consts::E).abs() < 1e-12);
        let w = ic_weights(&[Some(&f), None], Criterion::Bic, 4.0).unwrap();
        assert_eq!(w.weights, vec![1.0, 0.0]);
        assert!(matches!(ic_weights(&[], Criterion::Aic, 4.0), Err(Error::Empty(_))));
    }
}
