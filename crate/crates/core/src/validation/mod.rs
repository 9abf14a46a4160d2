//! Scores for binary predictions and bootstrap cross-validation of selection
//! strategies.

mod bootstrap;
mod strategy;

pub use bootstrap::{
    bootstrap_cv, check_binary_family, replicate_rows, run_replicate, summarize, BootstrapOptions, BootstrapReport,
    MetricSummary, ReplicateResult, Resample, DEFAULT_MAX_FAILURE_RATE,
};
pub use strategy::{Predictor, Scoring, Search, SelectionRule, Strategy};

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linmod::{fit_glm, Dataset, Family};
use crate::model_space::ModelSpec;
use crate::special::logit;
use crate::{Error, Result};

/// Lower clipping bound for predicted probabilities in the log score.
pub const LS_CLIP: f64 = 1e-12;

/// Scores on one validation set. AUC and calibration slope are undefined when
/// the set holds a single class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    pub auc: Option<f64>,
    pub cs: Option<f64>,
    pub ls: f64,
    pub m: usize,
}

fn check_binary(pi: &[f64], y: &[f64]) -> Result<()> {
    if pi.len() != y.len() {
        return Err(Error::InvalidData(alloc::format!("{} predictions for {} outcomes", pi.len(), y.len())));
    }
    if pi.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidData("outcomes must be 0 or 1".into()));
    }
    if pi.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidData("predictions must lie in [0, 1]".into()));
    }
    Ok(())
}

/// Area under the ROC curve as the Mann-Whitney statistic, ties counting 1/2.
pub fn auc(pi: &[f64], y: &[f64]) -> Result<f64> {
    check_binary(pi, y)?;
    let n1 = y.iter().filter(|v| **v == 1.0).count();
    let n0 = y.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::UndefinedAuc);
    }
    let mut idx: Vec<usize> = (0..pi.len()).collect();
    idx.sort_by(|&a, &b| pi[a].total_cmp(&pi[b]));
    // midranks over tied predictions
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && pi[idx[j]] == pi[idx[i]] {
            j += 1;
        }
        let mid = 0.5 * ((i + 1) + j) as f64;
        rank_sum += mid * idx[i..j].iter().filter(|&&k| y[k] == 1.0).count() as f64;
        i = j;
    }
    let u = rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    Ok(u / (n1 as f64 * n0 as f64))
}

/// Slope of the logistic regression of `y` on `logit(pi)` with a free intercept.
pub fn calibration_slope(pi: &[f64], y: &[f64]) -> Result<f64> {
    check_binary(pi, y)?;
    if pi.iter().any(|p| *p <= 0.0 || *p >= 1.0) {
        return Err(Error::InvalidData("predictions must lie strictly inside (0, 1)".into()));
    }
    let x = DMatrix::from_iterator(pi.len(), 1, pi.iter().map(|p| logit(*p)));
    let ds = Dataset::glm(Family::Binomial, y.to_vec(), x)?;
    let fit = fit_glm(&ds, &ModelSpec::from_mask(1, 1))?;
    Ok(fit.coefficients[0])
}

/// Mean negative log-likelihood of the outcomes, predictions clipped to
/// `[LS_CLIP, 1 - LS_CLIP]`.
pub fn log_score(pi: &[f64], y: &[f64]) -> Result<f64> {
    check_binary(pi, y)?;
    let total: f64 = pi
        .iter()
        .zip(y)
        .map(|(p, y)| {
            let p = p.clamp(LS_CLIP, 1.0 - LS_CLIP);
            if *y == 1.0 {
                -p.ln()
            } else {
                -(-p).ln_1p()
            }
        })
        .sum();
    Ok(total / pi.len() as f64)
}

/// All three scores; AUC and CS are left out when undefined.
pub fn score_predictions(pi: &[f64], y: &[f64]) -> Result<ScoreReport> {
    let ls = log_score(pi, y)?;
    let auc = match auc(pi, y) {
        Ok(v) => Some(v),
        Err(Error::UndefinedAuc) => None,
        Err(e) => return Err(e),
    };
    let cs = if auc.is_some() {
        let clipped: Vec<f64> = pi.iter().map(|p| p.clamp(LS_CLIP, 1.0 - LS_CLIP)).collect();
        calibration_slope(&clipped, y).ok()
    } else {
        None
    };
    Ok(ScoreReport { auc, cs, ls, m: pi.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn closed_form_scores() {
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.75);
        assert_eq!(auc(&[0.3; 4], &[0.0, 1.0, 0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.9], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.9], &[1.0, 1.0]), Err(Error::UndefinedAuc));
        assert!((log_score(&[0.5; 3], &[0.0, 1.0, 1.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((log_score(&[0.8, 0.2], &[1.0, 0.0]).unwrap() + 0.8f64.ln()).abs() < 1e-15);
        assert!(log_score(&[1.0, 0.0], &[1.0, 0.0]).unwrap() <= 1e-11);
    }

    #[test]
    fn constant_predictions_have_no_slope() {
        let err = calibration_slope(&[0.3; 6], &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance { .. } | Error::SingularDesign { .. }));
        let r = score_predictions(&[0.4; 3], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.auc, r.cs, r.m), (None, None, 3));
    }
}
