use alloc::vec::Vec;
use core::ops::Range;

use super::posterior::{finalize, Evaluator, ModelEntry, ModelPosterior};
use super::prior::{ModelPrior, PriorMode};
use super::spec::ModelSpec;
use crate::bayes_factors::GPriorSpec;
use crate::linmod::{Dataset, FitOptions};
use crate::{Error, Result};

/// Default cap on the number of models an exhaustive sweep may visit.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

/// Check that a sweep over `p` covariates fits the budget; returns `2^p`.
pub fn enumeration_size(prior: &ModelPrior, budget: u128) -> Result<u64> {
    if prior.mode() != PriorMode::VariableSelection {
        return Err(Error::Unsupported(
            "exhaustive enumeration covers variable selection only; use stochastic search".into(),
        ));
    }
    let p = prior.p();
    let models = 1u128.checked_shl(p as u32).filter(|_| p < 64).unwrap_or(u128::MAX);
    if models > budget {
        return Err(Error::BudgetExceeded { models, cap: budget });
    }
    Ok(models as u64)
}

/// Evaluate the models whose inclusion masks lie in `masks`, in mask order.
pub fn enumerate_range(ev: &Evaluator<'_>, masks: Range<u64>) -> Result<Vec<ModelEntry>> {
    let p = ev.prior().p();
    masks.map(|m| ev.evaluate(&ModelSpec::from_mask(m, p))).collect()
}

/// Evaluate all `2^p` variable-selection models and normalise.
pub fn enumerate_models(
    ds: &Dataset,
    prior: &ModelPrior,
    gspec: &GPriorSpec,
    opts: &FitOptions,
    budget: u128,
) -> Result<ModelPosterior> {
    let total = enumeration_size(prior, budget)?;
    let ev = Evaluator::new(ds, prior, *gspec, *opts)?;
    let entries = enumerate_range(&ev, 0..total)?;
    finalize(entries, gspec, prior.p())
}
