//! Posterior draws of `g` and the model parameters, and predictions.

mod coefficients;
mod g;
mod predict;
mod survival;

pub use coefficients::{sample_coefficients, CoefficientDraws};
pub use g::{incig_cdf, incig_quantile, sample_g, GPosterior, GSummary, GridPosterior};
pub use predict::{plug_in_predict, predict_glm, predict_glm_bma, predict_glm_draws, PredictiveSummary};
pub use survival::{breslow_baseline, survival_curves, BaselineHazard, SurvivalCurves};

use crate::bayes_factors::GPriorSpec;
use crate::model_space::{ModelEntry, ModelPosterior};
use crate::{Error, Result};

/// Posterior of `g` for an evaluated model, resolving global EB through the
/// posterior it belongs to.
pub fn g_posterior_for(entry: &ModelEntry, post: &ModelPosterior, gspec: &GPriorSpec) -> Result<GPosterior> {
    if let Some(e) = &entry.failure {
        return Err(e.clone());
    }
    if let Some(geb) = post.global_eb() {
        return if entry.d == 0 { Ok(GPosterior::PointMass(0.0)) } else { GPosterior::global(geb.g) };
    }
    if matches!(gspec.prior, crate::bayes_factors::GPrior::GlobalEb) {
        return Err(Error::Unsupported("the posterior carries no global EB estimate".into()));
    }
    GPosterior::new(entry.z, entry.d, gspec)
}
