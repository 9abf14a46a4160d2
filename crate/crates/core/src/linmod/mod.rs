//! GLM (Gaussian, logistic, Poisson) and Cox model fitting: deviances, MLEs
//! and observed-information blocks on weighted-centered designs.

mod cox;
mod data;
mod design;
mod glm;

use nalgebra::{DMatrix, DVector};

pub use cox::cox_partial_loglik;
pub use data::{Covariate, CovariateKind, Dataset, Family};
pub use design::{center_design, CenteredDesign, DesignTransform};
pub use glm::glm_loglik;

use crate::model_space::spec::ModelSpec;
use crate::special::expit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ties {
    #[default]
    Breslow,
    Efron,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative change in deviance (or partial log-likelihood) at convergence.
    pub tol: f64,
    /// Relative tolerance on pivoted-QR diagonals for rank detection.
    pub rank_tol: f64,
    pub ties: Ties,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 50, tol: 1e-10, rank_tol: 1e-10, ties: Ties::Breslow }
    }
}

/// Result of fitting one model against the intercept-only (or empty Cox) null.
#[derive(Debug, Clone)]
pub struct FitSummary {
    pub family: Family,
    /// Deviance `z` against the null model.
    pub deviance: f64,
    /// Model dimension `d` (centered design columns).
    pub dimension: usize,
    pub intercept: Option<f64>,
    pub coefficients: DVector<f64>,
    pub info_intercept: Option<f64>,
    /// Observed information block for the coefficients at the MLE.
    pub info_beta: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub loglik: f64,
    pub null_loglik: f64,
    /// Profiled residual variance (Gaussian only).
    pub sigma2: Option<f64>,
    pub transform: DesignTransform,
}

impl FitSummary {
    /// Number of likelihood parameters counted by information criteria.
    pub fn n_params(&self) -> usize {
        self.dimension + usize::from(self.intercept.is_some())
    }

    /// Response function applied to a linear predictor.
    pub fn response(&self, eta: f64) -> f64 {
        inverse_link(self.family, eta)
    }
}

pub fn inverse_link(family: Family, eta: f64) -> f64 {
    #[allow(unused_imports)]
    use num_traits::Float;
    match family {
        Family::Gaussian => eta,
        Family::Binomial => expit(eta),
        Family::Poisson | Family::Cox => eta.exp(),
    }
}

/// Intercept-only fit (an empty fit for Cox).
pub fn fit_null(ds: &Dataset) -> Result<FitSummary> {
    match ds.family() {
        Family::Cox => cox::fit_null_cox(ds),
        _ => glm::fit_null_glm(ds),
    }
}

pub fn fit_glm(ds: &Dataset, spec: &ModelSpec) -> Result<FitSummary> {
    fit_glm_with(ds, spec, &FitOptions::default())
}

pub fn fit_glm_with(ds: &Dataset, spec: &ModelSpec, opts: &FitOptions) -> Result<FitSummary> {
    if ds.family() == Family::Cox {
        return Err(Error::Unsupported("fit_glm on Cox data; use fit_cox".into()));
    }
    glm::fit_glm(ds, spec, opts)
}

pub fn fit_cox(ds: &Dataset, spec: &ModelSpec) -> Result<FitSummary> {
    fit_cox_with(ds, spec, &FitOptions::default())
}

pub fn fit_cox_with(ds: &Dataset, spec: &ModelSpec, opts: &FitOptions) -> Result<FitSummary> {
    if ds.family() != Family::Cox {
        return Err(Error::Unsupported("fit_cox on GLM data".into()));
    }
    cox::fit_cox(ds, spec, opts)
}

/// Fit whichever model the dataset's family calls for.
pub fn fit(ds: &Dataset, spec: &ModelSpec, opts: &FitOptions) -> Result<FitSummary> {
    match ds.family() {
        Family::Cox => cox::fit_cox(ds, spec, opts),
        _ => glm::fit_glm(ds, spec, opts),
    }
}

/// The g-prior constant `c = v{h(α)} h'(α)^{-2}` evaluated at the null-model
/// intercept. Only data-based Bayes factors need it; test-based ones never do.
pub fn gprior_constant(family: Family, alpha: f64) -> Option<f64> {
    #[allow(unused_imports)]
    use num_traits::Float;
    match family {
        Family::Gaussian => Some(1.0),
        Family::Binomial => {
            let mu = expit(alpha);
            Some(1.0 / (mu * (1.0 - mu)))
        }
        Family::Poisson => Some((-alpha).exp()),
        Family::Cox => None,
    }
}
