use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::prior::ModelPrior;
use super::spec::ModelSpec;
use crate::bayes_factors::{global_eb, score, BfResult, GPrior, GPriorSpec, GlobalEb};
use crate::linmod::{fit, Dataset, FitOptions, FitSummary};
use crate::special::log_sum_exp;
use crate::{Error, Result};

/// One evaluated model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub spec: ModelSpec,
    /// Deviance against the null model (NaN when the fit failed).
    pub z: f64,
    pub d: usize,
    pub log_tbf: f64,
    pub log_prior: f64,
    /// Normalised over the evaluated set; 0 until normalisation.
    pub post_prob: f64,
    pub bf: Option<BfResult>,
    /// Why the model scored `-inf`, if it did.
    pub failure: Option<Error>,
}

impl ModelEntry {
    /// Unnormalised log posterior.
    pub fn log_post(&self) -> f64 {
        self.log_tbf + self.log_prior
    }
}

/// Posterior over an evaluated set of models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPosterior {
    entries: Vec<ModelEntry>,
    inclusion: Vec<f64>,
    log_normalizer: f64,
    global_eb: Option<GlobalEb>,
}

impl ModelPosterior {
    /// Normalise `entries` (in the given order) into posterior probabilities.
    pub fn from_entries(mut entries: Vec<ModelEntry>, p: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("no models were evaluated".into()));
        }
        let lp: Vec<f64> = entries.iter().map(ModelEntry::log_post).collect();
        let log_normalizer = log_sum_exp(&lp);
        if !log_normalizer.is_finite() {
            return Err(Error::Numeric("every evaluated model failed or has zero posterior".into()));
        }
        let mut inclusion = alloc::vec![0.0; p];
        for (e, l) in entries.iter_mut().zip(&lp) {
            e.post_prob = (l - log_normalizer).exp();
            for k in e.spec.included() {
                inclusion[k] += e.post_prob;
            }
        }
        for v in &mut inclusion {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self { entries, inclusion, log_normalizer, global_eb: None })
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    pub fn inclusion(&self) -> &[f64] {
        &self.inclusion
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// The shared `g` used when scoring under global empirical Bayes.
    pub fn global_eb(&self) -> Option<&GlobalEb> {
        self.global_eb.as_ref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn p(&self) -> usize {
        self.inclusion.len()
    }

    /// Entry indices by decreasing posterior probability; ties by lower
    /// dimension, then by spec order.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.entries.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ea, eb) = (&self.entries[a], &self.entries[b]);
            eb.log_post().total_cmp(&ea.log_post()).then(ea.d.cmp(&eb.d)).then(ea.spec.cmp(&eb.spec))
        });
        idx
    }

    pub fn find(&self, spec: &ModelSpec) -> Option<&ModelEntry> {
        self.entries.iter().find(|e| &e.spec == spec)
    }
}

/// Fits and scores individual models for one dataset, prior and g-scheme.
///
/// Under global EB the per-model score is provisional (local EB); the final
/// scores come from [`finalize`].
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    ds: &'a Dataset,
    prior: &'a ModelPrior,
    gspec: GPriorSpec,
    provisional: GPriorSpec,
    opts: FitOptions,
}

impl<'a> Evaluator<'a> {
    pub fn new(ds: &'a Dataset, prior: &'a ModelPrior, gspec: GPriorSpec, opts: FitOptions) -> Result<Self> {
        if prior.p() != ds.p() {
            return Err(Error::Schema(alloc::format!(
                "prior over {} covariates for a dataset with {}",
                prior.p(),
                ds.p()
            )));
        }
        let provisional = match gspec.prior {
            GPrior::GlobalEb => GPriorSpec { prior: GPrior::LocalEb { bias_correction: false }, ..gspec },
            _ => gspec,
        };
        Ok(Self { ds, prior, gspec, provisional, opts })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn prior(&self) -> &'a ModelPrior {
        self.prior
    }

    pub fn gspec(&self) -> &GPriorSpec {
        &self.gspec
    }

    pub fn fit_options(&self) -> &FitOptions {
        &self.opts
    }

    pub fn fit(&self, spec: &ModelSpec) -> Result<FitSummary> {
        fit(self.ds, spec, &self.opts)
    }

    /// Fit and score `spec`. Fit or scoring failures give `log_tbf = -inf`
    /// with the error recorded; an invalid spec for the prior is an error.
    pub fn evaluate(&self, spec: &ModelSpec) -> Result<ModelEntry> {
        let log_prior = self.prior.log_prior(spec)?;
        let scored = self
            .fit(spec)
            .and_then(|f| score(f.deviance, f.dimension, &self.provisional).map(|bf| (f.deviance, f.dimension, bf)));
        Ok(match scored {
            Ok((z, d, bf)) => ModelEntry {
                spec: spec.clone(),
                z,
                d,
                log_tbf: bf.log_tbf,
                log_prior,
                post_prob: 0.0,
                bf: Some(bf),
                failure: None,
            },
            Err(e) => ModelEntry {
                spec: spec.clone(),
                z: f64::NAN,
                d: spec.dimension(self.ds.covariates()),
                log_tbf: f64::NEG_INFINITY,
                log_prior,
                post_prob: 0.0,
                bf: None,
                failure: Some(e),
            },
        })
    }
}

/// Memoises evaluations by spec, which fixes the design columns.
#[derive(Debug, Clone, Default)]
pub struct EvalCache {
    map: BTreeMap<ModelSpec, ModelEntry>,
    hits: usize,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_eval(&mut self, ev: &Evaluator<'_>, spec: &ModelSpec) -> Result<&ModelEntry> {
        if self.map.contains_key(spec) {
            self.hits += 1;
        } else {
            let entry = ev.evaluate(spec)?;
            self.map.insert(spec.clone(), entry);
        }
        Ok(&self.map[spec])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hits
    }
}

/// Apply the global-EB correction when requested, then normalise.
pub fn finalize(mut entries: Vec<ModelEntry>, gspec: &GPriorSpec, p: usize) -> Result<ModelPosterior> {
    let mut geb = None;
    if gspec.prior == GPrior::GlobalEb {
        let ok: Vec<&ModelEntry> = entries.iter().filter(|e| e.failure.is_none()).collect();
        let models: Vec<(f64, usize)> = ok.iter().map(|e| (e.z, e.d)).collect();
        let priors: Vec<f64> = ok.iter().map(|e| e.log_prior).collect();
        let est = global_eb(&models, &priors, gspec.n_eff)?;
        for e in entries.iter_mut().filter(|e| e.failure.is_none()) {
            let bf = if e.d == 0 || est.g == 0.0 {
                BfResult { log_tbf: 0.0, g_point: Some(est.g), shrinkage_mode: Some(0.0), warning: false }
            } else {
                score(e.z, e.d, &GPriorSpec { prior: GPrior::FixedG(est.g), n_eff: gspec.n_eff })?
            };
            e.log_tbf = bf.log_tbf;
            e.bf = Some(bf);
        }
        geb = Some(est);
    }
    let mut post = ModelPosterior::from_entries(entries, p)?;
    post.global_eb = geb;
    Ok(post)
}
