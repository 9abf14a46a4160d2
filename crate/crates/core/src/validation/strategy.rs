use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bayes_factors::{GPrior, GPriorSpec};
use crate::ic_weights::{ic_enumerate, Criterion};
use crate::linmod::{Dataset, FitOptions, FitSummary};
use crate::model_space::{
    enumerate_models, merge_chains, run_chain, select_bma, select_map, select_mpm, Evaluator, ModelPosterior,
    ModelPrior, ModelSpec, PriorMode, SearchOptions, DEFAULT_BUDGET,
};
use crate::posterior::{g_posterior_for, plug_in_predict};
use crate::{Error, Result};

/// How models are scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scoring {
    /// Test-based Bayes factors; `n_eff` is taken from the data each time.
    Tbf(GPrior),
    /// Information-criterion weights (variable selection, exhaustive only).
    Ic(Criterion),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    Exhaustive { budget: u128 },
    Stochastic { iterations: usize, top_k: usize, chains: usize },
}

impl Default for Search {
    fn default() -> Self {
        Search::Exhaustive { budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    Map,
    Mpm,
    Bma(usize),
}

/// A complete selection-and-prediction pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub scoring: Scoring,
    pub mode: PriorMode,
    pub search: Search,
    pub selection: SelectionRule,
    pub fit: FitOptions,
}

/// Weighted plug-in models: each predicts `h(α̂ + E[t] xᵀβ̂)`.
#[derive(Debug, Clone)]
pub struct Predictor {
    pub models: Vec<(FitSummary, f64, f64)>,
}

impl Predictor {
    pub fn predict(&self, new_x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; new_x.nrows()];
        for (fit, mean_t, w) in &self.models {
            for (o, p) in out.iter_mut().zip(plug_in_predict(fit, *mean_t, new_x)?) {
                *o += w * p;
            }
        }
        Ok(out)
    }
}

impl Strategy {
    pub fn model_prior(&self, ds: &Dataset) -> ModelPrior {
        match self.mode {
            PriorMode::VariableSelection => ModelPrior::variable_selection(ds.p()),
            PriorMode::FpSelection => ModelPrior::fp_default(ds.covariates()),
        }
    }

    /// The model posterior this strategy produces on `ds`.
    pub fn posterior(&self, ds: &Dataset, seed: u64) -> Result<ModelPosterior> {
        match self.scoring {
            Scoring::Ic(c) => {
                let budget = match self.search {
                    Search::Exhaustive { budget } => budget,
                    Search::Stochastic { .. } => {
                        return Err(Error::Unsupported("information-criterion weights need enumeration".into()))
                    }
                };
                if self.mode != PriorMode::VariableSelection {
                    return Err(Error::Unsupported("information-criterion weights cover variable selection".into()));
                }
                Ok(ic_enumerate(ds, c, &self.fit, budget)?.1)
            }
            Scoring::Tbf(prior) => {
                let gspec = GPriorSpec::new(prior, ds.n_eff())?;
                let mprior = self.model_prior(ds);
                match self.search {
                    Search::Exhaustive { budget } => enumerate_models(ds, &mprior, &gspec, &self.fit, budget),
                    Search::Stochastic { iterations, top_k, chains } => {
                        let ev = Evaluator::new(ds, &mprior, gspec, self.fit)?;
                        let runs = (0..chains.max(1) as u64)
                            .map(|c| {
                                run_chain(&ev, &SearchOptions { iterations, top_k, seed, chain: c, record_path: false })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        merge_chains(runs, top_k, &gspec, ds.p())
                    }
                }
            }
        }
    }

    /// Fit the strategy on `ds` and return its predictor.
    pub fn fit_predictor(&self, ds: &Dataset, seed: u64) -> Result<Predictor> {
        let post = self.posterior(ds, seed)?;
        let gspec = match self.scoring {
            Scoring::Tbf(prior) => Some(GPriorSpec::new(prior, ds.n_eff())?),
            Scoring::Ic(_) => None,
        };
        let mprior = self.model_prior(ds);
        let ev = match gspec {
            Some(g) => Some(Evaluator::new(ds, &mprior, g, self.fit)?),
            None => None,
        };

        // (spec, weight, index into the posterior if stored)
        let chosen: Vec<(ModelSpec, f64, Option<usize>)> = match self.selection {
            SelectionRule::Map => {
                let i = select_map(&post);
                alloc::vec![(post.entries()[i].spec.clone(), 1.0, Some(i))]
            }
            SelectionRule::Bma(b) => select_bma(&post, b)
                .members
                .into_iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|(i, w)| (post.entries()[i].spec.clone(), w, Some(i)))
                .collect(),
            SelectionRule::Mpm => {
                let mpm = select_mpm(&post, self.mode);
                if mpm.members.members.is_empty() {
                    alloc::vec![(mpm.spec, 1.0, None)]
                } else {
                    mpm.members.members.into_iter().map(|(i, w)| (post.entries()[i].spec.clone(), w, Some(i))).collect()
                }
            }
        };

        let mut models = Vec::with_capacity(chosen.len());
        for (spec, w, idx) in chosen {
            let fit = crate::linmod::fit(ds, &spec, &self.fit)?;
            let mean_t = match (&ev, gspec) {
                (Some(ev), Some(g)) => {
                    let entry = match idx {
                        Some(i) => post.entries()[i].clone(),
                        None => ev.evaluate(&spec)?,
                    };
                    g_posterior_for(&entry, &post, &g)?.mean_t()
                }
                _ => 1.0,
            };
            models.push((fit, mean_t, w));
        }
        Ok(Predictor { models })
    }
}
