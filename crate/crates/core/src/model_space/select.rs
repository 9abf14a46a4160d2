use alloc::vec::Vec;

use super::posterior::{ModelEntry, ModelPosterior};
use super::prior::PriorMode;
use super::spec::{ModelSpec, Term};

/// Default number of models kept for model averaging.
pub const DEFAULT_BMA_SIZE: usize = 8_000;

/// A weighted set of models from a posterior. Weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub members: Vec<(usize, f64)>,
}

impl Selection {
    pub fn entries<'a>(&'a self, post: &'a ModelPosterior) -> impl Iterator<Item = (&'a ModelEntry, f64)> + 'a {
        self.members.iter().map(move |&(i, w)| (&post.entries()[i], w))
    }
}

/// Median-probability model.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpm {
    /// Covariates with inclusion probability at least 1/2.
    pub included: Vec<bool>,
    /// Variable mode: the single spec. FP mode: the linear spec used only when
    /// no stored model has exactly the passing covariates.
    pub spec: ModelSpec,
    /// Stored models realising the MPM with renormalised weights; empty when
    /// `spec` must be fitted on demand.
    pub members: Selection,
}

/// Highest-posterior model; ties go to the lower dimension, then spec order.
pub fn select_map(post: &ModelPosterior) -> usize {
    post.ranked()[0]
}

pub fn select_mpm(post: &ModelPosterior, mode: PriorMode) -> Mpm {
    let included: Vec<bool> = post.inclusion().iter().map(|v| *v >= 0.5).collect();
    let spec = ModelSpec::from_inclusion(&included);
    let matches: Vec<usize> = match mode {
        PriorMode::VariableSelection => post.entries().iter().position(|e| e.spec == spec).into_iter().collect(),
        PriorMode::FpSelection => post
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.spec.terms().iter().zip(&included).all(|(t, inc)| t.is_included() == *inc))
            .map(|(i, _)| i)
            .collect(),
    };
    let total: f64 = matches.iter().map(|&i| post.entries()[i].post_prob).sum();
    let members = if matches.is_empty() || !(total > 0.0) {
        Vec::new()
    } else {
        matches.iter().map(|&i| (i, post.entries()[i].post_prob / total)).collect()
    };
    Mpm {
        spec: ModelSpec::from_terms(included.iter().map(|&i| if i { Term::Linear } else { Term::Excluded }).collect()),
        included,
        members: Selection { members },
    }
}

/// The `b` most probable models with renormalised weights.
pub fn select_bma(post: &ModelPosterior, b: usize) -> Selection {
    let mut idx = post.ranked();
    idx.truncate(b.max(1));
    let total: f64 = idx.iter().map(|&i| post.entries()[i].post_prob).sum();
    Selection { members: idx.into_iter().map(|i| (i, post.entries()[i].post_prob / total)).collect() }
}
