use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::spec::{nonlinear_fp_terms, FpPowers, ModelSpec, Term, DEFAULT_POWERS};
use crate::linmod::Covariate;
use crate::special::ln_gamma;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorMode {
    VariableSelection,
    FpSelection,
}

/// Multiplicity-corrected prior over model specs.
///
/// Variable selection uses the beta-binomial with a uniform inclusion
/// probability. FP selection puts 1/2 on exclusion, 1/4 on a linear effect and
/// spreads 1/4 uniformly over the non-linear FP terms, independently per
/// covariate; covariates that are not FP-eligible get 1/2 on each of exclusion
/// and inclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPrior {
    mode: PriorMode,
    p: usize,
    power_set: Vec<f64>,
    max_degree: usize,
    fp_eligible: Vec<bool>,
    nonlinear: Vec<FpPowers>,
}

impl ModelPrior {
    pub fn variable_selection(p: usize) -> Self {
        Self {
            mode: PriorMode::VariableSelection,
            p,
            power_set: DEFAULT_POWERS.to_vec(),
            max_degree: 2,
            fp_eligible: alloc::vec![false; p],
            nonlinear: Vec::new(),
        }
    }

    pub fn fp_selection(covariates: &[Covariate], power_set: &[f64], max_degree: usize) -> Result<Self> {
        if power_set.is_empty() || !(1..=2).contains(&max_degree) {
            return Err(Error::domain("FP prior needs a power set and max degree 1 or 2"));
        }
        let mut powers = power_set.to_vec();
        powers.sort_by(f64::total_cmp);
        powers.dedup();
        let nonlinear = nonlinear_fp_terms(&powers, max_degree);
        Ok(Self {
            mode: PriorMode::FpSelection,
            p: covariates.len(),
            power_set: powers,
            max_degree,
            fp_eligible: covariates.iter().map(|c| c.fp).collect(),
            nonlinear,
        })
    }

    /// FP prior with the default power set and degree 2.
    pub fn fp_default(covariates: &[Covariate]) -> Self {
        Self::fp_selection(covariates, &DEFAULT_POWERS, 2).expect("default FP prior is valid")
    }

    pub fn mode(&self) -> PriorMode {
        self.mode
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn power_set(&self) -> &[f64] {
        &self.power_set
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn is_fp_eligible(&self, k: usize) -> bool {
        self.mode == PriorMode::FpSelection && self.fp_eligible[k]
    }

    /// Every term covariate `k` can take, exclusion first.
    pub fn choices(&self, k: usize) -> Vec<Term> {
        let mut out = alloc::vec![Term::Excluded, Term::Linear];
        if self.is_fp_eligible(k) {
            out.extend(self.nonlinear.iter().map(|fp| Term::Fp(*fp)));
        }
        out
    }

    /// Log prior probability of one covariate's term under FP selection.
    fn ln_term_fp(&self, k: usize, term: &Term) -> Result<f64> {
        let half = 0.5f64.ln();
        if !self.fp_eligible[k] {
            return match term {
                Term::Fp(_) => Err(Error::Schema(format!("covariate {k} is not FP-eligible"))),
                _ => Ok(half),
            };
        }
        match term {
            Term::Excluded => Ok(half),
            Term::Linear => Ok(0.25f64.ln()),
            Term::Fp(fp) => {
                if fp.degree() > self.max_degree || fp.is_linear() || fp.powers().any(|p| !self.power_set.contains(&p))
                {
                    return Err(Error::Schema(format!("FP term {fp:?} outside the configured power set")));
                }
                Ok(0.25f64.ln() - (self.nonlinear.len() as f64).ln())
            }
        }
    }

    /// Log prior probability of `spec`.
    pub fn log_prior(&self, spec: &ModelSpec) -> Result<f64> {
        if spec.p() != self.p {
            return Err(Error::Schema(format!("spec has {} terms, prior expects {}", spec.p(), self.p)));
        }
        match self.mode {
            PriorMode::VariableSelection => {
                if spec.terms().iter().any(|t| matches!(t, Term::Fp(_))) {
                    return Err(Error::Schema("FP term under a variable-selection prior".into()));
                }
                Ok(ln_beta_binomial(self.p, spec.n_included()))
            }
            PriorMode::FpSelection => spec.terms().iter().enumerate().map(|(k, t)| self.ln_term_fp(k, t)).sum(),
        }
    }
}

/// `ln[k! (p - k)! / (p + 1)!]`.
pub fn ln_beta_binomial(p: usize, k: usize) -> f64 {
    let (p, k) = (p as f64, k as f64);
    ln_gamma(k + 1.0) + ln_gamma(p - k + 1.0) - ln_gamma(p + 2.0)
}
