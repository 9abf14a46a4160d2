use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::model_space::spec::fp_shift;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gaussian,
    Binomial,
    Poisson,
    Cox,
}

impl Family {
    pub fn has_intercept(self) -> bool {
        !matches!(self, Family::Cox)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
            Family::Poisson => "poisson",
            Family::Cox => "cox",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateKind {
    Continuous,
    Binary,
    Categorical,
}

/// A selectable unit: one or more design columns that enter or leave a model
/// together. Categorical covariates own all their dummy columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariate {
    pub name: String,
    pub columns: Vec<usize>,
    pub kind: CovariateKind,
    /// Eligible for fractional-polynomial transformation (single continuous column).
    pub fp: bool,
}

impl Covariate {
    pub fn continuous(name: impl Into<String>, column: usize) -> Self {
        Self { name: name.into(), columns: vec![column], kind: CovariateKind::Continuous, fp: false }
    }
}

/// Response, covariates, weights and (for Cox) event indicators. Immutable
/// once built.
#[derive(Debug, Clone)]
pub struct Dataset {
    family: Family,
    y: Vec<f64>,
    x: DMatrix<f64>,
    weights: Vec<f64>,
    status: Option<Vec<bool>>,
    covariates: Vec<Covariate>,
    fp_shifts: Vec<f64>,
}

impl Dataset {
    /// GLM dataset with unit weights and one covariate per column named `x1..xq`.
    pub fn glm(family: Family, y: Vec<f64>, x: DMatrix<f64>) -> Result<Self> {
        if family == Family::Cox {
            return Err(Error::InvalidData("use Dataset::cox for survival data".into()));
        }
        Self::build(family, y, x, None, None, None)
    }

    /// Cox dataset: `time` is the follow-up time, `status` marks events.
    pub fn cox(time: Vec<f64>, status: Vec<bool>, x: DMatrix<f64>) -> Result<Self> {
        Self::build(Family::Cox, time, x, None, Some(status), None)
    }

    pub fn with_weights(self, weights: Vec<f64>) -> Result<Self> {
        let Dataset { family, y, x, status, covariates, .. } = self;
        Self::build(family, y, x, Some(weights), status, Some(covariates))
    }

    pub fn with_covariates(self, covariates: Vec<Covariate>) -> Result<Self> {
        let Dataset { family, y, x, weights, status, .. } = self;
        Self::build(family, y, x, Some(weights), status, Some(covariates))
    }

    fn build(
        family: Family,
        y: Vec<f64>,
        x: DMatrix<f64>,
        weights: Option<Vec<f64>>,
        status: Option<Vec<bool>>,
        covariates: Option<Vec<Covariate>>,
    ) -> Result<Self> {
        let n = y.len();
        if x.nrows() != n {
            return Err(Error::InvalidData(format!("{} responses but {} covariate rows", n, x.nrows())));
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(Error::InvalidData("weights length differs from n".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidData("weights must be positive and finite".into()));
        }
        if y.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value in response or covariates".into()));
        }
        match family {
            Family::Binomial => {
                if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidData("binomial response must lie in [0, 1]".into()));
                }
            }
            Family::Poisson => {
                if y.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidData("Poisson response must be non-negative".into()));
                }
            }
            Family::Cox => match &status {
                Some(s) if s.len() == n => {}
                Some(_) => return Err(Error::InvalidData("status length differs from n".into())),
                None => return Err(Error::InvalidData("Cox data needs event status".into())),
            },
            Family::Gaussian => {}
        }
        let status = if family == Family::Cox { status } else { None };

        let covariates = covariates
            .unwrap_or_else(|| (0..x.ncols()).map(|j| Covariate::continuous(format!("x{}", j + 1), j)).collect());
        let mut seen = vec![false; x.ncols()];
        for c in &covariates {
            if c.columns.is_empty() {
                return Err(Error::InvalidData(format!("covariate `{}` has no columns", c.name)));
            }
            if c.fp && c.columns.len() != 1 {
                return Err(Error::InvalidData(format!("FP covariate `{}` must be a single column", c.name)));
            }
            for &j in &c.columns {
                if j >= x.ncols() || seen[j] {
                    return Err(Error::InvalidData(format!(
                        "covariate `{}` references column {j} that is missing or shared",
                        c.name
                    )));
                }
                seen[j] = true;
            }
        }
        let fp_shifts = covariates
            .iter()
            .map(|c| {
                if c.fp {
                    let col: Vec<f64> = x.column(c.columns[0]).iter().copied().collect();
                    fp_shift(&col)
                } else {
                    0.0
                }
            })
            .collect();

        Ok(Self { family, y, x, weights, status, covariates, fp_shifts })
    }

    /// Rows `rows` (with repetition) as a new dataset with the same covariate
    /// layout. FP shifts are inherited so that models fitted on a subset
    /// transform the remaining rows consistently.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n()) {
            return Err(Error::InvalidData(format!("row {bad} out of range")));
        }
        let y = rows.iter().map(|&i| self.y[i]).collect();
        let w = rows.iter().map(|&i| self.weights[i]).collect();
        let x = self.x.select_rows(rows);
        let status = self.status.as_ref().map(|s| rows.iter().map(|&i| s[i]).collect());
        let mut out = Self::build(self.family, y, x, Some(w), status, Some(self.covariates.clone()))?;
        out.fp_shifts = self.fp_shifts.clone();
        Ok(out)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Follow-up times for Cox data (alias of the response).
    pub fn time(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn status(&self) -> Option<&[bool]> {
        self.status.as_deref()
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    pub fn fp_shifts(&self) -> &[f64] {
        &self.fp_shifts
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of candidate covariates (selectable units).
    pub fn p(&self) -> usize {
        self.covariates.len()
    }

    /// Count of uncensored observations; `n` for GLM families.
    pub fn n_obs(&self) -> usize {
        match &self.status {
            Some(s) => s.iter().filter(|e| **e).count(),
            None => self.n(),
        }
    }

    /// Sample size driving `n`-dependent priors and BIC: `n_obs` for Cox, `n` otherwise.
    pub fn n_eff(&self) -> f64 {
        self.n_obs() as f64
    }
}
