//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use testbf_core::bayes_factors::GPrior;
use testbf_core::ic_weights::Criterion;
use testbf_core::linmod::{Family, FitOptions};
use testbf_core::model_space::{PriorMode, DEFAULT_BMA_SIZE, DEFAULT_BUDGET};
use testbf_core::validation::{Scoring, Search, SelectionRule, Strategy};

use crate::error::{AppError, AppResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub model_prior: ModelPriorConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Gaussian,
    Binomial,
    Poisson,
    Cox,
}

impl From<FamilyName> for Family {
    fn from(f: FamilyName) -> Self {
        match f {
            FamilyName::Gaussian => Family::Gaussian,
            FamilyName::Binomial => Family::Binomial,
            FamilyName::Poisson => Family::Poisson,
            FamilyName::Cox => Family::Cox,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    pub family: FamilyName,
    /// Response column (GLM families).
    pub response: Option<String>,
    /// Follow-up time and event indicator columns (Cox).
    pub time: Option<String>,
    pub status: Option<String>,
    /// Optional case-weight column.
    pub weights: Option<String>,
    pub covariates: Vec<CovariateConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    #[default]
    Continuous,
    Binary,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateConfig {
    pub name: String,
    /// CSV header; defaults to `name`.
    pub column: Option<String>,
    #[serde(default)]
    pub kind: KindName,
    /// Eligible for fractional-polynomial transformation.
    #[serde(default)]
    pub fp: bool,
    /// Reference level for binary and categorical covariates.
    pub reference: Option<String>,
}

impl CovariateConfig {
    pub fn column(&self) -> &str {
        self.column.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriorConfig {
    FixedG {
        g: f64,
    },
    LocalEb {
        #[serde(default)]
        bias_correction: bool,
    },
    GlobalEb,
    Incig {
        a: f64,
        b: f64,
    },
    HyperG,
    ZsAdapted,
    ZellnerSiow,
    HyperGN,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig::LocalEb { bias_correction: false }
    }
}

impl PriorConfig {
    /// The g-prior for a sample size `n_eff`.
    pub fn resolve(&self, n_eff: f64) -> GPrior {
        match *self {
            PriorConfig::FixedG { g } => GPrior::FixedG(g),
            PriorConfig::LocalEb { bias_correction } => GPrior::LocalEb { bias_correction },
            PriorConfig::GlobalEb => GPrior::GlobalEb,
            PriorConfig::Incig { a, b } => GPrior::IncIg { a, b },
            PriorConfig::HyperG => GPrior::hyper_g(),
            PriorConfig::ZsAdapted => GPrior::zs_adapted(n_eff),
            PriorConfig::ZellnerSiow => GPrior::ZellnerSiow,
            PriorConfig::HyperGN => GPrior::HyperGOverN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelPriorConfig {
    #[default]
    Variable,
    Fp,
}

impl From<ModelPriorConfig> for PriorMode {
    fn from(m: ModelPriorConfig) -> Self {
        match m {
            ModelPriorConfig::Variable => PriorMode::VariableSelection,
            ModelPriorConfig::Fp => PriorMode::FpSelection,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SearchConfig {
    Exhaustive {
        #[serde(default = "default_budget")]
        budget: u64,
    },
    Mcmc {
        iterations: usize,
        #[serde(default = "default_top_k")]
        top_k: usize,
        #[serde(default = "default_chains")]
        chains: usize,
    },
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET as u64
}

fn default_top_k() -> usize {
    DEFAULT_BMA_SIZE
}

fn default_chains() -> usize {
    1
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig::Exhaustive { budget: default_budget() }
    }
}

impl From<SearchConfig> for Search {
    fn from(s: SearchConfig) -> Self {
        match s {
            SearchConfig::Exhaustive { budget } => Search::Exhaustive { budget: budget as u128 },
            SearchConfig::Mcmc { iterations, top_k, chains } => Search::Stochastic { iterations, top_k, chains },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SelectionConfig {
    Map,
    #[default]
    Mpm,
    Bma {
        #[serde(default = "default_top_k")]
        size: usize,
    },
}

impl From<SelectionConfig> for SelectionRule {
    fn from(s: SelectionConfig) -> Self {
        match s {
            SelectionConfig::Map => SelectionRule::Map,
            SelectionConfig::Mpm => SelectionRule::Mpm,
            SelectionConfig::Bma { size } => SelectionRule::Bma(size),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Time points for Cox survival curves; event-time quartiles when empty.
    #[serde(default)]
    pub times: Vec<f64>,
}

fn default_draws() -> usize {
    10_000
}

fn default_level() -> f64 {
    0.95
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { draws: default_draws(), level: default_level(), times: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringConfig {
    #[default]
    Tbf,
    Aic,
    Bic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub scoring: ScoringConfig,
    #[serde(default = "default_failure_rate")]
    pub max_failure_rate: f64,
}

fn default_replicates() -> usize {
    1000
}

fn default_failure_rate() -> f64 {
    testbf_core::validation::DEFAULT_MAX_FAILURE_RATE
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { replicates: default_replicates(), scoring: ScoringConfig::Tbf, max_failure_rate: default_failure_rate() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report path; stdout when absent.
    pub report: Option<PathBuf>,
    /// Directory for CSV exports; none are written when absent.
    pub exports: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> AppResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(AppError::config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; relative data and output paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path.display(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    pub fn rebase(&mut self, dir: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        join(&mut self.data.path);
        if let Some(p) = self.output.report.as_mut() {
            join(p);
        }
        if let Some(p) = self.output.exports.as_mut() {
            join(p);
        }
    }

    /// Checks that need no data.
    pub fn validate(&self) -> AppResult<()> {
        let d = &self.data;
        match d.family {
            FamilyName::Cox => {
                if d.response.is_some() {
                    return Err(AppError::config("cox data takes `time` and `status`, not `response`"));
                }
            }
            _ => {
                if d.response.is_none() {
                    return Err(AppError::config("GLM families need a `response` column"));
                }
                if d.time.is_some() || d.status.is_some() {
                    return Err(AppError::config("`time` and `status` apply to cox data only"));
                }
            }
        }
        let mut names: Vec<&str> = d.covariates.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(AppError::config(format!("covariate `{}` listed twice", w[0])));
        }
        for c in &d.covariates {
            if c.fp && c.kind != KindName::Continuous {
                return Err(AppError::config(format!("FP covariate `{}` must be continuous", c.name)));
            }
            if c.reference.is_some() && c.kind == KindName::Continuous {
                return Err(AppError::config(format!("continuous covariate `{}` has no reference level", c.name)));
            }
        }
        match self.prior {
            PriorConfig::FixedG { g } if !(g >= 0.0 && g.is_finite()) => {
                return Err(AppError::config("fixed g must be finite and non-negative"))
            }
            PriorConfig::Incig { a, b } if !(a > 0.0 && b >= 0.0 && b.is_finite()) => {
                return Err(AppError::config("IncIG needs a > 0 and b >= 0"))
            }
            _ => {}
        }
        if let SearchConfig::Mcmc { iterations, top_k, chains } = self.search {
            if iterations == 0 || top_k == 0 || chains == 0 {
                return Err(AppError::config("mcmc iterations, top_k and chains must be positive"));
            }
        }
        if let SelectionConfig::Bma { size: 0 } = self.selection {
            return Err(AppError::config("bma size must be positive"));
        }
        let s = &self.sampling;
        if s.draws == 0 || !(s.level > 0.0 && s.level < 1.0) {
            return Err(AppError::config("sampling needs draws > 0 and 0 < level < 1"));
        }
        if s.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(AppError::config("survival times must be finite and non-negative"));
        }
        let v = &self.validation;
        if v.replicates == 0 || !(0.0..=1.0).contains(&v.max_failure_rate) {
            return Err(AppError::config("validation needs replicates > 0 and a failure rate in [0, 1]"));
        }
        if v.scoring != ScoringConfig::Tbf && self.model_prior == ModelPriorConfig::Fp {
            return Err(AppError::config("AIC/BIC scoring covers variable selection only"));
        }
        Ok(())
    }

    pub fn mode(&self) -> PriorMode {
        self.model_prior.into()
    }

    /// The selection strategy cross-validated by `validate`.
    pub fn strategy(&self, n_eff: f64) -> Strategy {
        let scoring = match self.validation.scoring {
            ScoringConfig::Tbf => Scoring::Tbf(self.prior.resolve(n_eff)),
            ScoringConfig::Aic => Scoring::Ic(Criterion::Aic),
            ScoringConfig::Bic => Scoring::Ic(Criterion::Bic),
        };
        Strategy {
            scoring,
            mode: self.mode(),
            search: self.search.into(),
            selection: self.selection.into(),
            fit: FitOptions::default(),
        }
    }
}
