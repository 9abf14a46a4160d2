//! Model specifications, priors over the model space, exhaustive enumeration
//! and stochastic search, and model selection summaries.

mod enumerate;
mod posterior;
mod prior;
mod search;
mod select;
pub mod spec;

pub use enumerate::{enumerate_models, enumerate_range, enumeration_size, DEFAULT_BUDGET};
pub use posterior::{finalize, EvalCache, Evaluator, ModelEntry, ModelPosterior};
pub use prior::{ln_beta_binomial, ModelPrior, PriorMode};
pub use search::{merge_chains, run_chain, stochastic_search, top_k, ChainResult, SearchOptions};
pub use select::{select_bma, select_map, select_mpm, Mpm, Selection, DEFAULT_BMA_SIZE};
pub use spec::{fp_shift, fp_transform, nonlinear_fp_terms, FpPowers, ModelSpec, Power, Term, DEFAULT_POWERS};
