use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::posterior::{finalize, EvalCache, Evaluator, ModelEntry, ModelPosterior};
use super::prior::{ModelPrior, PriorMode};
use super::spec::{ModelSpec, Term};
use crate::bayes_factors::GPriorSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Chain length, counting the initial (null) model.
    pub iterations: usize,
    /// Number of distinct best models kept.
    pub top_k: usize,
    pub seed: u64,
    /// Stream of the seeded generator, so parallel chains stay independent.
    pub chain: u64,
    pub record_path: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { iterations: 100_000, top_k: 8_000, seed: 1, chain: 0, record_path: false }
    }
}

/// One chain's visited models before normalisation.
#[derive(Debug, Clone)]
pub struct ChainResult {
    /// Distinct visited models, best first, at most `top_k`.
    pub visited: Vec<ModelEntry>,
    /// The chain's state after every iteration, when recorded.
    pub path: Vec<ModelSpec>,
    pub accepted: usize,
    pub evaluated: usize,
}

fn propose_variable(rng: &mut ChaCha8Rng, current: &ModelSpec) -> ModelSpec {
    let p = current.p();
    let mut next = current.clone();
    if rng.random::<bool>() {
        let k = rng.random_range(0..p);
        let flipped = if current.includes(k) { Term::Excluded } else { Term::Linear };
        next.set_term(k, flipped);
    } else {
        let inc: Vec<usize> = current.included().collect();
        let exc: Vec<usize> = (0..p).filter(|k| !current.includes(*k)).collect();
        if !inc.is_empty() && !exc.is_empty() {
            let i = inc[rng.random_range(0..inc.len())];
            let j = exc[rng.random_range(0..exc.len())];
            next.set_term(j, current.term(i));
            next.set_term(i, Term::Excluded);
        }
    }
    next
}

/// FP moves: re-draw one covariate's term among all its other choices, or
/// change the transformation of one included FP-eligible covariate among its
/// other included terms. Both are symmetric.
fn propose_fp(rng: &mut ChaCha8Rng, prior: &ModelPrior, current: &ModelSpec) -> ModelSpec {
    let p = current.p();
    let mut next = current.clone();
    if rng.random::<bool>() {
        let k = rng.random_range(0..p);
        let others: Vec<Term> = prior.choices(k).into_iter().filter(|t| *t != current.term(k)).collect();
        next.set_term(k, others[rng.random_range(0..others.len())]);
    } else {
        let eligible: Vec<usize> = current.included().filter(|k| prior.is_fp_eligible(*k)).collect();
        if !eligible.is_empty() {
            let k = eligible[rng.random_range(0..eligible.len())];
            let others: Vec<Term> =
                prior.choices(k).into_iter().filter(|t| t.is_included() && *t != current.term(k)).collect();
            next.set_term(k, others[rng.random_range(0..others.len())]);
        }
    }
    next
}

/// Metropolis-Hastings over model specs starting from the null model.
pub fn run_chain(ev: &Evaluator<'_>, opts: &SearchOptions) -> Result<ChainResult> {
    if opts.iterations == 0 || opts.top_k == 0 {
        return Err(Error::domain("iterations and top_k must be at least 1"));
    }
    let prior = ev.prior();
    let p = prior.p();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(opts.chain);

    let mut cache = EvalCache::new();
    let mut visited: BTreeMap<ModelSpec, ModelEntry> = BTreeMap::new();
    let mut current = ModelSpec::null(p);
    let mut current_lp = cache.get_or_eval(ev, &current)?.log_post();
    visited.insert(current.clone(), cache.get_or_eval(ev, &current)?.clone());
    let mut path = Vec::new();
    if opts.record_path {
        path.push(current.clone());
    }
    let mut accepted = 0;

    for _ in 1..opts.iterations {
        if p > 0 {
            let proposal = match prior.mode() {
                PriorMode::VariableSelection => propose_variable(&mut rng, &current),
                PriorMode::FpSelection => propose_fp(&mut rng, prior, &current),
            };
            let lp = cache.get_or_eval(ev, &proposal)?.log_post();
            let log_ratio = lp - current_lp;
            let u: f64 = rng.random();
            let accept =
                lp > f64::NEG_INFINITY && (current_lp == f64::NEG_INFINITY || log_ratio >= 0.0 || u.ln() < log_ratio);
            if accept {
                if proposal != current {
                    accepted += 1;
                }
                current = proposal;
                current_lp = lp;
                if !visited.contains_key(&current) {
                    visited.insert(current.clone(), cache.get_or_eval(ev, &current)?.clone());
                }
            }
        }
        if opts.record_path {
            path.push(current.clone());
        }
    }
    let evaluated = cache.len();
    Ok(ChainResult { visited: top_k(visited.into_values().collect(), opts.top_k), path, accepted, evaluated })
}

/// Deduplicate by spec and keep the `k` best by unnormalised posterior.
pub fn top_k(mut entries: Vec<ModelEntry>, k: usize) -> Vec<ModelEntry> {
    entries.sort_by(|a, b| b.log_post().total_cmp(&a.log_post()).then(a.d.cmp(&b.d)).then(a.spec.cmp(&b.spec)));
    let mut seen = BTreeMap::new();
    entries.retain(|e| seen.insert(e.spec.clone(), ()).is_none());
    entries.truncate(k);
    entries
}

/// Merge chains (in the given order), keep the best `top_k` and normalise over
/// that stored set, applying the global-EB correction when requested.
pub fn merge_chains(chains: Vec<ChainResult>, top: usize, gspec: &GPriorSpec, p: usize) -> Result<ModelPosterior> {
    let all: Vec<ModelEntry> = chains.into_iter().flat_map(|c| c.visited).collect();
    finalize(top_k(all, top), gspec, p)
}

/// Single-chain stochastic search.
pub fn stochastic_search(ev: &Evaluator<'_>, opts: &SearchOptions) -> Result<(ModelPosterior, ChainResult)> {
    let chain = run_chain(ev, opts)?;
    let post = finalize(chain.visited.clone(), ev.gspec(), ev.prior().p())?;
    Ok((post, chain))
}
