//! Selection, sampling and validation pipelines with rayon parallelism.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use testbf_core::bayes_factors::GPriorSpec;
use testbf_core::linmod::{Covariate, Dataset, Family, FitOptions, FitSummary};
use testbf_core::model_space::{
    enumerate_range, enumeration_size, finalize, merge_chains, run_chain, select_bma, select_map, select_mpm,
    ChainResult, Evaluator, ModelEntry, ModelPosterior, ModelPrior, ModelSpec, Mpm, PriorMode, SearchOptions, Term,
};
use testbf_core::posterior::{
    g_posterior_for, predict_glm_draws, sample_coefficients, survival_curves, CoefficientDraws, GSummary,
    PredictiveSummary,
};
use testbf_core::validation::{
    check_binary_family, run_replicate, score_predictions, summarize, BootstrapOptions, BootstrapReport, Resample,
    ScoreReport,
};

use crate::config::{RunConfig, SearchConfig, SelectionConfig};
use crate::error::{AppError, AppResult};
use crate::ingest::Ingested;

/// Models per parallel enumeration task.
const CHUNK: u64 = 512;

/// Run `f` on a pool with `threads` workers (0: rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Independent sub-seeds of the master seed (splitmix64 finaliser).
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const TAG_G: u64 = 1;
const TAG_BETA: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum SearchStats {
    Exhaustive { models: u64 },
    Mcmc { chains: Vec<(usize, usize, usize)> },
}

#[derive(Debug, Clone)]
pub struct SelectRun {
    pub gspec: GPriorSpec,
    pub prior: ModelPrior,
    pub posterior: ModelPosterior,
    pub stats: SearchStats,
    pub map: usize,
    pub mpm: Mpm,
    /// Models for the configured selection rule with their weights.
    pub chosen: Vec<(ModelEntry, f64)>,
    pub g_summaries: Vec<Option<GSummary>>,
}

pub fn model_prior(cfg: &RunConfig, ds: &Dataset) -> ModelPrior {
    match cfg.mode() {
        PriorMode::VariableSelection => ModelPrior::variable_selection(ds.p()),
        PriorMode::FpSelection => ModelPrior::fp_default(ds.covariates()),
    }
}

pub fn gprior_spec(cfg: &RunConfig, ds: &Dataset) -> AppResult<GPriorSpec> {
    let n_eff = ds.n_eff();
    Ok(GPriorSpec::new(cfg.prior.resolve(n_eff), n_eff)?)
}

fn chunks(total: u64) -> Vec<Range<u64>> {
    (0..total.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(total)).collect()
}

/// The model posterior; enumeration chunks and chains run in parallel and
/// merge in a fixed order, so results do not depend on the thread count.
pub fn search(
    cfg: &RunConfig,
    ds: &Dataset,
    prior: &ModelPrior,
    gspec: &GPriorSpec,
) -> AppResult<(ModelPosterior, SearchStats)> {
    let ev = Evaluator::new(ds, prior, *gspec, FitOptions::default())?;
    match cfg.search {
        SearchConfig::Exhaustive { budget } => {
            let total = enumeration_size(prior, budget as u128)?;
            let parts =
                chunks(total).into_par_iter().map(|r| enumerate_range(&ev, r)).collect::<Result<Vec<_>, _>>()?;
            let post = finalize(parts.concat(), gspec, prior.p())?;
            Ok((post, SearchStats::Exhaustive { models: total }))
        }
        SearchConfig::Mcmc { iterations, top_k, chains } => {
            let runs: Vec<ChainResult> = (0..chains as u64)
                .into_par_iter()
                .map(|chain| {
                    run_chain(&ev, &SearchOptions { iterations, top_k, seed: cfg.seed, chain, record_path: false })
                })
                .collect::<Result<_, _>>()?;
            let stats = runs.iter().map(|r| (r.visited.len(), r.accepted, r.evaluated)).collect();
            let post = merge_chains(runs, top_k, gspec, prior.p())?;
            Ok((post, SearchStats::Mcmc { chains: stats }))
        }
    }
}

/// Entries and weights for a selection rule. An MPM that was never evaluated
/// is scored on demand.
pub fn chosen_models(
    post: &ModelPosterior,
    rule: SelectionConfig,
    mpm: &Mpm,
    ev: &Evaluator<'_>,
) -> AppResult<Vec<(ModelEntry, f64)>> {
    let pick = |i: usize, w: f64| (post.entries()[i].clone(), w);
    Ok(match rule {
        SelectionConfig::Map => vec![pick(select_map(post), 1.0)],
        SelectionConfig::Bma { size } => {
            select_bma(post, size).members.into_iter().filter(|(_, w)| *w > 0.0).map(|(i, w)| pick(i, w)).collect()
        }
        SelectionConfig::Mpm => {
            if mpm.members.members.is_empty() {
                vec![(ev.evaluate(&mpm.spec)?, 1.0)]
            } else {
                mpm.members.members.iter().map(|&(i, w)| pick(i, w)).collect()
            }
        }
    })
}

pub fn run_select(cfg: &RunConfig, ing: &Ingested) -> AppResult<SelectRun> {
    let ds = &ing.dataset;
    let prior = model_prior(cfg, ds);
    let gspec = gprior_spec(cfg, ds)?;
    let (posterior, stats) = with_threads(cfg.threads, || search(cfg, ds, &prior, &gspec))??;
    let ev = Evaluator::new(ds, &prior, gspec, FitOptions::default())?;
    let map = select_map(&posterior);
    let mpm = select_mpm(&posterior, cfg.mode());
    let chosen = chosen_models(&posterior, cfg.selection, &mpm, &ev)?;
    let g_summaries = chosen
        .iter()
        .map(|(e, _)| g_posterior_for(e, &posterior, &gspec).and_then(|g| g.summary(cfg.sampling.level)).ok())
        .collect();
    Ok(SelectRun { gspec, prior, posterior, stats, map, mpm, chosen, g_summaries })
}

/// Posterior summary of one coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefSummary {
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct MemberDraws {
    pub entry: ModelEntry,
    pub weight: f64,
    pub draws: usize,
    pub g: Option<GSummary>,
    pub coefficients: Vec<CoefSummary>,
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub select: SelectRun,
    pub members: Vec<MemberDraws>,
    /// Model-averaged prediction at the covariate means: the mean response
    /// for GLMs, survival at `times` for Cox.
    pub prediction: Option<PredictiveSummary>,
    pub times: Vec<f64>,
}

/// Split `total` draws in proportion to `weights` (largest remainder, ties to
/// the earlier member).
pub fn allocate(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        out[i] += 1;
        rest -= 1;
    }
    out
}

/// Labels of the design columns a spec produces.
pub fn design_labels(spec: &ModelSpec, covariates: &[Covariate], names: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for (term, cov) in spec.terms().iter().zip(covariates) {
        match term {
            Term::Excluded => {}
            Term::Linear => out.extend(cov.columns.iter().map(|&j| names[j].clone())),
            Term::Fp(powers) => {
                let mut prev: Option<f64> = None;
                for p in powers.powers() {
                    let base = if p == 0.0 { format!("log({})", cov.name) } else { format!("{}^{}", cov.name, p) };
                    out.push(if prev == Some(p) { format!("{base}*log({})", cov.name) } else { base });
                    prev = Some(p);
                }
            }
        }
    }
    out
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize_column(label: String, values: impl Iterator<Item = f64>, level: f64) -> CoefSummary {
    let mut v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    v.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    CoefSummary {
        label,
        mean,
        sd,
        median: quantile_sorted(&v, 0.5),
        lower: quantile_sorted(&v, tail),
        upper: quantile_sorted(&v, 1.0 - tail),
    }
}

fn coefficient_summaries(draws: &CoefficientDraws, labels: &[String], level: f64) -> Vec<CoefSummary> {
    let mut out = Vec::new();
    if draws.has_intercept {
        out.push(summarize_column("(intercept)".into(), (0..draws.len()).map(|s| draws.intercept(s)), level));
    }
    let offset = usize::from(draws.has_intercept);
    for (j, label) in labels.iter().enumerate() {
        out.push(summarize_column(label.clone(), draws.draws.column(offset + j).iter().copied(), level));
    }
    out
}

/// Quartiles of the observed event times.
fn default_times(ds: &Dataset) -> Vec<f64> {
    let mut t: Vec<f64> = match ds.status() {
        Some(s) => ds.time().iter().zip(s).filter(|(_, e)| **e).map(|(t, _)| *t).collect(),
        None => return Vec::new(),
    };
    if t.is_empty() {
        return Vec::new();
    }
    t.sort_by(f64::total_cmp);
    [0.25, 0.5, 0.75].iter().map(|q| quantile_sorted(&t, *q)).collect()
}

pub fn run_sample(cfg: &RunConfig, ing: &Ingested) -> AppResult<SampleRun> {
    let select = run_select(cfg, ing)?;
    let ds = &ing.dataset;
    let ev = Evaluator::new(ds, &select.prior, select.gspec, FitOptions::default())?;
    let level = cfg.sampling.level;
    let weights: Vec<f64> = select.chosen.iter().map(|(_, w)| *w).collect();
    let counts = allocate(cfg.sampling.draws, &weights);

    let mean_row = DMatrix::from_fn(1, ds.x().ncols(), |_, j| ds.x().column(j).mean());
    let times = if cfg.sampling.times.is_empty() { default_times(ds) } else { cfg.sampling.times.clone() };

    struct Drawn {
        member: MemberDraws,
        draws: Option<CoefficientDraws>,
    }
    let jobs: Vec<(usize, &(ModelEntry, f64), usize)> =
        select.chosen.iter().zip(&counts).enumerate().map(|(i, (c, k))| (i, c, *k)).collect();
    let drawn: Vec<Drawn> = with_threads(cfg.threads, || {
        jobs.into_par_iter()
            .map(|(i, (entry, w), k)| -> AppResult<Drawn> {
                let gpost = g_posterior_for(entry, &select.posterior, &select.gspec)?;
                let g = gpost.summary(level).ok();
                if k == 0 {
                    let member = MemberDraws { entry: entry.clone(), weight: *w, draws: 0, g, coefficients: vec![] };
                    return Ok(Drawn { member, draws: None });
                }
                let fit: FitSummary = ev.fit(&entry.spec)?;
                let g_draws = gpost.sample(k, derive_seed(cfg.seed, TAG_G, i as u64))?;
                let draws = sample_coefficients(&fit, &g_draws, derive_seed(cfg.seed, TAG_BETA, i as u64))?;
                let labels = design_labels(&entry.spec, ds.covariates(), &ing.column_names);
                let coefficients = coefficient_summaries(&draws, &labels, level);
                let member = MemberDraws { entry: entry.clone(), weight: *w, draws: k, g, coefficients };
                Ok(Drawn { member, draws: Some(draws) })
            })
            .collect::<AppResult<Vec<_>>>()
    })??;

    let parts: Vec<(DMatrix<f64>, f64)> = drawn
        .iter()
        .filter_map(|d| d.draws.as_ref().map(|dr| (dr, d.member.weight)))
        .map(|(dr, w)| -> AppResult<(DMatrix<f64>, f64)> {
            let m = if ds.family() == Family::Cox {
                survival_curves(dr, ds, &mean_row, &times)?.survival.swap_remove(0)
            } else {
                predict_glm_draws(dr, &mean_row)?
            };
            Ok((m, w))
        })
        .collect::<AppResult<_>>()?;
    let prediction = if ds.family() == Family::Cox && times.is_empty() {
        None
    } else {
        let refs: Vec<(&DMatrix<f64>, f64)> = parts.iter().map(|(m, w)| (m, *w)).collect();
        Some(PredictiveSummary::from_mixture(&refs, level)?)
    };
    let members = drawn.into_iter().map(|d| d.member).collect();
    Ok(SampleRun { select, members, prediction, times: if ds.family() == Family::Cox { times } else { vec![] } })
}

pub fn run_validate(cfg: &RunConfig, ing: &Ingested) -> AppResult<BootstrapReport> {
    let ds = &ing.dataset;
    check_binary_family(ds)?;
    let strategy = cfg.strategy(ds.n_eff());
    let opts = BootstrapOptions {
        replicates: cfg.validation.replicates,
        seed: cfg.seed,
        resample: Resample::Bootstrap,
        max_failure_rate: cfg.validation.max_failure_rate,
    };
    let reps = with_threads(cfg.threads, || {
        (0..opts.replicates).into_par_iter().map(|i| run_replicate(ds, &strategy, &opts, i)).collect::<Vec<_>>()
    })?;
    Ok(summarize(reps, &opts)?)
}

/// Score a CSV of predicted probabilities against binary outcomes.
pub fn score_csv<R: std::io::Read>(reader: R, pred: &str, outcome: &str) -> AppResult<ScoreReport> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AppError::Core(testbf_core::Error::Schema(format!("column `{name}` not found in header"))))
    };
    let (pj, yj) = (find(pred)?, find(outcome)?);
    let mut pi = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| {
            rec[j].parse::<f64>().map_err(|_| {
                AppError::Core(testbf_core::Error::InvalidData(format!(
                    "row {}, column `{}`: cannot parse `{}` as a number",
                    i + 1,
                    &header[j],
                    &rec[j]
                )))
            })
        };
        pi.push(parse(pj)?);
        y.push(parse(yj)?);
    }
    Ok(score_predictions(&pi, &y)?)
}

/// Posterior probabilities recomputed from log TBF and log prior columns.
pub fn recompute_probabilities(log_tbf: &[f64], log_prior: &[f64]) -> Vec<f64> {
    let lp: Vec<f64> = log_tbf.iter().zip(log_prior).map(|(a, b)| a + b).collect();
    let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = lp.iter().map(|v| (v - max).exp()).sum();
    let norm = max + total.ln();
    lp.iter().map(|v| (v - norm).exp()).collect()
}
