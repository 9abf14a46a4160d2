use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::strategy::Strategy;
use super::{score_predictions, ScoreReport};
use crate::linmod::{Dataset, Family};
use crate::{Error, Result};

pub const DEFAULT_MAX_FAILURE_RATE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    /// Draw `n` rows with replacement; score on the rows never drawn.
    Bootstrap,
    /// Fit and score on the full data (apparent performance).
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub resample: Resample,
    pub max_failure_rate: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { replicates: 1000, seed: 1, resample: Resample::Bootstrap, max_failure_rate: DEFAULT_MAX_FAILURE_RATE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub index: usize,
    pub in_bag: usize,
    pub oob: usize,
    pub score: Option<ScoreReport>,
    pub failure: Option<Error>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    /// Monte Carlo standard error of the mean.
    pub se: f64,
    pub count: usize,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let se = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            f64::NAN
        };
        Self { mean, se, count }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReport {
    pub replicates: Vec<ReplicateResult>,
    pub auc: MetricSummary,
    pub cs: MetricSummary,
    pub ls: MetricSummary,
    /// Replicates left out of the AUC and CS averages for a single-class
    /// validation set.
    pub single_class: usize,
    pub failed: usize,
}

/// Generator for replicate `index`: one stream per replicate of the master seed.
fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// In-bag rows (with multiplicity, in draw order) and out-of-bag rows.
pub fn replicate_rows(n: usize, seed: u64, index: usize, resample: Resample) -> (Vec<usize>, Vec<usize>) {
    match resample {
        Resample::Identity => ((0..n).collect(), (0..n).collect()),
        Resample::Bootstrap => {
            let mut rng = replicate_rng(seed, index);
            let in_bag: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut drawn = alloc::vec![false; n];
            for &i in &in_bag {
                drawn[i] = true;
            }
            let oob = (0..n).filter(|i| !drawn[*i]).collect();
            (in_bag, oob)
        }
    }
}

pub fn check_binary_family(ds: &Dataset) -> Result<()> {
    if ds.family() != Family::Binomial || ds.y().iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::Unsupported("bootstrap validation needs a binary outcome".into()));
    }
    Ok(())
}

/// Run one replicate. Failures are recorded rather than returned.
pub fn run_replicate(ds: &Dataset, strategy: &Strategy, opts: &BootstrapOptions, index: usize) -> ReplicateResult {
    let (in_bag, oob) = replicate_rows(ds.n(), opts.seed, index, opts.resample);
    // the search seed comes from a stream disjoint from the resampling draws
    let search_seed = {
        let mut rng = replicate_rng(opts.seed ^ 0x9e37_79b9_7f4a_7c15, index);
        rng.random::<u64>()
    };
    let outcome = (|| {
        if oob.is_empty() {
            return Err(Error::Empty("empty out-of-bag set".into()));
        }
        let train = ds.subset(&in_bag)?;
        let predictor = strategy.fit_predictor(&train, search_seed)?;
        let test_x = ds.x().select_rows(&oob);
        let pi = predictor.predict(&test_x)?;
        let y: Vec<f64> = oob.iter().map(|&i| ds.y()[i]).collect();
        score_predictions(&pi, &y)
    })();
    let (score, failure) = match outcome {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e)),
    };
    ReplicateResult { index, in_bag: in_bag.len(), oob: oob.len(), score, failure }
}

/// Aggregate replicates (sorted by index); too many failures abort.
pub fn summarize(mut replicates: Vec<ReplicateResult>, opts: &BootstrapOptions) -> Result<BootstrapReport> {
    replicates.sort_by_key(|r| r.index);
    let total = replicates.len();
    let failed = replicates.iter().filter(|r| r.failure.is_some()).count();
    if total == 0 {
        return Err(Error::Empty("no replicates".into()));
    }
    if failed as f64 > opts.max_failure_rate * total as f64 {
        return Err(Error::TooManyFailures { failed, total });
    }
    let scores: Vec<&ScoreReport> = replicates.iter().filter_map(|r| r.score.as_ref()).collect();
    let auc: Vec<f64> = scores.iter().filter_map(|s| s.auc).collect();
    let cs: Vec<f64> = scores.iter().filter_map(|s| s.cs).collect();
    let ls: Vec<f64> = scores.iter().map(|s| s.ls).collect();
    let single_class = scores.iter().filter(|s| s.auc.is_none()).count();
    Ok(BootstrapReport {
        auc: MetricSummary::of(&auc),
        cs: MetricSummary::of(&cs),
        ls: MetricSummary::of(&ls),
        single_class,
        failed,
        replicates,
    })
}

/// Bootstrap cross-validation, one replicate after another.
pub fn bootstrap_cv(ds: &Dataset, strategy: &Strategy, opts: &BootstrapOptions) -> Result<BootstrapReport> {
    check_binary_family(ds)?;
    if opts.replicates == 0 {
        return Err(Error::domain("at least one replicate is needed"));
    }
    let reps = (0..opts.replicates).map(|i| run_replicate(ds, strategy, opts, i)).collect();
    summarize(reps, opts)
}
