//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Exits 0 regardless of failures unless `TESTBF_ACCEPTANCE_STRICT=1`.
//! Criterion 13 needs user-supplied data: set `TESTBF_PBC_CONFIG` and/or
//! `TESTBF_GUSTO_CONFIG` to run configs for those datasets.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use testbf::{ingest_csv, RunConfig};
use testbf_core::bayes_factors::{
    chi2_sf, edwards_ratio_at_p, leb_shrinkage, max_dbf_linear, max_tbf, min_bf_identities, post_mode_shrinkage,
    tbf_bias_correction, tbf_fixed_g, tbf_incig, GPrior, GPriorSpec, IncIg,
};
use testbf_core::ic_weights::{information_criterion, Criterion};
use testbf_core::linmod::{fit_cox, fit_glm, Dataset, Family, FitOptions};
use testbf_core::model_space::{
    enumerate_models, merge_chains, run_chain, Evaluator, ModelPrior, ModelSpec, PriorMode, SearchOptions,
};
use testbf_core::posterior::{breslow_baseline, incig_cdf, incig_quantile, sample_coefficients, GPosterior};
use testbf_core::validation::{
    auc, log_score, run_replicate, summarize, BootstrapOptions, Resample, Scoring, Search, SelectionRule, Strategy,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn within(limit: Duration, t: Duration) -> bool {
    t < limit
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Log of the trapezoid rule for `∫₀¹ exp(f(v)) dv` with `m` intervals.
fn log_trapezoid(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let vals: Vec<f64> = (0..=m).map(|i| f(i as f64 / m as f64)).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        sum += w * (v - max).exp();
    }
    max + (sum / m as f64).ln()
}

struct LinearSim {
    d: usize,
    z: f64,
    delta: f64,
    delta_tilde: f64,
    log_mtbf: f64,
    log_mdbf: f64,
}

/// Gaussian datasets with n = 200 and d ∈ {1, 2, 5, 10}; the signal strength
/// is uniform so that z/n covers (0, 0.5) and beyond.
fn linear_simulations() -> Vec<LinearSim> {
    let n = 200;
    (0..500u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            rng.set_stream(rep);
            let d = [1usize, 2, 5, 10][rep as usize % 4];
            let x = DMatrix::from_fn(n, d, |_, _| normal(&mut rng));
            let strength = 0.6 * rng.random::<f64>();
            let y = (0..n).map(|i| strength * x.row(i).sum() / (d as f64).sqrt() + normal(&mut rng)).collect();
            let ds = Dataset::glm(Family::Gaussian, y, x).unwrap();
            let fit = fit_glm(&ds, &ModelSpec::from_mask((1u64 << d) - 1, d)).unwrap();
            let z = fit.deviance;
            let r2 = -(-z / n as f64).exp_m1();
            let log_mdbf = max_dbf_linear(r2, n as f64, d).unwrap();
            let log_mtbf = max_tbf(z, d).unwrap();
            let delta_tilde = tbf_bias_correction(z, d, n as f64).unwrap().delta;
            LinearSim { d, z, delta: log_mtbf - log_mdbf, delta_tilde, log_mtbf, log_mdbf }
        })
        .collect()
}

fn criterion_1(sims: &[LinearSim], elapsed: Duration) -> Outcome {
    let n = 200.0;
    let informative: Vec<&LinearSim> = sims.iter().filter(|s| s.log_mdbf > 0.0).collect();
    let worst = informative.iter().map(|s| s.delta).fold(f64::INFINITY, f64::min);
    let nonneg = informative.iter().all(|s| s.delta >= -1e-8);
    let tracked: Vec<&LinearSim> = sims.iter().filter(|s| s.z / n < 0.5).collect();
    let misses: Vec<&&LinearSim> =
        tracked.iter().filter(|s| (s.delta - s.delta_tilde).abs() >= 0.25 * s.delta.max(0.01)).collect();
    let mut by_d = String::new();
    for d in [1, 2, 5, 10] {
        by_d += &format!(" d={d}:{}", misses.iter().filter(|s| s.d == d).count());
    }
    check(
        nonneg && misses.is_empty() && within(Duration::from_secs(30), elapsed),
        format!(
            "min Δ over {} datasets with mDBF > 1 = {worst:.3e}; tracking misses {}/{} ({}); {:.2}s",
            informative.len(),
            misses.len(),
            tracked.len(),
            by_d.trim(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2(sims: &[LinearSim]) -> Outcome {
    let m = sims.len() as f64;
    let raw = sims.iter().map(|s| (s.log_mtbf - s.log_mdbf).abs()).sum::<f64>() / m;
    let corrected = sims.iter().map(|s| (s.log_mtbf - s.delta_tilde - s.log_mdbf).abs()).sum::<f64>() / m;
    check(corrected < raw, format!("mean |error| {raw:.4} uncorrected, {corrected:.4} corrected"))
}

/// IncIG TBF by quadrature in `v` with `1/(g + 1) = v²`, normalising the
/// prior with the same rule.
fn incig_oracle(z: f64, d: usize, a: f64, b: f64) -> f64 {
    let m = 200_000;
    let log_prior = |v: f64| {
        if v == 0.0 {
            return if a == 0.5 { 2f64.ln() } else { f64::NEG_INFINITY };
        }
        let w = v * v;
        (2.0 * v).ln() + (a - 1.0) * w.ln() - b * w
    };
    let log_like = |v: f64| {
        let w = v * v;
        0.5 * d as f64 * w.ln() + 0.5 * z * (1.0 - w)
    };
    let num = log_trapezoid(|v| if v == 0.0 { f64::NEG_INFINITY } else { log_prior(v) + log_like(v) }, m);
    num - log_trapezoid(log_prior, m)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let zs = [0.5, 3.0, 10.0, 40.0, 150.0];
    let ds = [1usize, 2, 4, 7, 12];
    let priors =
        [("hyper-g", 1.0, 0.0), ("zs-adapted n=100", 0.5, 51.5), ("IncIG(2,5)", 2.0, 5.0), ("IncIG(3,10)", 3.0, 10.0)];
    let mut cases: Vec<(f64, usize, &str, f64, f64)> = Vec::new();
    for &z in &zs {
        for &d in &ds {
            for &(name, a, b) in &priors {
                cases.push((z, d, name, a, b));
            }
        }
    }
    let worst = cases
        .par_iter()
        .map(|&(z, d, name, a, b)| {
            let v = tbf_incig(z, d, a, b).unwrap();
            ((v - incig_oracle(z, d, a, b)).exp_m1().abs(), name, z, d)
        })
        .reduce(|| (0.0, "", 0.0, 0), |x, y| if y.0 > x.0 { y } else { x });
    let t = start.elapsed();
    check(
        worst.0 < 1e-6 && within(Duration::from_secs(10), t),
        format!(
            "{} cases, worst relative error {:.2e} ({} z={} d={}); {:.2}s",
            cases.len(),
            worst.0,
            worst.1,
            worst.2,
            worst.3,
            t.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for &z in &[2.1, 5.0, 10.0, 50.0] {
        let m1 = min_bf_identities(z, 1).unwrap();
        let m2 = min_bf_identities(z, 2).unwrap();
        worst = worst.max((m1.bsb.unwrap() / m1.inv_mtbf - 1.0).abs());
        worst = worst.max((m2.selke.unwrap() / m2.inv_mtbf - 1.0).abs());
        for d in [1usize, 2] {
            let p = ChiSquared::new(d as f64).unwrap().sf(z);
            worst_p = worst_p.max((chi2_sf(z, d) / p - 1.0).abs());
        }
    }
    let ratio = edwards_ratio_at_p(0.05, 10_000).unwrap();
    check(
        worst < 1e-12 && worst_p < 1e-9 && (ratio - 1.0).abs() < 0.05,
        format!("closed forms max rel {worst:.1e} (p-values vs statrs {worst_p:.1e}); d=1e4 ratio {ratio:.4}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    for _ in 0..100 {
        let z = 200.0 * rng.random::<f64>();
        let d = rng.random_range(1..30usize);
        if post_mode_shrinkage(z, d, 1.0, 0.0).unwrap() != leb_shrinkage(z, d).unwrap() {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches}/100 bitwise mismatches"))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut analytic = true;
    for n in [10.0, 100.0, 1000.0] {
        let prior = IncIg::zs_adapted(n);
        // independent kernel: (g+1)^{-(a+1)} e^{-b/(g+1)}
        let (a, b) = (0.5, 0.5 * (n + 3.0));
        let kernel = |g: f64| -(a + 1.0) * (g + 1.0f64).ln() - b / (g + 1.0);
        // stationary point of the kernel: g + 1 = b/(a + 1)
        analytic &= (b / (a + 1.0) - 1.0 - n / 3.0).abs() <= 1e-12 * n && (prior.mode() - n / 3.0).abs() <= 1e-12 * n;
        let m = 2_000_000;
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
        for i in 0..=m {
            let g = 2.0 * n * i as f64 / m as f64;
            let v = kernel(g);
            if v > best {
                best = v;
                arg = g;
            }
        }
        worst = worst.max((arg - n / 3.0).abs() / n);
    }
    check(
        analytic && worst <= 1e-6,
        format!("analytic mode n/3: {analytic}; grid search max |ĝ - n/3|/n = {worst:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 400;
    let x = DMatrix::from_fn(n, 4, |_, _| normal(&mut rng));
    let y = (0..n)
        .map(|i| {
            let eta = -0.2 + 0.8 * x[(i, 0)] - 0.5 * x[(i, 1)] + 0.3 * x[(i, 2)];
            f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())))
        })
        .collect();
    let ds = Dataset::glm(Family::Binomial, y, x).unwrap();
    let m1 = fit_glm(&ds, &ModelSpec::from_mask(0b0001, 4)).unwrap();
    let m2 = fit_glm(&ds, &ModelSpec::from_mask(0b0111, 4)).unwrap();
    let z21 = 2.0 * (m2.loglik - m1.loglik);
    let mut worst: f64 = 0.0;
    for g in [0.5, 4.0, 50.0, 400.0, 1e4] {
        let lhs = tbf_fixed_g(m2.deviance, m2.dimension, g).unwrap();
        let rhs = tbf_fixed_g(z21, m2.dimension - m1.dimension, g).unwrap()
            + tbf_fixed_g(m1.deviance, m1.dimension, g).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    check(worst < 1e-10, format!("max |log TBF20 - (log TBF21 + log TBF10)| = {worst:.1e} over 5 values of g"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 150;
    let x = DMatrix::from_fn(n, 3, |_, _| normal(&mut rng));
    let y = (0..n)
        .map(|i| {
            let eta = 0.3 * x[(i, 0)] + 0.15 * x[(i, 1)];
            f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())))
        })
        .collect();
    let ds = Dataset::glm(Family::Binomial, y, x).unwrap();
    let prior = ModelPrior::variable_selection(3);
    let gspec = GPriorSpec::new(GPrior::hyper_g(), ds.n_eff()).unwrap();
    let opts = FitOptions::default();
    let exact = enumerate_models(&ds, &prior, &gspec, &opts, 1 << 10).unwrap();
    let start = Instant::now();
    let ev = Evaluator::new(&ds, &prior, gspec, opts).unwrap();
    let chain =
        run_chain(&ev, &SearchOptions { iterations: 100_000, top_k: 8, seed: 8, chain: 0, record_path: true }).unwrap();
    let t = start.elapsed();
    let path_len = chain.path.len() as f64;
    let mut worst: f64 = 0.0;
    for e in exact.entries() {
        let freq = chain.path.iter().filter(|s| **s == e.spec).count() as f64 / path_len;
        worst = worst.max((freq - e.post_prob).abs());
    }
    let merged = merge_chains(vec![chain], 8, &gspec, 3).unwrap();
    let worst_renorm = exact
        .entries()
        .iter()
        .map(|e| (merged.find(&e.spec).map_or(0.0, |m| m.post_prob) - e.post_prob).abs())
        .fold(0.0, f64::max);
    check(
        worst < 0.01 && worst_renorm < 1e-12 && within(Duration::from_secs(20), t),
        format!(
            "max |visit frequency - exact| = {worst:.4}; renormalised top-k {worst_renorm:.1e}; {:.2}s",
            t.as_secs_f64()
        ),
    )
}

/// Moments of g under IncIG(a', b') by Simpson's rule in v = 1/(g + 1),
/// where v has density ∝ v^{a'-1} e^{-b' v} on (0, 1).
fn incig_moments(a: f64, b: f64) -> (f64, f64) {
    let m = 400_000;
    let h = 1.0 / m as f64;
    let mut s = [0.0; 3];
    for i in 1..=m {
        let v = i as f64 * h;
        let w = if i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let dens = ((a - 1.0) * v.ln() - b * v).exp();
        let g = 1.0 / v - 1.0;
        s[0] += w * dens;
        s[1] += w * dens * g;
        s[2] += w * dens * g * g;
    }
    (s[1] / s[0], s[2] / s[0])
}

fn criterion_9() -> Outcome {
    let mut worst_rt: f64 = 0.0;
    for (a, b) in [(1.0, 0.0), (0.5, 51.5), (3.0, 12.0), (5.0, 40.0)] {
        for k in 1..200 {
            let p = k as f64 / 200.0;
            let g = incig_quantile(p, a, b).unwrap();
            worst_rt = worst_rt.max((incig_cdf(g, a, b).unwrap() - p).abs());
        }
    }
    // posterior of hyper-g with z = 12, d = 8 is IncIG(5, 6): four finite moments
    let (z, d) = (12.0, 8usize);
    let post = IncIg::hyper_g().posterior(z, d);
    let spec = GPriorSpec::new(GPrior::hyper_g(), 100.0).unwrap();
    let draws = GPosterior::new(z, d, &spec).unwrap().sample(1_000_000, 9).unwrap();
    let n = draws.len() as f64;
    let (m1, m2) = incig_moments(post.a, post.b);
    let mean = draws.iter().sum::<f64>() / n;
    let sq: Vec<f64> = draws.iter().map(|g| g * g).collect();
    let mean_sq = sq.iter().sum::<f64>() / n;
    let se1 = (draws.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let se2 = (sq.iter().map(|v| (v - mean_sq).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let (k1, k2) = ((mean - m1) / se1, (mean_sq - m2) / se2);
    check(
        worst_rt < 1e-10 && k1.abs() < 3.0 && k2.abs() < 3.0,
        format!("roundtrip max {worst_rt:.1e}; E[g] off by {k1:.2} SE, E[g²] off by {k2:.2} SE"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 500;
    let x = DMatrix::from_fn(n, 3, |_, _| normal(&mut rng));
    let y = (0..n)
        .map(|i| {
            let eta = 0.4 + 0.9 * x[(i, 0)] - 0.6 * x[(i, 1)] + 0.2 * x[(i, 2)];
            f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())))
        })
        .collect();
    let ds = Dataset::glm(Family::Binomial, y, x).unwrap();
    let fit = fit_glm(&ds, &ModelSpec::from_mask(0b111, 3)).unwrap();
    let s = 1_000_000;
    let draws = sample_coefficients(&fit, &vec![4.0; s], 10).unwrap();
    let target_mean = &fit.coefficients * 0.8;
    let target_cov = fit.info_beta.clone().try_inverse().unwrap() * 0.8;
    let d = fit.dimension;
    let off = usize::from(draws.has_intercept);
    let beta = draws.draws.columns(off, d);
    let mean = DVector::from_iterator(d, beta.column_iter().map(|c| c.mean()));
    let mut cov = DMatrix::zeros(d, d);
    for r in beta.row_iter() {
        let c = r.transpose() - &mean;
        cov += &c * c.transpose();
    }
    cov /= (s - 1) as f64;
    let worst_z =
        (0..d).map(|j| ((mean[j] - target_mean[j]) / (cov[(j, j)] / s as f64).sqrt()).abs()).fold(0.0, f64::max);
    let frob = (&cov - &target_cov).norm() / target_cov.norm();
    check(
        worst_z < 4.0 && frob < 0.05,
        format!("max mean deviation {worst_z:.2} SE; covariance Frobenius rel error {frob:.4}"),
    )
}

fn criterion_11() -> Outcome {
    let time = vec![4.0, 1.0, 6.0, 2.5, 5.0];
    let status = vec![true, true, false, true, true];
    let xv = [0.7, -0.3, 1.2, 0.4, -1.1];
    let ds = Dataset::cox(time.clone(), status.clone(), DMatrix::from_column_slice(5, 1, &xv)).unwrap();
    let fit = fit_cox(&ds, &ModelSpec::from_mask(1, 1)).unwrap();
    let b = fit.coefficients[0];
    // partial likelihood by enumerating each event's risk set
    let hand_pl = |beta: f64| -> f64 {
        (0..5)
            .filter(|&i| status[i])
            .map(|i| {
                let risk: f64 = (0..5).filter(|&j| time[j] >= time[i]).map(|j| (beta * xv[j]).exp()).sum();
                beta * xv[i] - risk.ln()
            })
            .sum()
    };
    let pl_err = (fit.loglik - hand_pl(b)).abs().max((fit.deviance - 2.0 * (hand_pl(b) - hand_pl(0.0))).abs());
    let center = xv.iter().sum::<f64>() / 5.0;
    let base = breslow_baseline(&ds, &fit.transform, &DVector::from_element(1, b)).unwrap();
    let mut events: Vec<f64> = (0..5).filter(|&i| status[i]).map(|i| time[i]).collect();
    events.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    let mut h_err: f64 = 0.0;
    for (k, t) in events.iter().enumerate() {
        let risk: f64 = (0..5).filter(|&j| time[j] >= *t).map(|j| (b * (xv[j] - center)).exp()).sum();
        acc += 1.0 / risk;
        h_err = h_err.max((base.cumhaz[k] - acc).abs());
    }
    let bic = information_criterion(&fit, Criterion::Bic, ds.n_eff()).unwrap();
    let bic_err = (bic - (-2.0 * fit.loglik + 4f64.ln())).abs();
    check(
        pl_err < 1e-6 && h_err < 1e-6 && bic_err < 1e-12 && ds.n_eff() == 4.0,
        format!("partial likelihood {pl_err:.1e}, Breslow {h_err:.1e}, BIC with n_obs = 4 {bic_err:.1e}"),
    )
}

fn criterion_12() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = 300;
    let pi: Vec<f64> = (0..m).map(|_| (rng.random_range(0..40) as f64) / 40.0).collect();
    let y: Vec<f64> = (0..m).map(|_| f64::from(u8::from(rng.random::<f64>() < 0.4))).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            if y[i] == 1.0 && y[j] == 0.0 {
                den += 1.0;
                num += if pi[i] > pi[j] {
                    1.0
                } else if pi[i] == pi[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    let auc_err = (auc(&pi, &y).unwrap() - num / den).abs();
    let ls_err = (log_score(&vec![0.5; m], &y).unwrap() - 2f64.ln()).abs();

    // null signal: outcome independent of the covariates
    let n = 500;
    let x = DMatrix::from_fn(n, 3, |_, _| normal(&mut rng));
    let yb: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<f64>() < 0.5))).collect();
    let ds = Dataset::glm(Family::Binomial, yb, x).unwrap();
    let strategy = Strategy {
        scoring: Scoring::Tbf(GPrior::zs_adapted(n as f64)),
        mode: PriorMode::VariableSelection,
        search: Search::default(),
        selection: SelectionRule::Bma(8),
        fit: FitOptions::default(),
    };
    let opts = BootstrapOptions { replicates: 200, seed: 12, resample: Resample::Bootstrap, ..Default::default() };
    let reps = (0..200).into_par_iter().map(|i| run_replicate(&ds, &strategy, &opts, i)).collect();
    let report = summarize(reps, &opts).unwrap();
    let t = start.elapsed();
    let mean_auc = report.auc.mean;
    check(
        auc_err < 1e-12 && ls_err < 1e-12 && (0.45..=0.55).contains(&mean_auc) && within(Duration::from_secs(120), t),
        format!(
            "AUC vs pairs {auc_err:.1e}; LS(0.5) - ln 2 = {ls_err:.1e}; null OOB AUC {mean_auc:.4} (B = 200, n = 500); {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn criterion_13() -> Outcome {
    let pbc = std::env::var_os("TESTBF_PBC_CONFIG").map(PathBuf::from);
    let gusto = std::env::var_os("TESTBF_GUSTO_CONFIG").map(PathBuf::from);
    if pbc.is_none() && gusto.is_none() {
        return Outcome::Skip(
            "set TESTBF_PBC_CONFIG / TESTBF_GUSTO_CONFIG to run configs for the user-supplied data".into(),
        );
    }
    let mut ok = true;
    let mut detail = Vec::new();
    if let Some(p) = pbc {
        match RunConfig::load(&p).and_then(|c| ingest_csv(&c.data.path, &c.data)) {
            Ok(ing) => {
                let (n, n_obs) = (ing.dataset.n(), ing.dataset.n_obs());
                ok &= n == 276 && n_obs == 111;
                detail.push(format!("PBC n = {n}, n_obs = {n_obs}"));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("PBC: {e}"));
            }
        }
    } else {
        detail.push("PBC not supplied".into());
    }
    if let Some(p) = gusto {
        let start = Instant::now();
        let result = RunConfig::load(&p).and_then(|c| {
            let ing = ingest_csv(&c.data.path, &c.data)?;
            testbf::run::run_select(&c, &ing).map(|run| (run, ing))
        });
        let t = start.elapsed();
        match result {
            Ok((run, ing)) => {
                let covs = ing.dataset.covariates();
                let mut mpm: Vec<&str> =
                    covs.iter().zip(&run.mpm.included).filter(|(_, i)| **i).map(|(c, _)| c.name.as_str()).collect();
                mpm.sort_unstable();
                let mut want = ["x1", "x2", "x3", "x5", "x6", "x8", "x10", "x16"];
                want.sort_unstable();
                ok &= mpm == want && covs.len() == 17 && t < Duration::from_secs(300);
                detail.push(format!(
                    "GUSTO MPM {{{}}} over {} covariates in {:.1}s",
                    mpm.join(","),
                    covs.len(),
                    t.as_secs_f64()
                ));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("GUSTO: {e}"));
            }
        }
    } else {
        detail.push("GUSTO not supplied".into());
    }
    check(ok, detail.join("; "))
}

fn main() {
    let start = Instant::now();
    let sims = linear_simulations();
    let sim_time = start.elapsed();
    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1(&sims, sim_time)),
        (2, criterion_2(&sims)),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
        (11, criterion_11()),
        (12, criterion_12()),
        (13, criterion_13()),
    ];
    let mut failed = 0;
    for (k, outcome) in &results {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("criterion {k:>2}: {tag}  {detail}");
    }
    println!("acceptance: {failed} failing criteria");
    if failed > 0 && std::env::var("TESTBF_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
