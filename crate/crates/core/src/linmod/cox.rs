use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::data::Dataset;
use super::design::{center_design, weighted_rank, DesignTransform};
use super::{FitOptions, FitSummary, Ties};
use crate::model_space::spec::ModelSpec;
use crate::{Error, Result};

/// Breslow partial log-likelihood with gradient and negative Hessian.
pub(crate) struct PartialLik {
    pub loglik: f64,
    pub score: DVector<f64>,
    pub info: DMatrix<f64>,
}

/// Indices sorted by decreasing time, grouped by tied times.
fn risk_order(time: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..time.len()).collect();
    order.sort_by(|&a, &b| time[b].total_cmp(&time[a]));
    order
}

pub(crate) fn partial_likelihood(
    time: &[f64],
    status: &[bool],
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    with_derivatives: bool,
) -> PartialLik {
    let n = time.len();
    let d = beta.len();
    let eta: Vec<f64> = (0..n).map(|i| (0..d).map(|j| x[(i, j)] * beta[j]).sum()).collect();
    let offset = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let order = risk_order(time);

    let mut s0 = 0.0;
    let mut s1 = DVector::<f64>::zeros(d);
    let mut s2 = DMatrix::<f64>::zeros(d, d);
    let mut loglik = 0.0;
    let mut score = DVector::<f64>::zeros(d);
    let mut info = DMatrix::<f64>::zeros(d, d);

    let mut start = 0;
    while start < n {
        let t = time[order[start]];
        let mut end = start;
        while end < n && time[order[end]] == t {
            end += 1;
        }
        // everyone at time t joins the risk set before the events at t are scored
        for &i in &order[start..end] {
            let r = (eta[i] - offset).exp();
            s0 += r;
            if with_derivatives {
                for a in 0..d {
                    s1[a] += r * x[(i, a)];
                    for b in 0..=a {
                        s2[(a, b)] += r * x[(i, a)] * x[(i, b)];
                    }
                }
            }
        }
        let events: Vec<usize> = order[start..end].iter().copied().filter(|&i| status[i]).collect();
        if !events.is_empty() {
            let m = events.len() as f64;
            loglik += events.iter().map(|&i| eta[i]).sum::<f64>() - m * (s0.ln() + offset);
            if with_derivatives {
                for a in 0..d {
                    let xbar_a = s1[a] / s0;
                    score[a] += events.iter().map(|&i| x[(i, a)]).sum::<f64>() - m * xbar_a;
                    for b in 0..=a {
                        info[(a, b)] += m * (s2[(a, b)] / s0 - xbar_a * s1[b] / s0);
                    }
                }
            }
        }
        start = end;
    }
    for a in 0..d {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    PartialLik { loglik, score, info }
}

pub(crate) fn null_partial_loglik(ds: &Dataset) -> Result<f64> {
    let status = ds.status().ok_or(Error::NoEvents)?;
    if !status.iter().any(|e| *e) {
        return Err(Error::NoEvents);
    }
    let empty = DMatrix::zeros(ds.n(), 0);
    Ok(partial_likelihood(ds.time(), status, &empty, &DVector::zeros(0), false).loglik)
}

pub(crate) fn fit_null_cox(ds: &Dataset) -> Result<FitSummary> {
    let ll0 = null_partial_loglik(ds)?;
    Ok(FitSummary {
        family: ds.family(),
        deviance: 0.0,
        dimension: 0,
        intercept: None,
        coefficients: DVector::zeros(0),
        info_intercept: None,
        info_beta: DMatrix::zeros(0, 0),
        converged: true,
        iterations: 0,
        loglik: ll0,
        null_loglik: ll0,
        sigma2: None,
        transform: DesignTransform {
            spec: ModelSpec::null(ds.p()),
            covariates: ds.covariates().to_vec(),
            shifts: ds.fp_shifts().to_vec(),
            centers: Vec::new(),
        },
    })
}

pub(crate) fn fit_cox(ds: &Dataset, spec: &ModelSpec, opts: &FitOptions) -> Result<FitSummary> {
    if opts.ties != Ties::Breslow {
        return Err(Error::Unsupported("only Breslow ties are implemented".into()));
    }
    let null = fit_null_cox(ds)?;
    if spec.is_null() {
        return Ok(null);
    }
    let status = ds.status().ok_or(Error::NoEvents)?;
    let design = center_design(ds, spec)?;
    let d = design.ncols();
    let rank = weighted_rank(&design, opts.rank_tol);
    if rank < d {
        return Err(Error::SingularDesign { rank, columns: d });
    }
    let x = &design.xc;
    let time = ds.time();

    let mut beta = DVector::zeros(d);
    let mut current = partial_likelihood(time, status, x, &beta, true);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let Some(chol) = current.info.clone().cholesky() else {
            return Err(stuck(iterations, &current, &beta));
        };
        let step = chol.solve(&current.score);
        let mut proposal = &beta + &step;
        let mut next = partial_likelihood(time, status, x, &proposal, true);
        let mut halvings = 0;
        while (!next.loglik.is_finite() || next.loglik < current.loglik - 1e-12 * current.loglik.abs()) && halvings < 30
        {
            proposal = (&proposal + &beta) * 0.5;
            next = partial_likelihood(time, status, x, &proposal, true);
            halvings += 1;
        }
        let moved = (&proposal - &beta).amax();
        let scale = 1.0 + proposal.amax();
        let rel = (next.loglik - current.loglik).abs() / (next.loglik.abs() + 0.1);
        beta = proposal;
        current = next;
        if rel < opts.tol && moved <= 1e-7 * scale {
            let deviance = (2.0 * (current.loglik - null.loglik)).max(0.0);
            return Ok(FitSummary {
                family: ds.family(),
                deviance,
                dimension: d,
                intercept: None,
                coefficients: beta,
                info_intercept: None,
                info_beta: current.info,
                converged: true,
                iterations,
                loglik: current.loglik,
                null_loglik: null.loglik,
                sigma2: None,
                transform: DesignTransform {
                    spec: spec.clone(),
                    covariates: ds.covariates().to_vec(),
                    shifts: ds.fp_shifts().to_vec(),
                    centers: design.centers,
                },
            });
        }
    }
    Err(stuck(iterations, &current, &beta))
}

fn stuck(iterations: usize, current: &PartialLik, beta: &DVector<f64>) -> Error {
    Error::NonConvergence {
        iterations,
        last_deviance: -2.0 * current.loglik,
        last_coefficients: beta.iter().copied().collect(),
    }
}

/// Breslow partial log-likelihood at `beta` on a centered design.
pub fn cox_partial_loglik(ds: &Dataset, xc: &DMatrix<f64>, beta: &[f64]) -> f64 {
    let status = ds.status().expect("Cox dataset");
    partial_likelihood(ds.time(), status, xc, &DVector::from_column_slice(beta), false).loglik
}
